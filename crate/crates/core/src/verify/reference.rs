//! High-accuracy optimal values for gap and bound checks.

use std::time::{Duration, Instant};

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::polytope::{Polytope, PolytopeKind};

#[derive(Debug, Clone)]
pub struct ReferenceOptions {
    /// Relative tolerance on the projected-gradient residual and on the
    /// Frank-Wolfe gap; either one meeting it counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; the first vertex when absent.
    pub warm_start: Option<Array1<f64>>,
    /// Cross-check against a grid search when the polytope has at most
    /// three free dimensions.
    pub grid_check: bool,
    pub time_limit: Option<f64>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { tol: 1e-12, max_iter: 1_000_000, warm_start: None, grid_check: true, time_limit: None }
    }
}

#[derive(Debug, Clone)]
pub struct Reference {
    pub x: Array1<f64>,
    pub f: f64,
    /// ‖x − P(x − ∇f(x)/L)‖ / max(‖x‖, 1)
    pub residual: f64,
    /// ⟨∇f(x), x − v_FW⟩, an upper bound on f(x) − f*.
    pub fw_gap: f64,
    pub iterations: usize,
    /// Best grid value when the grid cross-check ran.
    pub grid_value: Option<f64>,
}

/// ⟨∇f(x), x − v⟩ for the vertex v minimizing ⟨∇f(x), v⟩. For convex f this
/// bounds f(x) − min over the polytope from above.
pub fn frank_wolfe_gap(obj: &dyn Objective, p: &Polytope, x: ArrayView1<f64>) -> f64 {
    fw_gap(p, obj.gradient_at(x).view(), x)
}

fn fw_gap(p: &Polytope, g: ArrayView1<f64>, x: ArrayView1<f64>) -> f64 {
    let dots = p.vertex_dots(g);
    let min = dots.iter().copied().fold(f64::INFINITY, f64::min);
    g.dot(&x) - min
}

/// Projected gradient with step 1/L. Does not touch the objective's iterate.
pub fn reference_solve(obj: &dyn Objective, p: &Polytope, opts: &ReferenceOptions) -> Result<Reference> {
    if obj.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: obj.dim() });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig("reference tolerance must be positive".into()));
    }
    let step = 1.0 / obj.smoothness();
    let mut x = match &opts.warm_start {
        Some(w) => p.project(w.view())?,
        None => p.vertex(0)?,
    };
    let started = Instant::now();
    let budget = opts.time_limit.map(Duration::from_secs_f64);
    let mut residual = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let g = obj.gradient_at(x.view());
        gap = fw_gap(p, g.view(), x.view());
        let next = p.project((&x - &(&g * step)).view())?;
        let diff = &next - &x;
        residual = diff.dot(&diff).sqrt() / x.dot(&x).sqrt().max(1.0);
        let scale = obj.value_at(x.view()).abs().max(1.0);
        if residual <= opts.tol || gap <= opts.tol * scale {
            converged = true;
            break;
        }
        x = next;
        iterations += 1;
        if budget.is_some_and(|b| started.elapsed() >= b) {
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { residual: residual.min(gap), iterations });
    }
    let f = obj.value_at(x.view());
    let grid_value = if opts.grid_check { grid_minimum(obj, p) } else { None };
    if let Some(gv) = grid_value {
        if f > gv + 1e-9 * gv.abs().max(1.0) {
            return Err(Error::Consistency(format!("reference value {f} is worse than the grid minimum {gv}")));
        }
    }
    Ok(Reference { x, f, residual, fw_gap: gap, iterations, grid_value })
}

type Lift = Box<dyn Fn(&[f64]) -> Option<Array1<f64>>>;

/// Box-and-filter parametrization of a low-dimensional polytope.
struct Grid {
    free: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    lift: Lift,
}

fn grid_for(p: &Polytope) -> Option<Grid> {
    match *p.kind() {
        PolytopeKind::StandardSimplex { dim } if dim <= 4 => Some(Grid {
            free: dim - 1,
            lo: vec![0.0; dim - 1],
            hi: vec![1.0; dim - 1],
            lift: Box::new(move |y: &[f64]| {
                let s: f64 = y.iter().sum();
                if y.iter().any(|&v| v < 0.0) || s > 1.0 + 1e-15 {
                    return None;
                }
                let mut x: Vec<f64> = y.to_vec();
                x.push((1.0 - s).max(0.0));
                Some(Array1::from(x))
            }),
        }),
        PolytopeKind::L1Ball { dim, radius } if dim <= 3 => Some(Grid {
            free: dim,
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
            lift: Box::new(move |y: &[f64]| {
                let s: f64 = y.iter().map(|v| v.abs()).sum();
                (s <= radius * (1.0 + 1e-15)).then(|| Array1::from(y.to_vec()))
            }),
        }),
        _ => None,
    }
}

fn scan(obj: &dyn Objective, grid: &Grid, lo: &[f64], hi: &[f64], h: f64, best: &mut (f64, Vec<f64>)) {
    let k = grid.free;
    let counts: Vec<usize> = (0..k).map(|a| ((hi[a] - lo[a]) / h).round() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut y = vec![0.0; k];
    for flat in 0..total {
        let mut rest = flat;
        for a in 0..k {
            let idx = rest % counts[a];
            rest /= counts[a];
            y[a] = (lo[a] + idx as f64 * h).clamp(grid.lo[a], grid.hi[a]);
        }
        if let Some(x) = (grid.lift)(&y) {
            let f = obj.value_at(x.view());
            if f < best.0 {
                *best = (f, y.clone());
            }
        }
    }
}

/// Minimum of f over a grid on the polytope (step 1e-3 of the box width for
/// up to two free dimensions, 1e-2 for three), refined twice by a factor of
/// ten around the best point. `None` when the polytope is not supported.
pub fn grid_minimum(obj: &dyn Objective, p: &Polytope) -> Option<f64> {
    let grid = grid_for(p)?;
    let k = grid.free;
    if k == 0 {
        return (grid.lift)(&[]).map(|x| obj.value_at(x.view()));
    }
    let width = (0..k).map(|a| grid.hi[a] - grid.lo[a]).fold(0.0, f64::max);
    let mut h = width * if k <= 2 { 1e-3 } else { 1e-2 };
    let mut best = (f64::INFINITY, vec![0.0; k]);
    scan(obj, &grid, &grid.lo.clone(), &grid.hi.clone(), h, &mut best);
    for _ in 0..2 {
        let centre = best.1.clone();
        let lo: Vec<f64> = centre.iter().map(|c| c - h).collect();
        let hi: Vec<f64> = centre.iter().map(|c| c + h).collect();
        h /= 10.0;
        scan(obj, &grid, &lo, &hi, h, &mut best);
    }
    best.0.is_finite().then_some(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::LeastSquaresObjective;
    use ndarray::{array, Array2};

    #[test]
    fn squared_norm_on_three_simplex() {
        let obj = LeastSquaresObjective::least_squares(Array2::eye(3), Array1::zeros(3)).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let r = reference_solve(&obj, &p, &ReferenceOptions::default()).unwrap();
        assert!((r.f - 1.0 / 3.0).abs() < 1e-10);
        assert!(r.grid_value.unwrap() >= r.f - 1e-12);
    }

    #[test]
    fn motivating_problem() {
        let obj = LeastSquaresObjective::least_squares(Array2::eye(2), array![2.0, 2.0]).unwrap();
        let p = Polytope::l1_ball(2, 1.0).unwrap();
        let r = reference_solve(&obj, &p, &ReferenceOptions::default()).unwrap();
        assert!((r.f - 4.5).abs() < 1e-9);
        assert!((r.grid_value.unwrap() - 4.5).abs() < 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let obj = LeastSquaresObjective::least_squares(Array2::eye(3), Array1::zeros(3)).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let opts = ReferenceOptions { max_iter: 0, ..Default::default() };
        assert!(matches!(reference_solve(&obj, &p, &opts), Err(Error::NotConverged { .. })));
    }
}
