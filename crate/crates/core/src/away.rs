//! Cyclic vertex descent with away steps.
//!
//! The iterate is kept together with convex weights `λ` over the vertex
//! list, `x = Σ_j λ_j v^j`. Toward vertex `i` the step may be negative down
//! to `−λ_i / (1 − λ_i)`, which moves weight away from `v^i`; hitting that
//! bound exactly is a drop step and zeroes `λ_i`.

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::polycd::{
    build_report, check_dims, check_weights, choose_alpha, visit_sequence, BoundReport, InnerRecord, SolveConfig,
    Start, StopReason, TraceRecord, Tracker,
};
use crate::polytope::Polytope;
use crate::step::StepRule;

/// Largest backward step ever used, standing in for an unbounded interval.
pub const GAMMA_CAP: f64 = 1e12;

/// Relative distance to the lower bound within which a step is snapped to a
/// drop step.
pub const DROP_SNAP: f64 = 1e-14;

/// Simplex tolerance for the weights after every inner step.
pub const WEIGHT_TOL: f64 = 1e-10;

/// Reconstruction tolerance enforced by [`weight_refresh`].
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

/// Largest admissible backward step toward a vertex with weight `lambda_i`:
/// λ/(1−λ), infinite when λ = 1.
pub fn away_gamma(lambda_i: f64) -> f64 {
    if lambda_i >= 1.0 {
        f64::INFINITY
    } else {
        lambda_i / (1.0 - lambda_i)
    }
}

/// Convex weights over the vertex list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwayState {
    pub lambda: Vec<f64>,
}

impl AwayState {
    pub fn vertex(m: usize, j: usize) -> Self {
        let mut lambda = vec![0.0; m];
        lambda[j] = 1.0;
        AwayState { lambda }
    }

    /// Indices with positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.lambda.iter().enumerate().filter(|(_, &l)| l > 0.0).map(|(j, _)| j).collect()
    }

    /// max(|Σλ − 1|, −min λ)
    pub fn simplex_violation(&self) -> f64 {
        let sum: f64 = self.lambda.iter().sum();
        let min = self.lambda.iter().copied().fold(f64::INFINITY, f64::min);
        (sum - 1.0).abs().max(-min).max(0.0)
    }

    /// Applies the weight update of a step of size `alpha` toward vertex `i`.
    /// Returns true when the step was a drop step.
    pub fn step(&mut self, i: usize, alpha: f64) -> bool {
        if alpha == 0.0 {
            return false;
        }
        let gamma = away_gamma(self.lambda[i]);
        let keep = 1.0 - alpha;
        for l in self.lambda.iter_mut() {
            *l *= keep;
        }
        let dropped = alpha == -gamma;
        self.lambda[i] = if dropped { 0.0 } else { self.lambda[i] + alpha };
        dropped
    }
}

/// ‖x − Σ λ_j v^j‖ / (1 + ‖x‖)
pub fn reconstruction_residual(state: &AwayState, x: ArrayView1<f64>, p: &Polytope) -> Result<f64> {
    let recon = p.combine(&state.lambda)?;
    let diff = &recon - &x;
    Ok(diff.dot(&diff).sqrt() / (1.0 + x.dot(&x).sqrt()))
}

/// Clips negative weights, renormalizes, and checks that the weights still
/// reproduce `x`.
pub fn weight_refresh(state: &AwayState, x: ArrayView1<f64>, p: &Polytope) -> Result<AwayState> {
    let mut lambda: Vec<f64> = state.lambda.iter().map(|&l| l.max(0.0)).collect();
    let sum: f64 = lambda.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Consistency("weights vanished".into()));
    }
    lambda.iter_mut().for_each(|l| *l /= sum);
    let out = AwayState { lambda };
    let residual = reconstruction_residual(&out, x, p)?;
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::Consistency(format!(
            "weights no longer reproduce the iterate (relative residual {residual:.3e})"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AwayStats {
    pub drop_steps: usize,
    /// Inner steps with a negative step size.
    pub away_steps: usize,
    pub refreshes: usize,
    /// Largest simplex violation of the weights seen after any inner step.
    pub max_simplex_violation: f64,
    /// Largest relative reconstruction residual seen at a refresh.
    pub max_reconstruction_residual: f64,
}

#[derive(Debug, Clone)]
pub struct AwaySolveResult {
    pub x: Array1<f64>,
    pub weights: AwayState,
    pub trace: Vec<TraceRecord>,
    pub inner: Vec<InnerRecord>,
    pub stop: StopReason,
    pub stats: AwayStats,
}

impl AwaySolveResult {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.f_value)
    }
}

fn refresh(state: &mut AwayState, obj: &dyn Objective, p: &Polytope, stats: &mut AwayStats) -> Result<()> {
    let residual = reconstruction_residual(state, obj.point(), p)?;
    stats.max_reconstruction_residual = stats.max_reconstruction_residual.max(residual);
    *state = weight_refresh(state, obj.point(), p)?;
    stats.refreshes += 1;
    Ok(())
}

/// Runs cyclic vertex descent with away steps, `α ∈ [−γ_i, 1]`.
pub fn polycdwa_solve(obj: &mut dyn Objective, p: &Polytope, cfg: &SolveConfig) -> Result<AwaySolveResult> {
    check_dims(obj, p)?;
    if cfg.max_outer == 0 {
        return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
    }
    let m = p.num_vertices();
    let order = visit_sequence(&cfg.visit_order, m)?;
    let mut state = match &cfg.start {
        Start::FirstVertex => AwayState::vertex(m, 0),
        Start::Vertex(j) => {
            p.vertex_ref(*j)?;
            AwayState::vertex(m, *j)
        }
        Start::Weights(lambda) => {
            check_weights(lambda, m)?;
            AwayState { lambda: lambda.clone() }
        }
        Start::Current => {
            return Err(Error::Unsupported("the away variant needs start weights, not just a point".into()))
        }
    };
    obj.set_point(p.combine(&state.lambda)?.view())?;

    let refresh_every = cfg.weight_refresh_every.max(1);
    let mut stats = AwayStats::default();
    let mut tracker = Tracker::new(cfg, obj);
    let mut stop = StopReason::MaxOuter;
    for t in 1..=cfg.max_outer {
        for &i in &order {
            let li = state.lambda[i];
            let alpha = if li >= 1.0 {
                // x = v^i already; the segment is a single point
                0.0
            } else {
                let v = p.vertex_unchecked(i);
                let gamma = away_gamma(li).min(GAMMA_CAP);
                let skip = cfg.skip_inactive && li == 0.0 && obj.segment_query(v.into()).b >= 0.0;
                let mut alpha = if skip { 0.0 } else { choose_alpha(obj, v.into(), cfg, -gamma, 1.0)? };
                if gamma > 0.0 && (alpha + gamma).abs() <= DROP_SNAP * gamma.max(1.0) {
                    alpha = -gamma;
                }
                if alpha != 0.0 {
                    obj.apply_step(v.into(), alpha);
                    if alpha < 0.0 {
                        stats.away_steps += 1;
                    }
                    if state.step(i, alpha) {
                        stats.drop_steps += 1;
                    }
                }
                alpha
            };
            tracker.steps += 1;

            let violation = state.simplex_violation();
            stats.max_simplex_violation = stats.max_simplex_violation.max(violation);
            if violation > WEIGHT_TOL {
                // one clean-up attempt before giving up
                refresh(&mut state, obj, p, &mut stats)?;
                if state.simplex_violation() > WEIGHT_TOL {
                    return Err(Error::Consistency("weights left the unit simplex".into()));
                }
            } else if tracker.steps.is_multiple_of(refresh_every) {
                refresh(&mut state, obj, p, &mut stats)?;
            }
            if cfg.record_inner {
                tracker.inner.push(InnerRecord { t, vertex: i, alpha, f_value: obj.value() });
            }
        }
        if let Some(reason) = tracker.close_outer(t, obj) {
            stop = reason;
            break;
        }
    }
    refresh(&mut state, obj, p, &mut stats)?;
    Ok(AwaySolveResult {
        x: obj.point().to_owned(),
        weights: state,
        trace: tracker.trace,
        inner: tracker.inner,
        stop,
        stats,
    })
}

/// Checks f(x^t) − f* ≤ (G/(1+G))^t (f(x^0) − f*) for t ≥ 0 with
/// G = 1 + 9MLD²/(μψ²) for line search and G = 2 + 16MLD²/(μψ²) for the
/// gradient rule.
#[allow(clippy::too_many_arguments)]
pub fn check_linear_bound(
    trace: &[TraceRecord],
    f_star: f64,
    m: usize,
    lipschitz: f64,
    diameter: f64,
    strong_convexity: f64,
    facial_distance: f64,
    rule: StepRule,
) -> BoundReport {
    let ratio = m as f64 * lipschitz * diameter * diameter / (strong_convexity * facial_distance * facial_distance);
    let g = match rule {
        StepRule::LineSearch => 1.0 + 9.0 * ratio,
        StepRule::Gradient => 2.0 + 16.0 * ratio,
    };
    let rate = g / (1.0 + g);
    let Some(first) = trace.iter().find(|r| r.t == 0) else {
        return build_report(std::iter::empty(), f_star);
    };
    let gap0 = first.f_value - f_star;
    build_report(trace.iter().map(|r| (r.t, r.f_value - f_star, rate.powi(r.t as i32) * gap0)), f_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::LeastSquaresObjective;
    use ndarray::{array, Array2};

    #[test]
    fn gamma_examples() {
        assert_eq!(away_gamma(0.0), 0.0);
        assert!((away_gamma(0.25) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(away_gamma(1.0), f64::INFINITY);
    }

    #[test]
    fn weight_update_zero_step_is_fixed_point() {
        let mut s = AwayState { lambda: vec![0.2, 0.3, 0.5] };
        s.step(1, 0.0);
        assert_eq!(s.lambda, vec![0.2, 0.3, 0.5]);
    }

    #[test]
    fn drop_step_writes_exact_zero() {
        let mut s = AwayState { lambda: vec![0.2, 0.3, 0.5] };
        let g = away_gamma(0.3);
        assert!(s.step(1, -g));
        assert_eq!(s.lambda[1], 0.0);
        assert!((s.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(s.support(), vec![0, 2]);
    }

    #[test]
    fn refresh_examples() {
        let p = Polytope::simplex(3).unwrap();
        let s = AwayState { lambda: vec![0.5, 0.5 - 1e-14, 1e-14] };
        let x = array![0.5, 0.5, 0.0];
        let r = weight_refresh(&s, x.view(), &p).unwrap();
        assert!((r.lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-16);

        let s = AwayState { lambda: vec![0.5, 0.5, -1e-15] };
        let r = weight_refresh(&s, x.view(), &p).unwrap();
        assert_eq!(r.lambda[2], 0.0);

        let far = array![0.0, 0.0, 1.0];
        assert!(matches!(weight_refresh(&s, far.view(), &p), Err(Error::Consistency(_))));
    }

    #[test]
    fn step_from_vertex_start() {
        // f = ‖x‖² on the 2-simplex from e1
        let mut obj = LeastSquaresObjective::least_squares(Array2::eye(2), Array1::zeros(2)).unwrap();
        let p = Polytope::simplex(2).unwrap();
        let cfg = SolveConfig { max_outer: 1, record_inner: true, ..Default::default() };
        let res = polycdwa_solve(&mut obj, &p, &cfg).unwrap();
        assert_eq!(res.inner[0].alpha, 0.0);
        assert!((res.inner[1].alpha - 0.5).abs() < 1e-12);
        assert!((res.weights.lambda[0] - 0.5).abs() < 1e-12);
        assert!((res.weights.lambda[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn current_start_is_rejected() {
        let mut obj = LeastSquaresObjective::least_squares(Array2::eye(2), Array1::zeros(2)).unwrap();
        let p = Polytope::simplex(2).unwrap();
        let cfg = SolveConfig { start: Start::Current, ..Default::default() };
        assert!(matches!(polycdwa_solve(&mut obj, &p, &cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn linear_bound_at_start_is_initial_gap() {
        let trace = vec![TraceRecord { t: 0, f_value: 3.0, elapsed: 0.0, inner_steps_taken: 0, nnz: 1 }];
        let rep = check_linear_bound(&trace, 1.0, 3, 2.0, 2f64.sqrt(), 1.0, 1.0, StepRule::LineSearch);
        assert_eq!(rep.bounds, vec![2.0]);
        assert!(rep.holds());
    }
}
