//! Self-check suites run by `polycd verify`.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::Serialize;

use super::{
    check_reduction_identity, check_sequence_lemma, finite_diff_gradient, least_squares_curvature, reference_solve,
    relative_error, simplex_decompose, truncated_gaps, ReferenceOptions, SequenceLemma,
};
use crate::away::{check_linear_bound, polycdwa_solve};
use crate::objective::{KdeHuberObjective, LeastSquaresObjective, LogisticObjective, Objective};
use crate::polycd::{check_sublinear_bound, polycd_solve, SolveConfig};
use crate::polytope::Polytope;
use crate::problems::{gen_quadratic, rng, uniform_simplex, QuadraticSpec};
use crate::step::StepRule;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn gaussian(r: &mut rand_chacha::ChaCha20Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| r.sample::<f64, _>(rand_distr::StandardNormal))
}

fn gradients(trials: usize) -> crate::error::Result<(f64, f64, f64)> {
    let mut r = rng(11);
    let (mut ls_worst, mut lg_worst, mut kde_worst) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..trials {
        let a = gaussian(&mut r, 8, 5);
        let b = Array1::from_shape_fn(8, |_| r.gen_range(-1.0..1.0));
        let labels = Array1::from_shape_fn(8, |_| if r.gen::<bool>() { 1.0 } else { -1.0 });
        let x = Array1::from_shape_fn(5, |_| r.gen_range(-1.0..1.0));
        let ls = LeastSquaresObjective::least_squares(a.clone(), b)?;
        let lg = LogisticObjective::logistic(a, labels)?;
        for (obj, worst) in [(&ls as &dyn Objective, &mut ls_worst), (&lg, &mut lg_worst)] {
            let fd = finite_diff_gradient(obj, x.view(), 1e-5)?;
            *worst = worst.max(relative_error(fd.view(), obj.gradient_at(x.view()).view(), 1e-8));
        }
        let pts = gaussian(&mut r, 30, 2) * 1.5;
        let kde = KdeHuberObjective::new(pts, 1.0, 0.4)?;
        let w = uniform_simplex(&mut r, 30);
        let fd = finite_diff_gradient(&kde, w.view(), 1e-5)?;
        kde_worst = kde_worst.max(relative_error(fd.view(), kde.gradient_at(w.view()).view(), 1e-8));
    }
    Ok((ls_worst, lg_worst, kde_worst))
}

fn decompositions(trials: usize) -> crate::error::Result<f64> {
    let mut r = rng(12);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let a = uniform_simplex(&mut r, 6);
        let b = uniform_simplex(&mut r, 6);
        let dec = simplex_decompose(a.view(), b.view())?;
        let recon = (&dec.p - &dec.q) * (dec.eta / 2.0);
        worst = worst.max((&recon - &(&a - &b)).iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(worst)
}

fn reduction(trials: usize) -> crate::error::Result<f64> {
    let mut r = rng(13);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let q = gen_quadratic(&QuadraticSpec { dim: 4, rows: 4, seed: r.gen() })?;
        let obj = LeastSquaresObjective::least_squares(q.a, q.b)?;
        let xs: Vec<Array1<f64>> = (0..5).map(|_| uniform_simplex(&mut r, 4)).collect();
        let gs: Vec<Array1<f64>> = xs.iter().map(|x| obj.gradient_at(x.view())).collect();
        let z = uniform_simplex(&mut r, 4);
        worst = worst.max(check_reduction_identity(&gs, &xs, &z)?);
    }
    Ok(worst)
}

/// (bound violations, lemma failures) over random quadratics on small simplices.
fn sublinear(trials: usize) -> crate::error::Result<(usize, usize)> {
    let (mut violations, mut lemma_failures) = (0, 0);
    for seed in 0..trials as u64 {
        let m = [3, 5, 8][seed as usize % 3];
        let q = gen_quadratic(&QuadraticSpec { dim: m, rows: m.max(2) - 1, seed })?;
        let p = Polytope::simplex(m)?;
        for rule in [StepRule::LineSearch, StepRule::Gradient] {
            let mut obj = LeastSquaresObjective::least_squares(q.a.clone(), q.b.clone())?;
            let l = obj.smoothness();
            let cfg = SolveConfig { max_outer: 50, rel_improve_tol: 0.0, ..SolveConfig::with_rule(rule) };
            let run = polycd_solve(&mut obj, &p, &cfg)?;
            let reference = reference_solve(&obj, &p, &ReferenceOptions { grid_check: false, ..Default::default() })?;
            let f_star = reference.f.min(run.final_value());
            let d = p.diameter().value;
            violations += check_sublinear_bound(&run.trace, f_star, m, l, d, rule).violations();
            let lambda = match rule {
                StepRule::LineSearch => 1.0 / (2.0 * m as f64 * l * d * d),
                StepRule::Gradient => 1.0 / (8.0 * m as f64 * l * d * d),
            };
            let values: Vec<f64> = run.trace.iter().skip(1).map(|r| r.f_value).collect();
            let gaps = truncated_gaps(&values, f_star, 1e-9 * f_star.abs().max(1.0));
            if check_sequence_lemma(&gaps, lambda) != SequenceLemma::Holds {
                lemma_failures += 1;
            }
        }
    }
    Ok((violations, lemma_failures))
}

fn linear(trials: usize) -> crate::error::Result<usize> {
    let mut violations = 0;
    for seed in 0..trials as u64 {
        let m = 3 + seed as usize % 2;
        let q = gen_quadratic(&QuadraticSpec { dim: m, rows: m + 2, seed: 1000 + seed })?;
        let (mu, _) = least_squares_curvature(&q.a);
        let p = Polytope::simplex(m)?;
        let psi = p.facial_distance()?;
        for rule in [StepRule::LineSearch, StepRule::Gradient] {
            let mut obj = LeastSquaresObjective::least_squares(q.a.clone(), q.b.clone())?;
            let l = obj.smoothness();
            let cfg = SolveConfig { max_outer: 30, rel_improve_tol: 0.0, ..SolveConfig::with_rule(rule) };
            let run = polycdwa_solve(&mut obj, &p, &cfg)?;
            let reference = reference_solve(&obj, &p, &ReferenceOptions { grid_check: false, ..Default::default() })?;
            let f_star = reference.f.min(run.final_value());
            let d = p.diameter().value;
            violations += check_linear_bound(&run.trace, f_star, m, l, d, mu, psi, rule).violations();
        }
    }
    Ok(violations)
}

fn reference_vs_grid() -> crate::error::Result<f64> {
    let q = gen_quadratic(&QuadraticSpec { dim: 3, rows: 4, seed: 5 })?;
    let obj = LeastSquaresObjective::least_squares(q.a, q.b)?;
    let p = Polytope::simplex(3)?;
    let r = reference_solve(&obj, &p, &ReferenceOptions::default())?;
    Ok(r.grid_value.unwrap_or(f64::NAN) - r.f)
}

/// Runs every suite; `quick` uses fewer random trials.
pub fn run_suites(quick: bool) -> Vec<SuiteOutcome> {
    let scale = if quick { 1 } else { 10 };
    let mut out = Vec::new();
    out.push(match gradients(10 * scale) {
        Ok((ls, lg, kde)) => SuiteOutcome {
            name: "gradient-finite-differences",
            passed: ls <= 1e-4 && lg <= 1e-4 && kde <= 1e-3,
            detail: format!("least squares {ls:.2e}, logistic {lg:.2e}, kde {kde:.2e}"),
        },
        Err(e) => SuiteOutcome { name: "gradient-finite-differences", passed: false, detail: e.to_string() },
    });
    out.push(match decompositions(1000 * scale) {
        Ok(w) => SuiteOutcome {
            name: "simplex-decompose",
            passed: w <= 1e-14,
            detail: format!("max reconstruction error {w:.2e}"),
        },
        Err(e) => SuiteOutcome { name: "simplex-decompose", passed: false, detail: e.to_string() },
    });
    out.push(match reduction(10 * scale) {
        Ok(w) => {
            SuiteOutcome { name: "reduction-identity", passed: w <= 1e-9, detail: format!("max discrepancy {w:.2e}") }
        }
        Err(e) => SuiteOutcome { name: "reduction-identity", passed: false, detail: e.to_string() },
    });
    out.push(match sublinear(3 * scale) {
        Ok((v, l)) => SuiteOutcome {
            name: "sublinear-rate-and-sequence-lemma",
            passed: v == 0 && l == 0,
            detail: format!("{v} bound violations, {l} sequence-lemma failures"),
        },
        Err(e) => SuiteOutcome { name: "sublinear-rate-and-sequence-lemma", passed: false, detail: e.to_string() },
    });
    out.push(match linear(2 * scale) {
        Ok(v) => SuiteOutcome { name: "linear-rate", passed: v == 0, detail: format!("{v} bound violations") },
        Err(e) => SuiteOutcome { name: "linear-rate", passed: false, detail: e.to_string() },
    });
    out.push(match reference_vs_grid() {
        Ok(diff) => SuiteOutcome {
            name: "reference-vs-grid",
            passed: (-1e-9..=1e-6).contains(&diff),
            detail: format!("grid minus reference {diff:.2e}"),
        },
        Err(e) => SuiteOutcome { name: "reference-vs-grid", passed: false, detail: e.to_string() },
    });
    out
}
