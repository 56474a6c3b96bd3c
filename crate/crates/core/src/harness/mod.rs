//! Experiment runner: builds problem instances, runs solvers, computes
//! optimality gaps against the best value found, and writes traces and
//! summaries.

mod config;
mod output;

pub use config::{ExperimentConfig, Method, Preset, SolverSpec};
pub use output::{emit_plot_data, write_trace_csv, TRACE_HEADER};

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use log::warn;
use ndarray::Array1;
use serde::Serialize;

use crate::away::polycdwa_solve;
use crate::baselines::{afw_solve, fista_solve, fw_solve, twocd_solve, unlift_l1, BaselineConfig};
use crate::error::{Error, Result};
use crate::objective::{KdeHuberObjective, LeastSquaresObjective, LogisticObjective, Objective};
use crate::polycd::{count_nonzeros, polycd_solve, SolveConfig, TraceRecord};
use crate::polytope::Polytope;
use crate::problems::{
    gen_kde, gen_lasso, gen_logistic, gen_quadratic, KdeSpec, LassoSpec, LogisticSpec, QuadraticSpec, RNG_ID,
};
use crate::step::StepRule;

/// (f̂ − f*) / max(|f*|, 1)
pub fn compute_gap(f_hat: f64, f_star: f64) -> f64 {
    (f_hat - f_star) / f_star.abs().max(1.0)
}

/// A generated instance: objective plus feasible set.
#[derive(Debug, Clone)]
pub enum Problem {
    Lasso { obj: LeastSquaresObjective, radius: f64 },
    Logistic { obj: LogisticObjective, radius: f64 },
    Kde(KdeHuberObjective),
    Quadratic(LeastSquaresObjective),
}

impl Problem {
    /// Instance of `cfg`'s preset for data seed `seed`.
    pub fn generate(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        match cfg.preset {
            Preset::Lasso => {
                let spec = LassoSpec { seed, ..cfg.lasso.clone().unwrap_or_default() };
                let data = gen_lasso(&spec)?;
                let radius = cfg.radius.unwrap_or(data.radius);
                Ok(Problem::Lasso { obj: LeastSquaresObjective::least_squares(data.a, data.b)?, radius })
            }
            Preset::Logistic => {
                let spec = LogisticSpec { seed, ..cfg.logistic.clone().unwrap_or_default() };
                let data = gen_logistic(&spec)?;
                let radius = cfg.radius.unwrap_or(data.radius);
                Ok(Problem::Logistic { obj: LogisticObjective::logistic(data.a, data.labels)?, radius })
            }
            Preset::Kde => {
                let spec = KdeSpec { seed, ..cfg.kde.clone().unwrap_or_default() };
                let data = gen_kde(&spec)?;
                Ok(Problem::Kde(KdeHuberObjective::new(data.points, spec.sigma_kernel, spec.mu_huber)?))
            }
            Preset::CustomSimplexQuadratic => {
                let spec = QuadraticSpec { seed, ..cfg.quadratic.clone().unwrap_or_default() };
                let data = gen_quadratic(&spec)?;
                Ok(Problem::Quadratic(LeastSquaresObjective::least_squares(data.a, data.b)?))
            }
        }
    }

    pub fn polytope(&self) -> Result<Polytope> {
        match self {
            Problem::Lasso { obj, radius } => Polytope::l1_ball(obj.dim(), *radius),
            Problem::Logistic { obj, radius } => Polytope::l1_ball(obj.dim(), *radius),
            Problem::Kde(obj) => Polytope::simplex(obj.dim()),
            Problem::Quadratic(obj) => Polytope::simplex(obj.dim()),
        }
    }

    pub fn objective(&self) -> &dyn Objective {
        match self {
            Problem::Lasso { obj, .. } => obj,
            Problem::Logistic { obj, .. } => obj,
            Problem::Kde(obj) => obj,
            Problem::Quadratic(obj) => obj,
        }
    }

    pub fn objective_mut(&mut self) -> &mut dyn Objective {
        match self {
            Problem::Lasso { obj, .. } => obj,
            Problem::Logistic { obj, .. } => obj,
            Problem::Kde(obj) => obj,
            Problem::Quadratic(obj) => obj,
        }
    }
}

/// Result of one solver on one instance.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub x: Array1<f64>,
    pub trace: Vec<TraceRecord>,
    /// Wall time of the solve call.
    pub seconds: f64,
    pub f_value: f64,
    pub nnz: usize,
}

fn needs_smoothness(spec: &SolverSpec) -> bool {
    match spec.method {
        Method::Fista => true,
        Method::Polycd | Method::Polycdwa => spec.solve.as_ref().is_some_and(|c| c.step_rule == StepRule::Gradient),
        _ => false,
    }
}

/// Runs one solver on a private copy of `problem`.
pub fn run_solver(problem: &Problem, spec: &SolverSpec) -> Result<SolverRun> {
    let mut problem = problem.clone();
    let p = problem.polytope()?;
    let solve_cfg = spec.solve.clone().unwrap_or_default();
    let base_cfg = spec.baseline.clone().unwrap_or_default();

    if spec.method == Method::Twocd {
        return run_twocd(&problem, &p, &base_cfg);
    }
    let obj = problem.objective_mut();
    let started = Instant::now();
    let (x, trace) = match spec.method {
        Method::Polycd => {
            let r = polycd_solve(obj, &p, &solve_cfg)?;
            (r.x, r.trace)
        }
        Method::Polycdwa => {
            let r = polycdwa_solve(obj, &p, &solve_cfg)?;
            (r.x, r.trace)
        }
        Method::Fw => {
            let r = fw_solve(obj, &p, &base_cfg)?;
            (r.x, r.trace)
        }
        Method::Afw => {
            let r = afw_solve(obj, &p, &base_cfg)?;
            (r.x, r.trace)
        }
        Method::Fista => {
            let r = fista_solve(obj, &p, &base_cfg)?;
            (r.x, r.trace)
        }
        Method::Twocd => unreachable!("handled above"),
    };
    let seconds = started.elapsed().as_secs_f64();
    let f_value = trace.last().map_or(f64::NAN, |r| r.f_value);
    let nnz = count_nonzeros(x.view());
    Ok(SolverRun { x, trace, seconds, f_value, nnz })
}

/// Two-coordinate descent runs on the simplex; ℓ1-ball problems are lifted
/// to the simplex of twice the dimension.
fn run_twocd(problem: &Problem, p: &Polytope, cfg: &BaselineConfig) -> Result<SolverRun> {
    let (mut lifted, radius) = match problem {
        Problem::Lasso { obj, radius } => (Problem::Quadratic(obj.lift_l1(*radius)?), Some(*radius)),
        Problem::Logistic { obj, radius } => {
            (Problem::Logistic { obj: obj.lift_l1(*radius)?, radius: 1.0 }, Some(*radius))
        }
        other => (other.clone(), None),
    };
    let simplex = match radius {
        Some(_) => Polytope::simplex(2 * p.dim())?,
        None => p.clone(),
    };
    let started = Instant::now();
    let r = twocd_solve(lifted.objective_mut(), &simplex, cfg)?;
    let seconds = started.elapsed().as_secs_f64();
    let x = match radius {
        Some(c) => unlift_l1(r.x.view(), c),
        None => r.x,
    };
    let mut trace = r.trace;
    let nnz = count_nonzeros(x.view());
    if let Some(last) = trace.last_mut() {
        last.nnz = nnz;
    }
    let f_value = trace.last().map_or(f64::NAN, |r| r.f_value);
    Ok(SolverRun { x, trace, seconds, f_value, nnz })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub label: String,
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub mean_seconds: f64,
    pub mean_gap: f64,
    pub mean_nnz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub rng: &'static str,
    pub version: &'static str,
    /// Best value per repetition, across solvers.
    pub f_star: Vec<f64>,
    pub solvers: Vec<SolverSummary>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
struct Cell {
    rep: usize,
    label: String,
    outcome: std::result::Result<SolverRun, String>,
}

/// Runs every repetition and solver, writes one trace CSV per (solver,
/// repetition), one plot CSV per repetition and `summary.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut cells: Vec<Cell> = Vec::new();
    let mut f_stars = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let mut problem = Problem::generate(cfg, cfg.seed_for(rep))?;
        if let Some(l) = cfg.smoothness {
            problem.objective_mut().set_smoothness(l);
        } else if cfg.solvers.iter().any(needs_smoothness) {
            // estimated once, outside every timed solve
            let l = problem.objective().smoothness();
            problem.objective_mut().set_smoothness(l);
        }
        let start = cells.len();
        for spec in &cfg.solvers {
            let outcome = run_solver(&problem, spec).map_err(|e| {
                warn!("solver {} failed on repetition {rep}: {e}", spec.label());
                e.to_string()
            });
            cells.push(Cell { rep, label: spec.label(), outcome });
        }
        let f_star = cells[start..]
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .flat_map(|r| r.trace.iter().map(|t| t.f_value))
            .fold(f64::INFINITY, f64::min);
        f_stars.push(f_star);

        let mut series = Vec::new();
        for cell in &cells[start..] {
            if let Ok(run) = &cell.outcome {
                let path = dir.join(format!("trace_{}_rep{rep}.csv", cell.label));
                write_file(&path, |w| write_trace_csv(w, &cell.label, rep, &run.trace, f_star))?;
                series.push((cell.label.as_str(), run.trace.as_slice()));
            }
        }
        let path = dir.join(format!("plot_rep{rep}.csv"));
        write_file(&path, |w| emit_plot_data(w, &series, f_star))?;
    }

    let mut by_label: BTreeMap<&str, Vec<&Cell>> = BTreeMap::new();
    for c in &cells {
        by_label.entry(c.label.as_str()).or_default().push(c);
    }
    let solvers = cfg
        .solvers
        .iter()
        .map(|spec| {
            let label = spec.label();
            let group = by_label.get(label.as_str()).cloned().unwrap_or_default();
            let ok: Vec<(usize, &SolverRun)> =
                group.iter().filter_map(|c| c.outcome.as_ref().ok().map(|r| (c.rep, r))).collect();
            let k = ok.len().max(1) as f64;
            SolverSummary {
                method: spec.method,
                runs: ok.len(),
                failures: group.len() - ok.len(),
                mean_seconds: ok.iter().map(|(_, r)| r.seconds).sum::<f64>() / k,
                mean_gap: ok.iter().map(|(rep, r)| compute_gap(r.f_value, f_stars[*rep])).sum::<f64>() / k,
                mean_nnz: ok.iter().map(|(_, r)| r.nnz as f64).sum::<f64>() / k,
                label,
            }
        })
        .collect();
    let summary =
        Summary { rng: RNG_ID, version: env!("CARGO_PKG_VERSION"), f_star: f_stars, solvers, config: cfg.clone() };
    let path = dir.join("summary.json");
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    Ok(summary)
}

use std::io::Write;

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Default configuration for the named solver with the given step rule.
pub fn solver_for(method: Method, rule: StepRule, max_outer: usize, tol: f64) -> SolverSpec {
    let mut spec = SolverSpec::new(method);
    if method.is_coordinate() {
        spec.solve = Some(SolveConfig { step_rule: rule, max_outer, rel_improve_tol: tol, ..Default::default() });
    } else {
        spec.baseline = Some(BaselineConfig { max_iter: max_outer, window_tol: tol, ..Default::default() });
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert_eq!(compute_gap(3.0, 3.0), 0.0);
        assert_eq!(compute_gap(2.0, 0.5), 1.5);
        assert!((compute_gap(11.0, 10.0) - 0.1).abs() < 1e-15);
    }
}
