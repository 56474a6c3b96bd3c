//! Reference solvers: Frank-Wolfe, away-step Frank-Wolfe, FISTA and random
//! two-coordinate descent on the simplex.

mod afw;
mod fista;
mod fw;
mod twocd;

pub use afw::afw_solve;
pub use fista::fista_solve;
pub use fw::fw_solve;
pub use twocd::{twocd_solve, unlift_l1};

use std::time::{Duration, Instant};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::away::AwayState;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::polycd::{check_weights, count_nonzeros, Start, StopReason, TraceRecord};
use crate::polytope::Polytope;

/// Optimality certificate at which the Frank-Wolfe methods stop.
pub const FW_GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub max_iter: usize,
    /// Stagnation window in iterations.
    pub window: usize,
    /// Stop when (f_{k−window} − f_k) / max(|f_{k−window}|, 1) < window_tol.
    pub window_tol: f64,
    /// Seed for the random pair draws of two-coordinate descent.
    pub rng_seed: u64,
    pub start: Start,
    pub time_limit: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            max_iter: 1000,
            window: 50,
            window_tol: 1e-8,
            rng_seed: 0,
            start: Start::FirstVertex,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub x: Array1<f64>,
    /// Entry 0 is the starting point.
    pub trace: Vec<TraceRecord>,
    pub stop: StopReason,
    /// Convex weights, for methods that keep them.
    pub weights: Option<AwayState>,
}

impl BaselineResult {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.f_value)
    }
}

/// Start weights over the vertex list (`None` for `Start::Current`).
pub(crate) fn start_weights(p: &Polytope, start: &Start) -> Result<Option<AwayState>> {
    let m = p.num_vertices();
    Ok(match start {
        Start::FirstVertex => Some(AwayState::vertex(m, 0)),
        Start::Vertex(j) => {
            p.vertex_ref(*j)?;
            Some(AwayState::vertex(m, *j))
        }
        Start::Weights(l) => {
            check_weights(l, m)?;
            Some(AwayState { lambda: l.clone() })
        }
        Start::Current => None,
    })
}

pub(crate) fn initialize(obj: &mut dyn Objective, p: &Polytope, cfg: &BaselineConfig) -> Result<Option<AwayState>> {
    if obj.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: obj.dim() });
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    let weights = start_weights(p, &cfg.start)?;
    match &weights {
        Some(w) => obj.set_point(p.combine(&w.lambda)?.view())?,
        None => {
            if !p.contains(obj.point(), 1e-9) {
                return Err(Error::Infeasible("current point is outside the polytope".into()));
            }
        }
    }
    Ok(weights)
}

/// Iteration log with the stagnation window and time budget.
pub(crate) struct Log {
    started: Instant,
    budget: Option<Duration>,
    window: usize,
    tol: f64,
    pub trace: Vec<TraceRecord>,
}

impl Log {
    pub fn new(cfg: &BaselineConfig, f0: f64, nnz: usize) -> Self {
        let mut log = Log {
            started: Instant::now(),
            budget: cfg.time_limit.map(Duration::from_secs_f64),
            window: cfg.window.max(1),
            tol: cfg.window_tol,
            trace: Vec::new(),
        };
        log.push(0, f0, nnz, 0);
        log
    }

    pub fn push(&mut self, t: usize, f_value: f64, nnz: usize, steps: usize) {
        self.trace.push(TraceRecord {
            t,
            f_value,
            elapsed: self.started.elapsed().as_secs_f64(),
            inner_steps_taken: steps,
            nnz,
        });
    }

    pub fn record(&mut self, t: usize, obj: &dyn Objective) {
        self.push(t, obj.value(), count_nonzeros(obj.point()), t);
    }

    pub fn stalled(&self) -> bool {
        let k = self.trace.len();
        if k <= self.window {
            return false;
        }
        let old = self.trace[k - 1 - self.window].f_value;
        let cur = self.trace[k - 1].f_value;
        (old - cur) / old.abs().max(1.0) < self.tol
    }

    pub fn out_of_time(&self) -> bool {
        self.budget.is_some_and(|b| self.started.elapsed() >= b)
    }
}
