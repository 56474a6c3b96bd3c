//! Cyclic coordinate descent over the vertices of a polytope.
//!
//! Each inner step moves the iterate along the segment toward one vertex,
//! `x ← x + α (v^i − x)` with `α ∈ [0, 1]`, chosen by exact line search or by
//! the one-dimensional gradient rule. One outer iteration visits every vertex
//! once in the configured order.

use std::time::{Duration, Instant};

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Direction, Objective};
use crate::polytope::Polytope;
use crate::step::{grad_step_alpha, CurvatureMode, SegmentQuery, StepRule};

/// Entries with magnitude above this count as nonzero.
pub const NNZ_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VisitOrder {
    #[default]
    Cyclic,
    /// Zero-based vertex indices, each exactly once.
    Permutation(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// x = v^0
    #[default]
    FirstVertex,
    Vertex(usize),
    /// Convex weights over the vertex list.
    Weights(Vec<f64>),
    /// Keep the objective's current point (must lie in the polytope). Not
    /// available to the away variant, which needs a decomposition.
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub step_rule: StepRule,
    pub max_outer: usize,
    /// Stop when (f(x^t) − f(x^{t+1})) / max(|f(x^t)|, 1) falls below this.
    pub rel_improve_tol: f64,
    pub visit_order: VisitOrder,
    pub curvature: CurvatureMode,
    pub start: Start,
    /// Also log every inner step.
    pub record_inner: bool,
    /// Away variant only: skip vertices with zero weight and no descent.
    pub skip_inactive: bool,
    /// Away variant only: inner steps between weight clean-ups.
    pub weight_refresh_every: usize,
    /// Wall-clock budget in seconds, checked at outer boundaries.
    pub time_limit: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            step_rule: StepRule::LineSearch,
            max_outer: 100,
            rel_improve_tol: 1e-8,
            visit_order: VisitOrder::Cyclic,
            curvature: CurvatureMode::Global,
            start: Start::FirstVertex,
            record_inner: false,
            skip_inactive: false,
            weight_refresh_every: 1000,
            time_limit: None,
        }
    }
}

impl SolveConfig {
    pub fn with_rule(step_rule: StepRule) -> Self {
        SolveConfig { step_rule, ..Default::default() }
    }
}

/// State at an outer-iteration boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub f_value: f64,
    /// Seconds since the solve started.
    pub elapsed: f64,
    /// Cumulative inner steps.
    pub inner_steps_taken: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerRecord {
    pub t: usize,
    pub vertex: usize,
    pub alpha: f64,
    pub f_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxOuter,
    Stalled,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Array1<f64>,
    /// Entry 0 is the starting point.
    pub trace: Vec<TraceRecord>,
    pub inner: Vec<InnerRecord>,
    pub stop: StopReason,
}

impl SolveResult {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.f_value)
    }
}

pub fn count_nonzeros(x: ArrayView1<f64>) -> usize {
    x.iter().filter(|v| v.abs() > NNZ_THRESHOLD).count()
}

/// Validated cycle order.
pub(crate) fn visit_sequence(order: &VisitOrder, m: usize) -> Result<Vec<usize>> {
    match order {
        VisitOrder::Cyclic => Ok((0..m).collect()),
        VisitOrder::Permutation(perm) => {
            let mut seen = vec![false; m];
            if perm.len() != m {
                return Err(Error::InvalidConfig(format!(
                    "visit order has {} entries, polytope has {m} vertices",
                    perm.len()
                )));
            }
            for &i in perm {
                if i >= m || seen[i] {
                    return Err(Error::InvalidConfig(format!("visit order is not a permutation (entry {i})")));
                }
                seen[i] = true;
            }
            Ok(perm.clone())
        }
    }
}

pub(crate) fn check_dims(obj: &dyn Objective, p: &Polytope) -> Result<()> {
    if obj.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: obj.dim() });
    }
    Ok(())
}

pub(crate) fn check_weights(lambda: &[f64], m: usize) -> Result<()> {
    if lambda.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: lambda.len() });
    }
    let sum: f64 = lambda.iter().sum();
    if lambda.iter().any(|&l| !(l >= -1e-12)) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::Infeasible("start weights are not in the unit simplex".into()));
    }
    Ok(())
}

/// Step size on `[lo, hi]` for the configured rule.
pub(crate) fn choose_alpha(
    obj: &mut dyn Objective,
    dir: Direction<'_>,
    cfg: &SolveConfig,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    match cfg.step_rule {
        StepRule::LineSearch => obj.line_search(dir, lo, hi),
        StepRule::Gradient => {
            let q = obj.segment_query(dir);
            Ok(gradient_alpha(obj, dir, q, cfg.curvature, lo, hi))
        }
    }
}

pub(crate) fn gradient_alpha(
    obj: &mut dyn Objective,
    dir: Direction<'_>,
    q: SegmentQuery,
    curvature: CurvatureMode,
    lo: f64,
    hi: f64,
) -> f64 {
    if curvature == CurvatureMode::Directional {
        if let Some(curv) = obj.directional_curvature(dir) {
            return grad_step_alpha(SegmentQuery { b: q.b, c: curv }, 1.0, lo, hi);
        }
    }
    grad_step_alpha(q, obj.smoothness(), lo, hi)
}

/// Outer-loop bookkeeping shared by both variants.
pub(crate) struct Tracker {
    started: Instant,
    budget: Option<Duration>,
    tol: f64,
    pub trace: Vec<TraceRecord>,
    pub inner: Vec<InnerRecord>,
    pub steps: usize,
}

impl Tracker {
    pub fn new(cfg: &SolveConfig, obj: &dyn Objective) -> Self {
        let started = Instant::now();
        let mut tracker = Tracker {
            started,
            budget: cfg.time_limit.map(Duration::from_secs_f64),
            tol: cfg.rel_improve_tol,
            trace: Vec::with_capacity(cfg.max_outer + 1),
            inner: Vec::new(),
            steps: 0,
        };
        tracker.record(0, obj);
        tracker
    }

    pub fn record(&mut self, t: usize, obj: &dyn Objective) {
        self.trace.push(TraceRecord {
            t,
            f_value: obj.value(),
            elapsed: self.started.elapsed().as_secs_f64(),
            inner_steps_taken: self.steps,
            nnz: count_nonzeros(obj.point()),
        });
    }

    /// Records outer iteration `t` and decides whether to stop.
    pub fn close_outer(&mut self, t: usize, obj: &dyn Objective) -> Option<StopReason> {
        let prev = self.trace.last().map(|r| r.f_value).unwrap_or(f64::INFINITY);
        self.record(t, obj);
        let cur = obj.value();
        if (prev - cur) / prev.abs().max(1.0) < self.tol {
            return Some(StopReason::Stalled);
        }
        if self.budget.is_some_and(|b| self.started.elapsed() >= b) {
            return Some(StopReason::TimeLimit);
        }
        None
    }
}

/// Runs cyclic vertex descent with steps in `[0, 1]`.
pub fn polycd_solve(obj: &mut dyn Objective, p: &Polytope, cfg: &SolveConfig) -> Result<SolveResult> {
    check_dims(obj, p)?;
    if cfg.max_outer == 0 {
        return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
    }
    let m = p.num_vertices();
    let order = visit_sequence(&cfg.visit_order, m)?;
    match &cfg.start {
        Start::FirstVertex => obj.set_point(p.vertex(0)?.view())?,
        Start::Vertex(j) => obj.set_point(p.vertex(*j)?.view())?,
        Start::Weights(lambda) => {
            check_weights(lambda, m)?;
            obj.set_point(p.combine(lambda)?.view())?
        }
        Start::Current => {
            if !p.contains(obj.point(), 1e-9) {
                return Err(Error::Infeasible("current point is outside the polytope".into()));
            }
        }
    }

    let mut tracker = Tracker::new(cfg, obj);
    let mut stop = StopReason::MaxOuter;
    for t in 1..=cfg.max_outer {
        for &i in &order {
            let v = p.vertex_unchecked(i);
            let alpha = choose_alpha(obj, v.into(), cfg, 0.0, 1.0)?;
            obj.apply_step(v.into(), alpha);
            tracker.steps += 1;
            if cfg.record_inner {
                tracker.inner.push(InnerRecord { t, vertex: i, alpha, f_value: obj.value() });
            }
        }
        if let Some(reason) = tracker.close_outer(t, obj) {
            stop = reason;
            break;
        }
    }
    Ok(SolveResult { x: obj.point().to_owned(), trace: tracker.trace, inner: tracker.inner, stop })
}

/// Per-iteration comparison of an observed gap against a rate bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Outer indices that were checked.
    pub t: Vec<usize>,
    pub bounds: Vec<f64>,
    /// bound − gap; negative means violated.
    pub margins: Vec<f64>,
    pub first_violation: Option<usize>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn violations(&self) -> usize {
        self.margins.iter().filter(|&&m| m < 0.0).count()
    }
}

/// Absolute slack granted to every bound comparison for rounding in f.
pub(crate) fn bound_slack(f_star: f64) -> f64 {
    1e-12 * f_star.abs().max(1.0)
}

pub(crate) fn build_report(items: impl Iterator<Item = (usize, f64, f64)>, f_star: f64) -> BoundReport {
    let slack = bound_slack(f_star);
    let mut rep = BoundReport { t: vec![], bounds: vec![], margins: vec![], first_violation: None };
    for (t, gap, bound) in items {
        let mut margin = bound - gap;
        if margin < 0.0 && margin >= -slack {
            margin = 0.0;
        }
        if margin < 0.0 && rep.first_violation.is_none() {
            rep.first_violation = Some(t);
        }
        rep.t.push(t);
        rep.bounds.push(bound);
        rep.margins.push(margin);
    }
    rep
}

/// Checks f(x^t) − f* ≤ max{f(x^1) − f*, K·M·L·D²} / t for t ≥ 1, with
/// K = 4 for line search and 16 for the gradient rule.
pub fn check_sublinear_bound(
    trace: &[TraceRecord],
    f_star: f64,
    m: usize,
    lipschitz: f64,
    diameter: f64,
    rule: StepRule,
) -> BoundReport {
    let k = match rule {
        StepRule::LineSearch => 4.0,
        StepRule::Gradient => 16.0,
    };
    let Some(first) = trace.iter().find(|r| r.t == 1) else {
        return build_report(std::iter::empty(), f_star);
    };
    let head = (first.f_value - f_star).max(k * m as f64 * lipschitz * diameter * diameter);
    build_report(trace.iter().filter(|r| r.t >= 1).map(|r| (r.t, r.f_value - f_star, head / r.t as f64)), f_star)
}
