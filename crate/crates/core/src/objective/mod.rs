//! Smooth convex objectives bound to a current iterate.
//!
//! Every objective keeps auxiliary state (for composites `z = A x`, for the
//! kernel objective `u = K w` and `q = wᵀ K w`) so that everything a
//! coordinate-style solver needs along a segment costs O(n + d): the
//! directional derivative, the exact line search and the step itself. The
//! image of the current target (`A v`, `K v`) is cached per direction and does
//! not depend on the iterate, so repeated queries toward the same vertex are
//! free of matrix work.
//!
//! Incremental updates drift; state is recomputed from scratch every
//! [`DEFAULT_REFRESH_EVERY`] steps.

mod composite;
mod kde;

pub use composite::{Composite, LeastSquaresObjective, LogisticLoss, LogisticObjective, Loss, SquaredLoss};
pub use kde::{huber, huber_sqrt, huber_sqrt_deriv, KdeHuberObjective};

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::polytope::Vertex;
use crate::step::SegmentQuery;

pub const DEFAULT_REFRESH_EVERY: usize = 1000;

/// Safety factor applied on top of power-iteration estimates.
pub const SMOOTHNESS_SAFETY: f64 = 1.01;

/// Floor returned for degenerate (zero) operators.
pub const SMOOTHNESS_FLOOR: f64 = 1e-12;

pub(crate) const POWER_ITERATIONS: usize = 100;

/// Direction of a one-dimensional move `x + α d`.
#[derive(Debug, Clone, Copy)]
pub enum Direction<'a> {
    /// `d = v − x`
    Toward(Vertex<'a>),
    /// `d = e_plus − e_minus`
    Pair { plus: usize, minus: usize },
}

impl<'a> From<Vertex<'a>> for Direction<'a> {
    fn from(v: Vertex<'a>) -> Self {
        Direction::Toward(v)
    }
}

pub trait Objective: Send {
    fn dim(&self) -> usize;

    /// Current iterate.
    fn point(&self) -> ArrayView1<'_, f64>;

    /// f at the current iterate, from cached state.
    fn value(&self) -> f64;

    /// Smoothness constant used by the gradient rule and by FISTA. Estimated
    /// on first use unless set explicitly.
    fn smoothness(&self) -> f64;

    fn set_smoothness(&mut self, lipschitz: f64);

    /// Certified-by-construction upper bound on the gradient Lipschitz
    /// constant (power iteration with a safety factor).
    fn estimate_smoothness(&self) -> f64;

    /// Moves to `x` and rebuilds cached state.
    fn set_point(&mut self, x: ArrayView1<f64>) -> Result<()>;

    /// Rebuilds cached state from the current iterate.
    fn refresh(&mut self);

    /// Relative discrepancy between incremental and freshly computed state.
    fn cache_drift(&self) -> f64;

    fn segment_query(&mut self, dir: Direction<'_>) -> SegmentQuery;

    /// d/dα f(x + α d).
    fn derivative_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64;

    /// f(x + α d) from cached state.
    fn value_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64;

    /// Smallest minimizer of f(x + α d) over α ∈ [lo, hi].
    fn line_search(&mut self, dir: Direction<'_>, lo: f64, hi: f64) -> Result<f64>;

    /// x ← x + α d, updating cached state incrementally.
    fn apply_step(&mut self, dir: Direction<'_>, alpha: f64);

    /// Curvature of f along d measured through the loss (for composites,
    /// loss curvature times ‖A d‖²). `None` when not available.
    fn directional_curvature(&mut self, _dir: Direction<'_>) -> Option<f64> {
        None
    }

    /// ∇f at the current iterate. O(nd); not used by the coordinate solvers.
    fn full_gradient(&self) -> Array1<f64>;

    /// f at an arbitrary point, without touching cached state.
    fn value_at(&self, x: ArrayView1<f64>) -> f64;

    fn gradient_at(&self, x: ArrayView1<f64>) -> Array1<f64>;
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration from a
/// fixed pseudo-random start.
pub(crate) fn power_iteration(
    dim: usize,
    iterations: usize,
    mut apply: impl FnMut(&Array1<f64>) -> Array1<f64>,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0f1a_7e00);
    let mut v: Array1<f64> = (0..dim).map(|_| rng.gen_range(0.5..1.5)).collect();
    let n = v.dot(&v).sqrt();
    v /= n;
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = apply(&v);
        let rayleigh = v.dot(&w);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (rayleigh - estimate).abs() <= 1e-13 * rayleigh.abs();
        estimate = rayleigh;
        v = w / norm;
        if converged {
            break;
        }
    }
    estimate
}
