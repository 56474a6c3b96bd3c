//! Separable composite objectives f(x) = Σ_k ℓ((A x)_k; y_k).

use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder, Zip};

use super::{power_iteration, Direction, Objective, DEFAULT_REFRESH_EVERY, POWER_ITERATIONS};
use super::{SMOOTHNESS_FLOOR, SMOOTHNESS_SAFETY};
use crate::error::{Error, Result};
use crate::polytope::Vertex;
use crate::step::{bisect_derivative, SegmentQuery};

/// Per-sample loss ℓ(z; y).
pub trait Loss: Clone + Send + Sync {
    /// Upper bound on ℓ''.
    const CURVATURE: f64;

    fn value(&self, z: f64, y: f64) -> f64;

    fn deriv(&self, z: f64, y: f64) -> f64;

    /// Exact minimizer of Σ ℓ(z_k + α δ_k; y_k) over [lo, hi] when available
    /// in closed form.
    fn line_min(&self, _z: &Array1<f64>, _y: &Array1<f64>, _delta: &Array1<f64>, _lo: f64, _hi: f64) -> Option<f64> {
        None
    }
}

/// ℓ(z; y) = (z − y)²
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredLoss;

impl Loss for SquaredLoss {
    const CURVATURE: f64 = 2.0;

    fn value(&self, z: f64, y: f64) -> f64 {
        (z - y) * (z - y)
    }

    fn deriv(&self, z: f64, y: f64) -> f64 {
        2.0 * (z - y)
    }

    fn line_min(&self, z: &Array1<f64>, y: &Array1<f64>, delta: &Array1<f64>, lo: f64, hi: f64) -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        Zip::from(z).and(y).and(delta).for_each(|&zk, &yk, &dk| {
            num += (zk - yk) * dk;
            den += dk * dk;
        });
        if den == 0.0 {
            return Some(lo);
        }
        Some((-num / den).clamp(lo, hi))
    }
}

/// ℓ(z; y) = log(1 + exp(−y z)) with y ∈ {−1, +1}
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLoss;

impl Loss for LogisticLoss {
    const CURVATURE: f64 = 0.25;

    fn value(&self, z: f64, y: f64) -> f64 {
        softplus(-y * z)
    }

    fn deriv(&self, z: f64, y: f64) -> f64 {
        // −y σ(−y z)
        -y / (1.0 + (y * z).exp())
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub type LeastSquaresObjective = Composite<SquaredLoss>;
pub type LogisticObjective = Composite<LogisticLoss>;

#[derive(Debug, Clone)]
enum Target {
    Axis { coord: usize, scale: f64 },
    Dense(Array1<f64>),
    Pair { plus: usize, minus: usize },
}

impl Target {
    fn matches(&self, dir: &Direction<'_>) -> bool {
        match (self, dir) {
            (Target::Axis { coord, scale }, Direction::Toward(Vertex::Axis { coord: c, scale: s })) => {
                coord == c && scale.to_bits() == s.to_bits()
            }
            (Target::Dense(v), Direction::Toward(Vertex::Dense(w))) => v.view() == *w,
            (Target::Pair { plus, minus }, Direction::Pair { plus: p, minus: m }) => plus == p && minus == m,
            _ => false,
        }
    }
}

/// Image `A v` (toward a vertex) or `A d` (pair direction) of the loaded target.
#[derive(Debug, Clone)]
struct Slot {
    target: Target,
    image: Array1<f64>,
}

/// f(x) = Σ_k ℓ((A x)_k; y_k) with cached z = A x.
#[derive(Debug)]
pub struct Composite<L: Loss> {
    a: Array2<f64>,
    y: Array1<f64>,
    loss: L,
    x: Array1<f64>,
    z: Array1<f64>,
    lipschitz: OnceLock<f64>,
    steps: usize,
    refresh_every: usize,
    slot: Option<Slot>,
    delta: Array1<f64>,
}

impl<L: Loss> Clone for Composite<L> {
    fn clone(&self) -> Self {
        Composite {
            a: self.a.clone(),
            y: self.y.clone(),
            loss: self.loss.clone(),
            x: self.x.clone(),
            z: self.z.clone(),
            lipschitz: self.lipschitz.clone(),
            steps: self.steps,
            refresh_every: self.refresh_every,
            slot: self.slot.clone(),
            delta: self.delta.clone(),
        }
    }
}

impl LeastSquaresObjective {
    /// f(x) = ‖A x − b‖²
    pub fn least_squares(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        Composite::new(a, b, SquaredLoss)
    }
}

impl LogisticObjective {
    /// f(x) = Σ log(1 + exp(−y_i a_iᵀ x)), labels in {−1, +1}.
    pub fn logistic(a: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidConfig("logistic labels must be -1 or +1".into()));
        }
        Composite::new(a, labels, LogisticLoss)
    }
}

impl<L: Loss> Composite<L> {
    /// Starts at x = 0.
    pub fn new(a: Array2<f64>, y: Array1<f64>, loss: L) -> Result<Self> {
        let (n, d) = a.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if d == 0 {
            return Err(Error::InvalidConfig("design matrix has no columns".into()));
        }
        // column-major so that column extraction is contiguous
        let mut a_f = Array2::zeros((n, d).f());
        a_f.assign(&a);
        Ok(Composite {
            a: a_f,
            y,
            loss,
            x: Array1::zeros(d),
            z: Array1::zeros(n),
            lipschitz: OnceLock::new(),
            steps: 0,
            refresh_every: DEFAULT_REFRESH_EVERY,
            slot: None,
            delta: Array1::zeros(n),
        })
    }

    pub fn with_refresh_every(mut self, steps: usize) -> Self {
        self.refresh_every = steps.max(1);
        self
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.y
    }

    /// Cached z = A x.
    pub fn cached_image(&self) -> ArrayView1<'_, f64> {
        self.z.view()
    }

    /// Same loss over the simplex of dimension 2d through
    /// x = radius · (u_{1:d} − u_{d+1:2d}), i.e. design radius·[A, −A].
    pub fn lift_l1(&self, radius: f64) -> Result<Self> {
        let (n, d) = self.a.dim();
        let mut lifted = Array2::zeros((n, 2 * d));
        for j in 0..d {
            let col = self.a.column(j);
            lifted.column_mut(j).assign(&(&col * radius));
            lifted.column_mut(d + j).assign(&(&col * -radius));
        }
        Composite::new(lifted, self.y.clone(), self.loss.clone())
    }

    fn load(&mut self, dir: &Direction<'_>) {
        if self.slot.as_ref().is_some_and(|s| s.target.matches(dir)) {
            return;
        }
        let (target, image) = match *dir {
            Direction::Toward(Vertex::Axis { coord, scale }) => {
                (Target::Axis { coord, scale }, &self.a.column(coord) * scale)
            }
            Direction::Toward(Vertex::Dense(v)) => (Target::Dense(v.to_owned()), self.a.dot(&v)),
            Direction::Pair { plus, minus } => {
                (Target::Pair { plus, minus }, &self.a.column(plus) - &self.a.column(minus))
            }
        };
        self.slot = Some(Slot { target, image });
    }

    /// δ = A d into the scratch buffer.
    fn fill_delta(&mut self) {
        let slot = self.slot.as_ref().expect("direction loaded");
        match slot.target {
            Target::Pair { .. } => self.delta.assign(&slot.image),
            _ => Zip::from(&mut self.delta).and(&slot.image).and(&self.z).for_each(|d, &img, &z| *d = img - z),
        }
    }

    fn derivative_with_delta(&self, alpha: f64) -> f64 {
        let mut acc = 0.0;
        Zip::from(&self.z).and(&self.y).and(&self.delta).for_each(|&z, &y, &d| {
            acc += self.loss.deriv(z + alpha * d, y) * d;
        });
        acc
    }

    fn dir_sq_len(&self, dir: &Direction<'_>) -> f64 {
        match dir {
            Direction::Toward(v) => v.dist_sq(self.x.view()),
            Direction::Pair { plus, minus } => {
                if plus == minus {
                    0.0
                } else {
                    2.0
                }
            }
        }
    }

    fn loss_sum(&self, z: ArrayView1<f64>) -> f64 {
        let mut acc = 0.0;
        Zip::from(z).and(&self.y).for_each(|&zk, &yk| acc += self.loss.value(zk, yk));
        acc
    }
}

impl<L: Loss> Objective for Composite<L> {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn point(&self) -> ArrayView1<'_, f64> {
        self.x.view()
    }

    fn value(&self) -> f64 {
        self.loss_sum(self.z.view())
    }

    fn smoothness(&self) -> f64 {
        *self.lipschitz.get_or_init(|| self.estimate_smoothness())
    }

    fn set_smoothness(&mut self, lipschitz: f64) {
        self.lipschitz = OnceLock::from(lipschitz.max(SMOOTHNESS_FLOOR));
    }

    /// ℓ-curvature · σ_max(A)² · safety.
    fn estimate_smoothness(&self) -> f64 {
        let d = self.a.ncols();
        let sigma_sq = power_iteration(d, POWER_ITERATIONS, |v| self.a.t().dot(&self.a.dot(v)));
        (L::CURVATURE * sigma_sq * SMOOTHNESS_SAFETY).max(SMOOTHNESS_FLOOR)
    }

    fn set_point(&mut self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        self.x.assign(&x);
        self.refresh();
        Ok(())
    }

    fn refresh(&mut self) {
        self.z = self.a.dot(&self.x);
    }

    fn cache_drift(&self) -> f64 {
        let fresh = self.a.dot(&self.x);
        let diff = &fresh - &self.z;
        diff.dot(&diff).sqrt() / fresh.dot(&fresh).sqrt().max(1.0)
    }

    fn segment_query(&mut self, dir: Direction<'_>) -> SegmentQuery {
        self.load(&dir);
        self.fill_delta();
        SegmentQuery { b: self.derivative_with_delta(0.0), c: self.dir_sq_len(&dir) }
    }

    fn derivative_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64 {
        self.load(&dir);
        self.fill_delta();
        self.derivative_with_delta(alpha)
    }

    fn value_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64 {
        self.load(&dir);
        self.fill_delta();
        let mut acc = 0.0;
        Zip::from(&self.z).and(&self.y).and(&self.delta).for_each(|&z, &y, &d| {
            acc += self.loss.value(z + alpha * d, y);
        });
        acc
    }

    fn line_search(&mut self, dir: Direction<'_>, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        self.load(&dir);
        self.fill_delta();
        if let Some(alpha) = self.loss.line_min(&self.z, &self.y, &self.delta, lo, hi) {
            return Ok(alpha);
        }
        Ok(bisect_derivative(|a| self.derivative_with_delta(a), lo, hi))
    }

    fn apply_step(&mut self, dir: Direction<'_>, alpha: f64) {
        if alpha == 0.0 {
            return;
        }
        self.load(&dir);
        let slot = self.slot.as_ref().expect("direction loaded");
        match dir {
            Direction::Toward(v) => {
                let keep = 1.0 - alpha;
                Zip::from(&mut self.z).and(&slot.image).for_each(|z, &img| *z = keep * *z + alpha * img);
                match v {
                    Vertex::Axis { coord, scale } => {
                        self.x.mapv_inplace(|xi| keep * xi);
                        self.x[coord] += alpha * scale;
                    }
                    Vertex::Dense(v) => {
                        Zip::from(&mut self.x).and(&v).for_each(|x, &vi| *x = keep * *x + alpha * vi);
                    }
                }
            }
            Direction::Pair { plus, minus } => {
                self.z.scaled_add(alpha, &slot.image);
                self.x[plus] += alpha;
                self.x[minus] -= alpha;
            }
        }
        self.steps += 1;
        if self.steps.is_multiple_of(self.refresh_every) {
            self.refresh();
        }
    }

    fn directional_curvature(&mut self, dir: Direction<'_>) -> Option<f64> {
        self.load(&dir);
        self.fill_delta();
        Some(L::CURVATURE * self.delta.dot(&self.delta))
    }

    fn full_gradient(&self) -> Array1<f64> {
        let xi: Array1<f64> = Zip::from(&self.z).and(&self.y).map_collect(|&z, &y| self.loss.deriv(z, y));
        self.a.t().dot(&xi)
    }

    fn value_at(&self, x: ArrayView1<f64>) -> f64 {
        self.loss_sum(self.a.dot(&x).view())
    }

    fn gradient_at(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let z = self.a.dot(&x);
        let xi: Array1<f64> = Zip::from(&z).and(&self.y).map_collect(|&z, &y| self.loss.deriv(z, y));
        self.a.t().dot(&xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn identity_ls(b: Array1<f64>) -> LeastSquaresObjective {
        let d = b.len();
        LeastSquaresObjective::least_squares(Array2::eye(d), b).unwrap()
    }

    const E1: Vertex<'static> = Vertex::Axis { coord: 0, scale: 1.0 };

    #[test]
    fn eval_examples() {
        let mut ls = identity_ls(array![0.0, 0.0]);
        ls.set_point(array![1.0, 0.0].view()).unwrap();
        assert_eq!(ls.value(), 1.0);

        let mut lg = LogisticObjective::logistic(Array2::zeros((1, 3)), array![1.0]).unwrap();
        lg.set_point(array![0.3, -2.0, 5.0].view()).unwrap();
        assert!((lg.value() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn segment_query_motivating_example() {
        let mut ls = identity_ls(array![2.0, 2.0]);
        ls.set_point(array![0.0, 1.0].view()).unwrap();
        let q = ls.segment_query(E1.into());
        assert_eq!(q, SegmentQuery { b: -2.0, c: 2.0 });
    }

    #[test]
    fn segment_query_at_target_is_zero() {
        let mut ls = identity_ls(array![0.0, 0.0]);
        ls.set_point(array![1.0, 0.0].view()).unwrap();
        let q = ls.segment_query(E1.into());
        assert_eq!(q, SegmentQuery { b: 0.0, c: 0.0 });
    }

    #[test]
    fn line_search_motivating_example() {
        let mut ls = identity_ls(array![2.0, 2.0]);
        ls.set_point(array![0.0, 1.0].view()).unwrap();
        let a = ls.line_search(E1.into(), 0.0, 1.0).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        ls.apply_step(E1.into(), a);
        assert_eq!(ls.point(), array![0.5, 0.5].view());
        assert!((ls.value() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn line_search_rejects_reversed_interval() {
        let mut ls = identity_ls(array![2.0, 2.0]);
        assert!(matches!(ls.line_search(E1.into(), 1.0, 0.0), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn line_search_returns_lo_when_not_descending() {
        let mut ls = identity_ls(array![0.0, 0.0]);
        ls.set_point(array![0.0, 0.0].view()).unwrap();
        // moving toward e1 only increases ‖x‖²
        assert_eq!(ls.line_search(E1.into(), 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_step_lands_exactly_on_vertex() {
        let a = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.25]];
        let b = array![1.0, -2.0, 0.5];
        let mut ls = LeastSquaresObjective::least_squares(a.clone(), b.clone()).unwrap();
        ls.set_point(array![0.3, 0.7].view()).unwrap();
        let v = Vertex::Axis { coord: 1, scale: 1.0 };
        ls.apply_step(v.into(), 1.0);
        assert_eq!(ls.point(), array![0.0, 1.0].view());
        assert_eq!(ls.cached_image(), a.column(1));
        ls.apply_step(v.into(), 0.0);
        assert_eq!(ls.point(), array![0.0, 1.0].view());
    }

    #[test]
    fn smoothness_of_identity_and_zero() {
        let ls = identity_ls(array![0.0, 0.0, 0.0]);
        assert!((ls.estimate_smoothness() - 2.02).abs() < 1e-12);
        let z = LeastSquaresObjective::least_squares(Array2::zeros((3, 2)), Array1::zeros(3)).unwrap();
        assert_eq!(z.estimate_smoothness(), SMOOTHNESS_FLOOR);
        let lg = LogisticObjective::logistic(Array2::eye(2), array![1.0, -1.0]).unwrap();
        assert!((lg.estimate_smoothness() - 0.25 * 1.01).abs() < 1e-12);
    }

    #[test]
    fn full_gradient_examples() {
        let mut ls = identity_ls(array![0.0, 0.0]);
        ls.set_point(array![0.3, -0.2].view()).unwrap();
        assert_eq!(ls.full_gradient(), array![0.6, -0.4]);
        let mut lg = LogisticObjective::logistic(Array2::zeros((2, 2)), array![1.0, -1.0]).unwrap();
        lg.set_point(array![0.3, -0.2].view()).unwrap();
        assert_eq!(lg.full_gradient(), array![0.0, 0.0]);
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        assert!(LogisticObjective::logistic(Array2::eye(2), array![1.0, 0.0]).is_err());
    }

    #[test]
    fn pair_direction_moves_two_coordinates() {
        let mut ls = identity_ls(array![0.0, 0.0]);
        ls.set_point(array![1.0, 0.0].view()).unwrap();
        let dir = Direction::Pair { plus: 1, minus: 0 };
        let t = ls.line_search(dir, -0.0, 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        ls.apply_step(dir, t);
        assert_eq!(ls.point(), array![0.5, 0.5].view());
    }

    #[test]
    fn lifted_l1_matches_original() {
        let a = array![[1.0, 2.0], [0.0, -1.0], [3.0, 1.0]];
        let b = array![1.0, 2.0, 3.0];
        let ls = LeastSquaresObjective::least_squares(a, b).unwrap();
        let lifted = ls.lift_l1(2.0).unwrap();
        let u = array![0.1, 0.2, 0.3, 0.4];
        let x = array![2.0 * (0.1 - 0.3), 2.0 * (0.2 - 0.4)];
        assert!((lifted.value_at(u.view()) - ls.value_at(x.view())).abs() < 1e-12);
    }
}
