//! Robust kernel density estimation with a Huber loss on RKHS distances.
//!
//! f(w) = Σ_l ψ(s_l(w)) with s_l = wᵀKw − 2(Kw)_l + K_ll and
//! ψ(s) = huber(√s). The Gaussian kernel matrix is never stored; entries
//! are evaluated on demand. Cached state is u = K w and q = wᵀ K w, which
//! makes every segment quantity O(n) once the kernel column of the target
//! vertex is known.

use std::f64::consts::PI;
use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use rayon::prelude::*;

use super::{power_iteration, Direction, Objective, DEFAULT_REFRESH_EVERY, POWER_ITERATIONS};
use super::{SMOOTHNESS_FLOOR, SMOOTHNESS_SAFETY};
use crate::error::{Error, Result};
use crate::polytope::Vertex;
use crate::step::{bisect_derivative, SegmentQuery};

/// Huber loss: t²/2 for |t| ≤ μ, μ|t| − μ²/2 beyond.
pub fn huber(t: f64, mu: f64) -> f64 {
    let a = t.abs();
    if a <= mu {
        0.5 * a * a
    } else {
        mu * a - 0.5 * mu * mu
    }
}

/// huber(√s) for s ≥ 0 (negative inputs are clamped to 0).
pub fn huber_sqrt(s: f64, mu: f64) -> f64 {
    let s = s.max(0.0);
    if s <= mu * mu {
        0.5 * s
    } else {
        mu * s.sqrt() - 0.5 * mu * mu
    }
}

/// d/ds huber(√s).
pub fn huber_sqrt_deriv(s: f64, mu: f64) -> f64 {
    let s = s.max(0.0);
    if s <= mu * mu {
        0.5
    } else {
        mu / (2.0 * s.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
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

#[derive(Debug, Clone)]
struct Slot {
    target: Target,
    /// K v (toward) or K(e_plus − e_minus) (pair)
    image: Array1<f64>,
    /// vᵀ K v (toward) or dᵀ K d (pair)
    self_dot: f64,
}

/// Coefficients of s_l(α) = s_l + 2α(wkd − kd_l) + α² dkd.
#[derive(Debug, Clone, Copy)]
struct Line {
    wkd: f64,
    dkd: f64,
}

#[derive(Debug, Clone)]
pub struct KdeHuberObjective {
    points: Array2<f64>,
    bandwidth: f64,
    huber_mu: f64,
    /// K_ll = (2πσ²)^{-d/2}
    diag: f64,
    w: Array1<f64>,
    u: Array1<f64>,
    q: f64,
    lipschitz: OnceLock<f64>,
    steps: usize,
    refresh_every: usize,
    slot: Option<Slot>,
    kd: Array1<f64>,
}

impl KdeHuberObjective {
    /// `points` has one sample per row. Starts at w = e_0.
    pub fn new(points: Array2<f64>, bandwidth: f64, huber_mu: f64) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 {
            return Err(Error::InvalidConfig("no sample points".into()));
        }
        if !(bandwidth > 0.0) || !(huber_mu > 0.0) {
            return Err(Error::InvalidConfig("bandwidth and Huber threshold must be positive".into()));
        }
        let diag = (2.0 * PI * bandwidth * bandwidth).powf(-(d as f64) / 2.0);
        let mut obj = KdeHuberObjective {
            points: points.as_standard_layout().into_owned(),
            bandwidth,
            huber_mu,
            diag,
            w: Array1::zeros(n),
            u: Array1::zeros(n),
            q: 0.0,
            lipschitz: OnceLock::new(),
            steps: 0,
            refresh_every: DEFAULT_REFRESH_EVERY,
            slot: None,
            kd: Array1::zeros(n),
        };
        obj.w[0] = 1.0;
        obj.refresh();
        Ok(obj)
    }

    pub fn with_refresh_every(mut self, steps: usize) -> Self {
        self.refresh_every = steps.max(1);
        self
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn huber_mu(&self) -> f64 {
        self.huber_mu
    }

    /// Cached (K w, wᵀ K w).
    pub fn cached_state(&self) -> (ArrayView1<'_, f64>, f64) {
        (self.u.view(), self.q)
    }

    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag;
        }
        let (a, b) = (self.points.row(i), self.points.row(j));
        let dist_sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.diag * (-dist_sq / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }

    pub fn kernel_column(&self, i: usize) -> Array1<f64> {
        (0..self.points.nrows()).map(|l| self.kernel(l, i)).collect()
    }

    /// K v, skipping zero entries of v. Rows are processed in parallel; each
    /// row sums in a fixed order so the result is deterministic.
    pub fn kernel_matvec(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let nz: Vec<(usize, f64)> = v.iter().copied().enumerate().filter(|&(_, x)| x != 0.0).collect();
        let out: Vec<f64> = (0..self.points.nrows())
            .into_par_iter()
            .map(|i| nz.iter().map(|&(j, x)| self.kernel(i, j) * x).sum())
            .collect();
        Array1::from(out)
    }

    /// Dense O(n²) evaluation without the cache, for cross-checks.
    pub fn value_direct(&self, w: ArrayView1<f64>) -> f64 {
        let n = self.points.nrows();
        let u: Array1<f64> = (0..n).map(|i| (0..n).map(|j| self.kernel(i, j) * w[j]).sum()).collect();
        let q = w.dot(&u);
        u.iter().map(|&ul| huber_sqrt(q - 2.0 * ul + self.diag, self.huber_mu)).sum()
    }

    fn value_from(&self, u: ArrayView1<f64>, q: f64) -> f64 {
        u.iter().map(|&ul| huber_sqrt(q - 2.0 * ul + self.diag, self.huber_mu)).sum()
    }

    fn gradient_from(&self, u: ArrayView1<f64>, q: f64) -> Array1<f64> {
        let psi: Array1<f64> = u.mapv(|ul| huber_sqrt_deriv(q - 2.0 * ul + self.diag, self.huber_mu));
        let total = psi.sum();
        let kpsi = self.kernel_matvec(psi.view());
        &u * (2.0 * total) - &kpsi * 2.0
    }

    fn load(&mut self, dir: &Direction<'_>) {
        if self.slot.as_ref().is_some_and(|s| s.target.matches(dir)) {
            return;
        }
        let slot = match *dir {
            Direction::Toward(Vertex::Axis { coord, scale }) => Slot {
                target: Target::Axis { coord, scale },
                image: self.kernel_column(coord) * scale,
                self_dot: scale * scale * self.diag,
            },
            Direction::Toward(Vertex::Dense(v)) => {
                let image = self.kernel_matvec(v);
                let self_dot = v.dot(&image);
                Slot { target: Target::Dense(v.to_owned()), image, self_dot }
            }
            Direction::Pair { plus, minus } => {
                let image = if plus == minus {
                    Array1::zeros(self.w.len())
                } else {
                    self.kernel_column(plus) - self.kernel_column(minus)
                };
                let self_dot = if plus == minus { 0.0 } else { 2.0 * self.diag - 2.0 * self.kernel(plus, minus) };
                Slot { target: Target::Pair { plus, minus }, image, self_dot }
            }
        };
        self.slot = Some(slot);
    }

    /// wᵀ K v for the loaded target.
    fn w_dot_image(&self, dir: &Direction<'_>) -> f64 {
        match *dir {
            Direction::Toward(v) => v.dot(self.u.view()),
            Direction::Pair { plus, minus } => self.u[plus] - self.u[minus],
        }
    }

    /// Loads the target and fills `kd` with K d.
    fn prepare(&mut self, dir: &Direction<'_>) -> Line {
        self.load(dir);
        let wkv = self.w_dot_image(dir);
        let slot = self.slot.as_ref().expect("direction loaded");
        match dir {
            Direction::Toward(_) => {
                Zip::from(&mut self.kd).and(&slot.image).and(&self.u).for_each(|kd, &kv, &u| *kd = kv - u);
                Line { wkd: wkv - self.q, dkd: slot.self_dot - 2.0 * wkv + self.q }
            }
            Direction::Pair { .. } => {
                self.kd.assign(&slot.image);
                Line { wkd: wkv, dkd: slot.self_dot }
            }
        }
    }

    fn s_at(&self, line: Line, alpha: f64, u: f64, kd: f64) -> f64 {
        self.q + 2.0 * alpha * line.wkd + alpha * alpha * line.dkd - 2.0 * (u + alpha * kd) + self.diag
    }

    fn derivative_line(&self, line: Line, alpha: f64) -> f64 {
        let mut acc = 0.0;
        Zip::from(&self.u).and(&self.kd).for_each(|&u, &kd| {
            let s = self.s_at(line, alpha, u, kd);
            let ds = 2.0 * (line.wkd + alpha * line.dkd - kd);
            acc += huber_sqrt_deriv(s, self.huber_mu) * ds;
        });
        acc
    }

    fn value_line(&self, line: Line, alpha: f64) -> f64 {
        let mut acc = 0.0;
        Zip::from(&self.u).and(&self.kd).for_each(|&u, &kd| {
            acc += huber_sqrt(self.s_at(line, alpha, u, kd), self.huber_mu);
        });
        acc
    }

    fn dir_sq_len(&self, dir: &Direction<'_>) -> f64 {
        match dir {
            Direction::Toward(v) => v.dist_sq(self.w.view()),
            Direction::Pair { plus, minus } => {
                if plus == minus {
                    0.0
                } else {
                    2.0
                }
            }
        }
    }
}

impl Objective for KdeHuberObjective {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn point(&self) -> ArrayView1<'_, f64> {
        self.w.view()
    }

    fn value(&self) -> f64 {
        self.value_from(self.u.view(), self.q)
    }

    fn smoothness(&self) -> f64 {
        *self.lipschitz.get_or_init(|| self.estimate_smoothness())
    }

    fn set_smoothness(&mut self, lipschitz: f64) {
        self.lipschitz = OnceLock::from(lipschitz.max(SMOOTHNESS_FLOOR));
    }

    /// Each term is huber(‖Φw − Φ_l‖) in feature space, whose Hessian in w
    /// is bounded by K, so the sum is n·λ_max(K)-smooth.
    fn estimate_smoothness(&self) -> f64 {
        let n = self.w.len();
        let lam = power_iteration(n, POWER_ITERATIONS, |v| self.kernel_matvec(v.view()));
        (n as f64 * lam * SMOOTHNESS_SAFETY).max(SMOOTHNESS_FLOOR)
    }

    fn set_point(&mut self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        self.w.assign(&x);
        self.refresh();
        Ok(())
    }

    fn refresh(&mut self) {
        self.u = self.kernel_matvec(self.w.view());
        self.q = self.w.dot(&self.u);
    }

    fn cache_drift(&self) -> f64 {
        let u = self.kernel_matvec(self.w.view());
        let q = self.w.dot(&u);
        let du = &u - &self.u;
        let scale = u.dot(&u).sqrt().max(q.abs()).max(1.0);
        (du.dot(&du).sqrt() + (q - self.q).abs()) / scale
    }

    fn segment_query(&mut self, dir: Direction<'_>) -> SegmentQuery {
        let line = self.prepare(&dir);
        SegmentQuery { b: self.derivative_line(line, 0.0), c: self.dir_sq_len(&dir) }
    }

    fn derivative_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64 {
        let line = self.prepare(&dir);
        self.derivative_line(line, alpha)
    }

    fn value_along(&mut self, dir: Direction<'_>, alpha: f64) -> f64 {
        let line = self.prepare(&dir);
        self.value_line(line, alpha)
    }

    fn line_search(&mut self, dir: Direction<'_>, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        let line = self.prepare(&dir);
        Ok(bisect_derivative(|a| self.derivative_line(line, a), lo, hi))
    }

    fn apply_step(&mut self, dir: Direction<'_>, alpha: f64) {
        if alpha == 0.0 {
            return;
        }
        self.load(&dir);
        let wkv = self.w_dot_image(&dir);
        let slot = self.slot.as_ref().expect("direction loaded");
        match dir {
            Direction::Toward(v) => {
                let keep = 1.0 - alpha;
                self.q = keep * keep * self.q + 2.0 * alpha * keep * wkv + alpha * alpha * slot.self_dot;
                Zip::from(&mut self.u).and(&slot.image).for_each(|u, &kv| *u = keep * *u + alpha * kv);
                match v {
                    Vertex::Axis { coord, scale } => {
                        self.w.mapv_inplace(|wi| keep * wi);
                        self.w[coord] += alpha * scale;
                    }
                    Vertex::Dense(v) => {
                        Zip::from(&mut self.w).and(&v).for_each(|w, &vi| *w = keep * *w + alpha * vi);
                    }
                }
            }
            Direction::Pair { plus, minus } => {
                self.q += 2.0 * alpha * wkv + alpha * alpha * slot.self_dot;
                self.u.scaled_add(alpha, &slot.image);
                self.w[plus] += alpha;
                self.w[minus] -= alpha;
            }
        }
        self.steps += 1;
        if self.steps.is_multiple_of(self.refresh_every) {
            self.refresh();
        }
    }

    fn full_gradient(&self) -> Array1<f64> {
        self.gradient_from(self.u.view(), self.q)
    }

    fn value_at(&self, x: ArrayView1<f64>) -> f64 {
        let u = self.kernel_matvec(x);
        let q = x.dot(&u);
        self.value_from(u.view(), q)
    }

    fn gradient_at(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let u = self.kernel_matvec(x);
        let q = x.dot(&u);
        self.gradient_from(u.view(), q)
    }
}
