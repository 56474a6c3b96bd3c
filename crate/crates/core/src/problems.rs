//! Synthetic data for the three experiment families.
//!
//! Every generator is a pure function of its spec: the same spec (seed
//! included) yields identical bytes on every platform.

use std::io::Write;

use ndarray::{Array1, Array2};
use rand::distributions::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the random generator, recorded in experiment metadata.
pub const RNG_ID: &str = "ChaCha20Rng (rand_chacha 0.3), seed_from_u64";

pub(crate) fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoSpec {
    pub n: usize,
    pub d: usize,
    /// Support size of the true coefficient vector.
    pub r: usize,
    pub snr: f64,
    /// Common correlation between features.
    pub rho: f64,
    pub seed: u64,
}

impl Default for LassoSpec {
    fn default() -> Self {
        LassoSpec { n: 200, d: 200, r: 20, snr: 1.0, rho: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticSpec {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Signal scale inside the sigmoid.
    pub s: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Default for LogisticSpec {
    fn default() -> Self {
        LogisticSpec { n: 200, d: 200, r: 20, s: 1.0, rho: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdeSpec {
    pub n: usize,
    pub d: usize,
    /// Mixture components.
    pub m: usize,
    /// One outlier per this many samples (rounded down).
    pub outlier_divisor: usize,
    pub sigma_kernel: f64,
    pub mu_huber: f64,
    pub seed: u64,
}

impl Default for KdeSpec {
    fn default() -> Self {
        KdeSpec { n: 2000, d: 2, m: 10, outlier_divisor: 100, sigma_kernel: 1.0, mu_huber: 0.4, seed: 0 }
    }
}

/// Random least squares over the simplex, f(x) = ‖A x − b‖².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticSpec {
    /// Simplex dimension.
    pub dim: usize,
    /// Rows of A; at least `dim` gives a strongly convex objective almost surely.
    pub rows: usize,
    pub seed: u64,
}

impl Default for QuadraticSpec {
    fn default() -> Self {
        QuadraticSpec { dim: 5, rows: 5, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct LassoData {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
    pub x_star: Array1<f64>,
    /// ℓ1 radius, equal to ‖x*‖₁.
    pub radius: f64,
    pub noise_sd: f64,
}

#[derive(Debug, Clone)]
pub struct LogisticData {
    pub a: Array2<f64>,
    pub labels: Array1<f64>,
    pub x_star: Array1<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct KdeData {
    /// One sample per row; inliers first, then outliers.
    pub points: Array2<f64>,
    pub n_inliers: usize,
    pub mixture_weights: Array1<f64>,
    /// Component means, one per row.
    pub means: Array2<f64>,
    /// Component variances (covariance is variance · I).
    pub variances: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct QuadraticData {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
}

fn check_design(n: usize, d: usize, r: usize, rho: f64) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidConfig("n and d must be positive".into()));
    }
    if r == 0 || r > d {
        return Err(Error::InvalidConfig(format!("support size r={r} must be in 1..={d}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidConfig(format!("correlation {rho} must be in [0, 1)")));
    }
    Ok(())
}

/// Rows i.i.d. N(0, (1−ρ)I + ρ𝟙𝟙ᵀ) and a binary x* with `r` ones.
fn design(rng: &mut ChaCha20Rng, n: usize, d: usize, r: usize, rho: f64) -> (Array2<f64>, Array1<f64>) {
    let (own, shared) = ((1.0 - rho).sqrt(), rho.sqrt());
    let mut a = Array2::zeros((n, d));
    for mut row in a.rows_mut() {
        let g = normal(rng);
        for v in row.iter_mut() {
            *v = own * normal(rng) + shared * g;
        }
    }
    let mut x_star = Array1::zeros(d);
    for j in sample(rng, d, r) {
        x_star[j] = 1.0;
    }
    (a, x_star)
}

/// Correlated Gaussian design with b = A x* + ε, noise scaled so that
/// ‖Ax*‖²/(nσ²) equals `snr` for the realized data.
pub fn gen_lasso(spec: &LassoSpec) -> Result<LassoData> {
    check_design(spec.n, spec.d, spec.r, spec.rho)?;
    if !(spec.snr > 0.0) {
        return Err(Error::InvalidConfig("snr must be positive".into()));
    }
    let mut rng = rng(spec.seed);
    let (a, x_star) = design(&mut rng, spec.n, spec.d, spec.r, spec.rho);
    let signal = a.dot(&x_star);
    let noise_sd = (signal.dot(&signal) / (spec.n as f64 * spec.snr)).sqrt();
    let b = signal.mapv(|s| s + noise_sd * normal(&mut rng));
    Ok(LassoData { a, b, x_star, radius: spec.r as f64, noise_sd })
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Same design as [`gen_lasso`]; labels ±1 with P(+1) = sigmoid(s·aᵀx*).
pub fn gen_logistic(spec: &LogisticSpec) -> Result<LogisticData> {
    check_design(spec.n, spec.d, spec.r, spec.rho)?;
    let mut rng = rng(spec.seed);
    let (a, x_star) = design(&mut rng, spec.n, spec.d, spec.r, spec.rho);
    let margins = a.dot(&x_star);
    let labels = margins.mapv(|m| if rng.gen::<f64>() < sigmoid(spec.s * m) { 1.0 } else { -1.0 });
    Ok(LogisticData { a, labels, x_star, radius: spec.r as f64 })
}

/// Uniform point of the probability simplex (normalized exponentials).
pub fn uniform_simplex(rng: &mut ChaCha20Rng, m: usize) -> Array1<f64> {
    let e: Array1<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let s = e.sum();
    e / s
}

/// Gaussian-mixture inliers plus wide Gaussian outliers.
pub fn gen_kde(spec: &KdeSpec) -> Result<KdeData> {
    if spec.n == 0 || spec.d == 0 || spec.m == 0 || spec.outlier_divisor == 0 {
        return Err(Error::InvalidConfig("n, d, m and outlier_divisor must be positive".into()));
    }
    let mut rng = rng(spec.seed);
    let (n, d, m) = (spec.n, spec.d, spec.m);
    let weights = uniform_simplex(&mut rng, m);
    let means = Array2::from_shape_fn((m, d), |_| 4.0 * normal(&mut rng));
    let variances: Array1<f64> = (0..m).map(|_| rng.gen_range(0.2..1.2)).collect();

    let n_out = n / spec.outlier_divisor;
    let n_in = n - n_out;
    let mut cumulative = weights.to_vec();
    for j in 1..m {
        cumulative[j] += cumulative[j - 1];
    }
    let mut points = Array2::zeros((n, d));
    for i in 0..n_in {
        let u: f64 = rng.gen::<f64>() * cumulative[m - 1];
        let c = cumulative.iter().position(|&c| u < c).unwrap_or(m - 1);
        let sd = variances[c].sqrt();
        for k in 0..d {
            points[[i, k]] = means[[c, k]] + sd * normal(&mut rng);
        }
    }
    for i in n_in..n {
        for k in 0..d {
            points[[i, k]] = 50.0 * normal(&mut rng);
        }
    }
    Ok(KdeData { points, n_inliers: n_in, mixture_weights: weights, means, variances })
}

/// Gaussian A and b.
pub fn gen_quadratic(spec: &QuadraticSpec) -> Result<QuadraticData> {
    if spec.dim == 0 || spec.rows == 0 {
        return Err(Error::InvalidConfig("dim and rows must be positive".into()));
    }
    let mut rng = rng(spec.seed);
    let a = Array2::from_shape_fn((spec.rows, spec.dim), |_| normal(&mut rng));
    let b = Array1::from_shape_fn(spec.rows, |_| normal(&mut rng));
    Ok(QuadraticData { a, b })
}

/// Writes one tab-separated line per row of `a`, optionally followed by the
/// matching entry of `last`, at 17 significant digits.
pub fn write_tsv(out: &mut impl Write, a: &Array2<f64>, last: Option<&Array1<f64>>) -> std::io::Result<()> {
    for (i, row) in a.rows().into_iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(col) = last {
            fields.push(format!("{:.16e}", col[i]));
        }
        writeln!(out, "{}", fields.join("\t"))?;
    }
    Ok(())
}
