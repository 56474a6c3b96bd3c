//! Executable forms of the algebraic lemmas behind the convergence proofs,
//! plus small numerical oracles.

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;

/// a − b = (η/2)(p − q) with p, q in the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub p: Array1<f64>,
    pub q: Array1<f64>,
    pub eta: f64,
}

fn on_simplex(v: ArrayView1<f64>, tol: f64) -> bool {
    v.iter().all(|&x| x >= -tol) && (v.sum() - 1.0).abs() <= tol
}

/// Splits the difference of two simplex points into positive and negative
/// parts: p = 2(a−b)⁺/‖a−b‖₁, q = 2(a−b)⁻/‖a−b‖₁, η = ‖a−b‖₁.
pub fn simplex_decompose(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<Decomposition> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if !on_simplex(a, 1e-12) || !on_simplex(b, 1e-12) {
        return Err(Error::Infeasible("inputs must lie in the unit simplex".into()));
    }
    let diff = &a - &b;
    let eta: f64 = diff.iter().map(|v| v.abs()).sum();
    if eta == 0.0 {
        return Ok(Decomposition { p: a.to_owned(), q: a.to_owned(), eta: 0.0 });
    }
    let p = diff.mapv(|v| 2.0 * v.max(0.0) / eta);
    let q = diff.mapv(|v| 2.0 * (-v).max(0.0) / eta);
    Ok(Decomposition { p, q, eta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SequenceLemma {
    Holds,
    /// Positivity or a_k − a_{k+1} ≥ λ a_{k+1}² fails at 1-based index `k`.
    PremiseFailed {
        k: usize,
    },
    /// a_k ≤ max{a_1, 2/λ}/k fails at 1-based index `k`.
    ConclusionFailed {
        k: usize,
    },
}

/// For a positive sequence with a_k − a_{k+1} ≥ λ a_{k+1}², checks
/// a_k ≤ max{a_1, 2/λ}/k. The premise is verified first, up to a relative
/// rounding slack of 1e-12.
pub fn check_sequence_lemma(a: &[f64], lambda: f64) -> SequenceLemma {
    for (k, w) in a.windows(2).enumerate() {
        let (cur, next) = (w[0], w[1]);
        let slack = 1e-12 * cur.abs();
        if !(cur > 0.0 && next > 0.0) || cur - next < lambda * next * next - slack {
            return SequenceLemma::PremiseFailed { k: k + 1 };
        }
    }
    if a.first().is_some_and(|&a1| !(a1 > 0.0)) {
        return SequenceLemma::PremiseFailed { k: 1 };
    }
    let Some(&a1) = a.first() else {
        return SequenceLemma::Holds;
    };
    let head = a1.max(2.0 / lambda);
    for (k, &ak) in a.iter().enumerate() {
        let k1 = (k + 1) as f64;
        if ak > head / k1 * (1.0 + 1e-12) {
            return SequenceLemma::ConclusionFailed { k: k + 1 };
        }
    }
    SequenceLemma::Holds
}

fn inner(g: &Array1<f64>, x: &Array1<f64>, z: &Array1<f64>) -> f64 {
    g.iter().zip(x).zip(z).map(|((g, x), z)| g * (x - z)).sum()
}

/// Discrepancies (first, second) of the two telescoping identities relating
/// ⟨∇f(x_j), x_j − z⟩ to earlier points of a sequence, for one pair i < j.
/// The second identity needs i ≥ 1.
pub fn reduction_identity_errors(
    grads: &[Array1<f64>],
    xs: &[Array1<f64>],
    z: &Array1<f64>,
    i: usize,
    j: usize,
) -> Result<(f64, Option<f64>)> {
    if grads.len() != xs.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: grads.len() });
    }
    if !(i < j && j < xs.len()) {
        return Err(Error::InvalidConfig(format!("need i < j < {}, got i={i}, j={j}", xs.len())));
    }
    let lhs1 = inner(&grads[j], &xs[j], z) - inner(&grads[i], &xs[i], z);
    let mut rhs1 = 0.0;
    for k in i + 1..=j {
        rhs1 += inner(&grads[k], &xs[k], &xs[k - 1]) + inner(&(&grads[k] - &grads[k - 1]), &xs[k - 1], z);
    }
    let second = if i >= 1 {
        let lhs2 = inner(&grads[j], &xs[j], z) - inner(&grads[i - 1], &xs[i], z);
        let mut rhs2 = 0.0;
        for k in i + 1..=j {
            rhs2 += inner(&grads[k - 1], &xs[k], &xs[k - 1]);
        }
        for k in i..=j {
            rhs2 += inner(&(&grads[k] - &grads[k - 1]), &xs[k], z);
        }
        Some((lhs2 - rhs2).abs())
    } else {
        None
    };
    Ok(((lhs1 - rhs1).abs(), second))
}

/// Largest discrepancy of either identity over every pair i < j.
pub fn check_reduction_identity(grads: &[Array1<f64>], xs: &[Array1<f64>], z: &Array1<f64>) -> Result<f64> {
    let mut worst = 0.0_f64;
    for j in 1..xs.len() {
        for i in 0..j {
            let (e1, e2) = reduction_identity_errors(grads, xs, z, i, j)?;
            worst = worst.max(e1).max(e2.unwrap_or(0.0));
        }
    }
    Ok(worst)
}

/// Central differences of `obj` at `x` with step `h`.
pub fn finite_diff_gradient(obj: &dyn Objective, x: ArrayView1<f64>, h: f64) -> Result<Array1<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive".into()));
    }
    let mut probe = x.to_owned();
    let mut g = Array1::zeros(x.len());
    for k in 0..x.len() {
        let orig = probe[k];
        probe[k] = orig + h;
        let up = obj.value_at(probe.view());
        probe[k] = orig - h;
        let down = obj.value_at(probe.view());
        probe[k] = orig;
        g[k] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// ‖a − b‖ / max(‖b‖, floor)
pub fn relative_error(a: ArrayView1<f64>, b: ArrayView1<f64>, floor: f64) -> f64 {
    let d = &a - &b;
    d.dot(&d).sqrt() / b.dot(&b).sqrt().max(floor)
}

/// Minimizer of a unimodal function on [lo, hi] by golden-section search.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn decompose_vertices() {
        let r = simplex_decompose(array![1.0, 0.0].view(), array![0.0, 1.0].view()).unwrap();
        assert_eq!(r.eta, 2.0);
        assert_eq!(r.p, array![1.0, 0.0]);
        assert_eq!(r.q, array![0.0, 1.0]);
    }

    #[test]
    fn decompose_equal_points() {
        let a = array![0.2, 0.8];
        assert_eq!(simplex_decompose(a.view(), a.view()).unwrap().eta, 0.0);
    }

    #[test]
    fn decompose_rejects_off_simplex() {
        assert!(simplex_decompose(array![0.5, 0.6].view(), array![0.5, 0.5].view()).is_err());
    }

    #[test]
    fn harmonic_sequence() {
        let a: Vec<f64> = (1..200).map(|k| 1.0 / k as f64).collect();
        assert_eq!(check_sequence_lemma(&a, 1.0), SequenceLemma::Holds);
    }

    #[test]
    fn constant_sequence_fails_premise() {
        assert_eq!(check_sequence_lemma(&[1.0, 1.0, 1.0], 1.0), SequenceLemma::PremiseFailed { k: 1 });
    }

    #[test]
    fn golden_section_parabola() {
        let x = golden_section(|t| (t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn single_term_identity() {
        let xs = vec![array![1.0, 0.0], array![0.5, 0.5]];
        let gs = vec![array![2.0, 0.0], array![1.0, 1.0]];
        let z = array![0.0, 1.0];
        let (e1, e2) = reduction_identity_errors(&gs, &xs, &z, 0, 1).unwrap();
        assert!(e1 <= 1e-15 && e2.is_none());
    }
}
