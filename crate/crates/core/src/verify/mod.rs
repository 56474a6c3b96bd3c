//! Independent oracles: reference optima, finite differences, the proof
//! lemmas in executable form, and the self-check suites behind the CLI.

mod lemmas;
mod reference;
mod suite;

pub use lemmas::{
    check_reduction_identity, check_sequence_lemma, finite_diff_gradient, golden_section, reduction_identity_errors,
    relative_error, simplex_decompose, Decomposition, SequenceLemma,
};
pub use reference::{frank_wolfe_gap, grid_minimum, reference_solve, Reference, ReferenceOptions};
pub use suite::{run_suites, SuiteOutcome};

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

/// Extreme eigenvalues (min, max) of 2AᵀA, i.e. the strong convexity and
/// smoothness constants of ‖Ax − b‖², by dense symmetric eigensolve.
pub fn least_squares_curvature(a: &Array2<f64>) -> (f64, f64) {
    let (n, d) = a.dim();
    let m = DMatrix::from_fn(n, d, |i, j| a[[i, j]]);
    let gram = m.transpose() * &m * 2.0;
    let eig = SymmetricEigen::new(gram);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min.max(0.0), max)
}

/// Gap sequence f(x^t) − f* cut at the first entry below `floor`, so that
/// rounding noise near the optimum does not masquerade as a lemma failure.
pub fn truncated_gaps(values: &[f64], f_star: f64, floor: f64) -> Vec<f64> {
    values.iter().map(|f| f - f_star).take_while(|&g| g > floor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn curvature_of_diagonal() {
        let a = array![[1.0, 0.0], [0.0, 3.0]];
        let (mu, l) = least_squares_curvature(&a);
        assert!((mu - 2.0).abs() < 1e-12 && (l - 18.0).abs() < 1e-12);
    }
}
