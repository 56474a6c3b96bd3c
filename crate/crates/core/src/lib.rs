//! Cyclic coordinate descent over polytopes given by their vertices.
//!
//! Each outer pass visits every vertex once and moves the iterate along the
//! segment toward it ([`polycd::polycd_solve`]). The away variant
//! ([`away::polycdwa_solve`]) keeps convex weights over the vertices and may
//! also step backwards, away from a vertex. Objectives cache enough state
//! that a step costs O(n + d). Baselines, data generators, numerical oracles
//! and the experiment harness behind the `polycd` binary live alongside.

// `!(x > 0.0)` rejects NaN as well; vertex groups are slices of ranges
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::single_range_in_vec_init)]

pub mod away;
pub mod baselines;
pub mod error;
pub mod harness;
mod hull;
pub mod objective;
pub mod polycd;
pub mod polytope;
pub mod problems;
pub mod step;
pub mod verify;
