//! Minimal label flipping for individual fairness.
//!
//! Given binary training labels and a similarity graph over the examples,
//! the toolkit flips as few labels as possible so that the weighted number
//! of disagreeing similar pairs (the *total error*) is at most a limit `m`.
//!
//! The main entry point is [`pipeline::iflipper_repair`], which solves the
//! LP relaxation, converts the optimum into a `{0, α, 1}` solution, rounds
//! it adaptively and finally unflips labels greedily while staying within
//! the limit. The greedy, gradient, k-means and exact ILP baselines live in
//! [`baselines`]; data ingestion, synthetic data, sweeps and reporting live
//! in [`harness`].

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod lp;
pub mod metrics;
pub mod pipeline;
pub mod rounding;
pub mod similarity;
pub mod transform;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    apply_flips, validate_graph, Dataset, Edge, FractionalSolution, LabelVector, Method,
    RepairConfig, RepairReport, SimilarityGraph,
};
