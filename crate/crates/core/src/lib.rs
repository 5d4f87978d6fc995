//! Inference-time higher-order Minkowski loss transforms for classifier
//! posteriors, with the decode-and-score machinery to compare them.
//!
//! The order-`p` transform replaces each class posterior `mu` with the
//! prediction that minimizes the expected loss `E|y - t|^p` for a binary
//! target `t` with mean `mu`. Order 2 is the identity. Orders 4 and 6 pull
//! posteriors toward one half, most strongly where they are small.
//!
//! - [`mink`]: expected loss, gradient polynomials, root solvers and the
//!   odd-order root analysis.
//! - [`posterior`]: matrix-level transforms and log-domain scores.
//! - [`decoder`]: Viterbi decoding with an exhaustive oracle.
//! - [`scoring`]: word error rate.
//! - [`dataio`]: file formats and the synthetic corpus generator.
//! - [`curves`], [`pipeline`], [`experiment`]: what the CLI is built from.

pub mod curves;
pub mod dataio;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod mink;
pub mod pipeline;
pub mod posterior;
pub mod scoring;

pub use error::{Error, ErrorKind, FormatIssue, Result};
pub use mink::{LossOrder, OddLossOrder, Posterior, SolverConfig};
