//! Trust-aware collaborative filtering.
//!
//! The crate is organised as a pipeline:
//!
//! - [`dataset`] loads and filters a Yelp-like social review dataset and
//!   produces reproducible holdout and k-fold splits.
//! - [`trustgraph`] turns friend relations into a directed graph and ranks
//!   users with PageRank.
//! - [`mtm`] computes the individual trust indicators and fuses them into a
//!   per-user reputation and a per-rating trust weight.
//! - [`factorization`] trains plain, LOCABAL and LOCABAL+ matrix
//!   factorization models by full-batch gradient descent.
//! - [`knn`] provides the user-to-user neighbourhood baselines.
//! - [`evaluation`] builds top-k lists, computes the @k metric suite and runs
//!   cross-validated grid searches.
//! - [`synth`] generates synthetic datasets with planted reliable and noisy
//!   raters.
//! - [`cli`] wires everything into the `trustrec` command line tool.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod factorization;
pub mod knn;
pub mod mtm;
pub mod ratings;
pub mod rng;
pub mod synth;
pub mod trustgraph;

pub use error::{Error, Result};
