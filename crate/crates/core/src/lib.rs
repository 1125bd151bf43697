//! Bagged posteriors (BayesBag) for conjugate Gaussian models, the
//! credible-interval overlap criterion, asymptotic overlap calculators and a
//! simulation harness for misspecified regression experiments.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bagging;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod overlap;
pub mod randstream;
pub mod sampler;
pub mod simgen;
pub mod special;

pub use error::{Error, Result};
