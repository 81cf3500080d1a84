//! Tunable alpha-loss for binary classification.
//!
//! The crate covers the loss family itself ([`loss`]), its information-
//! theoretic characterization ([`info`]), the logistic model with analytic
//! gradients and Hessians ([`logistic`]), strictly-local-quasi-convexity
//! certificates and normalized gradient descent ([`slqc`]), a seeded
//! Gaussian-mixture experiment harness ([`harness`]) and generalization
//! bounds ([`generalization`]).

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod error;
pub mod generalization;
pub mod harness;
pub mod info;
pub mod logistic;
pub mod loss;
pub mod numeric;
pub mod slqc;

pub use alpha::{AlphaParam, Branch};
pub use error::{Error, Result};
