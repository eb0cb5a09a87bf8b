//! Self-similar measures, mixed entropy and small-deviation rates for Gaussian
//! random fields measured in `L_q(μ)`.
//!
//! * [`ifs`] builds self-similar systems, enumerates word covers and solves the
//!   exponent equations for the similarity dimension D and the mixed exponent γ.
//! * [`entropy`] computes outer/inner mixed entropies and metric entropy of
//!   point clouds.
//! * [`fields`] evaluates fBm and Brownian-sheet covariances, samples them
//!   exactly and computes conditional (non-determinism) variances.
//! * [`smalldev`] estimates `P(‖X‖ < ε)` by Monte Carlo and fits the rate.
//! * [`cli`] is the batch front end used by the `fractal-smalldev` binary.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod format;
pub mod geometry;
pub mod ifs;
pub mod rng;
pub mod roots;
pub mod smalldev;

pub use error::{Error, Result};
