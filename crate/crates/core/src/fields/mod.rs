//! Gaussian covariance kernels, exact joint sampling on finite point sets and
//! conditional (non-determinism) variances.

mod conditional;
mod kernel;
mod sample;

pub use conditional::{
    conditional_variance, nondeterminism_profile, NondeterminismProfile, TauRule, PINV_RTOL,
};
pub use kernel::{gram, Kernel};
pub use sample::{sample, FieldSampler, GaussianSampleBatch, BLOCK_REPS, JITTER_LEVELS};
