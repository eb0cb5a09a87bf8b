//! Self-similar systems: construction, word covers, exponent equations and
//! samplers for the self-similar measure.

pub mod builtin;
pub mod config;
mod sample;
mod similarity;
mod system;
mod words;

pub use config::{load_system, SystemSpec};
pub use sample::{cell_anchors, sample_measure, stratified_over, stratified_sample, DEFAULT_BURN_IN};
pub use similarity::Similarity;
pub use system::{GammaExponent, SelfSimilarSystem, Weights};
pub use words::{
    compose, cover_levels, cover_with_min_cells, enumerate_level_words, CoverLevel, Word,
    DEFAULT_WORD_CAP,
};

/// 1/q with 1/∞ = 0.
pub fn inv_q(q: f64) -> f64 {
    system::inv(q)
}
