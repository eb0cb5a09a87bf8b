use rand::Rng;
use rand_distr::{Distribution, weighted::WeightedIndex};

use super::system::SelfSimilarSystem;
use super::words::{compose, enumerate_level_words, Word, DEFAULT_WORD_CAP};
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, WeightedPoints};
use crate::rng::{stream_rng, streams};

pub const DEFAULT_BURN_IN: usize = 64;

/// Chaos-game sample of the self-similar measure: `count` consecutive orbit
/// points after `burn_in` steps from the centre of omega, each of mass 1/count.
pub fn sample_measure(
    system: &SelfSimilarSystem,
    count: usize,
    seed: u64,
    burn_in: usize,
) -> Result<WeightedPoints> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let chooser = WeightedIndex::new(system.weights())
        .map_err(|e| Error::invalid(format!("weights: {e}")))?;
    let mut rng = stream_rng(seed, streams::CHAOS_GAME);
    let mut x = system.omega().center();
    let mut next = vec![0.0; system.dim()];
    let mut cloud = PointCloud::new(system.dim());
    for step in 0..burn_in + count {
        let j = chooser.sample(&mut rng);
        system.maps()[j].apply_into(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        if step >= burn_in {
            cloud.push(&x);
        }
    }
    Ok(WeightedPoints::uniform(cloud))
}

/// Point near the attractor: `burn_in` random maps applied to the centre of omega.
fn attractor_point<R: Rng>(
    system: &SelfSimilarSystem,
    chooser: &WeightedIndex<f64>,
    burn_in: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut x = system.omega().center();
    let mut next = vec![0.0; system.dim()];
    for _ in 0..burn_in {
        let j = chooser.sample(rng);
        system.maps()[j].apply_into(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    x
}

/// Stratified sample over the level-`s` word cover: each cell S_α(Ω̄) gets
/// `points_per_cell` chaos-game points sharing its exact mass ρ_α.
pub fn stratified_sample(
    system: &SelfSimilarSystem,
    h: f64,
    q: f64,
    s: f64,
    points_per_cell: usize,
    seed: u64,
) -> Result<WeightedPoints> {
    if points_per_cell == 0 {
        return Err(Error::EmptyStratum);
    }
    let words = enumerate_level_words(system, h, q, s, DEFAULT_WORD_CAP)?;
    stratified_over(system, &words, points_per_cell, seed)
}

/// [`stratified_sample`] over an explicit cover.
pub fn stratified_over(
    system: &SelfSimilarSystem,
    words: &[Word],
    points_per_cell: usize,
    seed: u64,
) -> Result<WeightedPoints> {
    if points_per_cell == 0 {
        return Err(Error::EmptyStratum);
    }
    let chooser = WeightedIndex::new(system.weights())
        .map_err(|e| Error::invalid(format!("weights: {e}")))?;
    let mut rng = stream_rng(seed, streams::STRATIFIED);
    let mut cloud = PointCloud::new(system.dim());
    let mut masses = Vec::with_capacity(words.len() * points_per_cell);
    for word in words {
        let map = compose(system, &word.indices)?;
        let share = word.mass / points_per_cell as f64;
        for _ in 0..points_per_cell {
            let y = attractor_point(system, &chooser, DEFAULT_BURN_IN, &mut rng);
            cloud.push(&map.apply(&y));
            masses.push(share);
        }
    }
    WeightedPoints::new(cloud, masses)
}

/// Deterministic discretization: one atom S_α(x₀) of mass ρ_α per word,
/// where x₀ is the fixed point of the first map (a point of the attractor).
pub fn cell_anchors(system: &SelfSimilarSystem, words: &[Word]) -> Result<WeightedPoints> {
    let x0 = system.maps()[0].fixed_point()?;
    let mut cloud = PointCloud::new(system.dim());
    let mut masses = Vec::with_capacity(words.len());
    for word in words {
        cloud.push(&compose(system, &word.indices)?.apply(&x0));
        masses.push(word.mass);
    }
    WeightedPoints::new(cloud, masses)
}
