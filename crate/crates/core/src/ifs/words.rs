use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::similarity::Similarity;
use super::system::{check_hq, inv, SelfSimilarSystem};
use crate::error::{Error, Result};

/// Default cap on the number of words a cover may contain.
pub const DEFAULT_WORD_CAP: usize = 10_000_000;

/// A finite word over the map indices (0-based) with its composed scale λ_α,
/// mass ρ_α and weight Λ(α) = λ_α^H ρ_α^{1/q}.
#[derive(Clone, Debug, PartialEq)]
pub struct Word {
    pub indices: Vec<usize>,
    pub scale: f64,
    pub mass: f64,
    pub weight: f64,
    /// −log Λ(α), accumulated letter by letter.
    pub cost: f64,
}

impl Word {
    pub fn empty() -> Self {
        Word { indices: Vec::new(), scale: 1.0, mass: 1.0, weight: 1.0, cost: 0.0 }
    }

    pub fn new(system: &SelfSimilarSystem, indices: &[usize], h: f64, q: f64) -> Result<Self> {
        let costs = system.letter_costs(h, q);
        let mut w = Word::empty();
        for &i in indices {
            if i >= system.len() {
                return Err(Error::invalid(format!(
                    "letter {i} out of range for {} maps",
                    system.len()
                )));
            }
            w = w.extend(system, i, h, q, costs[i]);
        }
        Ok(w)
    }

    fn extend(&self, system: &SelfSimilarSystem, letter: usize, h: f64, q: f64, cost: f64) -> Word {
        let mut indices = Vec::with_capacity(self.indices.len() + 1);
        indices.extend_from_slice(&self.indices);
        indices.push(letter);
        let scale = self.scale * system.maps()[letter].scale();
        let mass = self.mass * system.weights()[letter];
        Word {
            indices,
            scale,
            mass,
            weight: scale.powf(h) * mass.powf(inv(q)),
            cost: self.cost + cost,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.indices.starts_with(&self.indices)
    }
}

/// S_α = S_{i₁} ∘ ⋯ ∘ S_{i_p}; the empty word gives the identity.
pub fn compose(system: &SelfSimilarSystem, indices: &[usize]) -> Result<Similarity> {
    let mut out = Similarity::identity(system.dim());
    for &i in indices {
        let map = system
            .maps()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("letter {i} out of range")))?;
        out = out.compose(map);
    }
    Ok(out)
}

/// Words α with Λ(α) ≤ e^{−s} < Λ(ᾱ), found by depth-first extension.
///
/// The result is a complete prefix-free code in lexicographic order; the
/// cells S_α(Ω̄) cover the attractor. Fails with [`Error::CoverTooLarge`]
/// when the estimate ⌈e^{γs}⌉ or the running count exceeds `cap`.
pub fn enumerate_level_words(
    system: &SelfSimilarSystem,
    h: f64,
    q: f64,
    s: f64,
    cap: usize,
) -> Result<Vec<Word>> {
    check_hq(h, q)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("level s = {s} must be positive")));
    }
    let gamma = system.mixed_root(h, q)?.value;
    let estimate = (gamma * s).exp().ceil();
    if estimate > cap as f64 {
        return Err(Error::CoverTooLarge { estimate, cap });
    }
    let costs = system.letter_costs(h, q);
    let mut out = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(word) = stack.pop() {
        for letter in (0..system.len()).rev() {
            let child = word.extend(system, letter, h, q, costs[letter]);
            if child.cost >= s {
                out.push(child);
                if out.len() > cap {
                    return Err(Error::CoverTooLarge { estimate: estimate.max(out.len() as f64), cap });
                }
            } else {
                stack.push(child);
            }
        }
    }
    // leaves were emitted in reverse letter order at each node
    out.sort_by(|a, b| a.indices.cmp(&b.indices));
    Ok(out)
}

/// One cover in the increasing-level sequence produced by splitting leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverLevel {
    /// Any s in `(s_lo, s_hi]` yields this cover.
    pub s_lo: f64,
    pub s_hi: f64,
    pub cells: usize,
    /// Σ Λ(α)^p over the cover for the requested power p.
    pub power_sum: f64,
}

#[derive(Debug)]
struct Leaf {
    cost: f64,
    scale: f64,
    mass: f64,
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost
    }
}
impl Eq for Leaf {}
impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Leaf {
    // min-heap on cost
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost)
    }
}

/// Walks the distinct covers of `enumerate_level_words` in order of increasing
/// level without materializing the words, tracking Σ Λ(α)^power.
///
/// Stops after the first cover with more than `max_cells` cells.
pub fn cover_levels(
    system: &SelfSimilarSystem,
    h: f64,
    q: f64,
    power: f64,
    max_cells: usize,
) -> Result<Vec<CoverLevel>> {
    check_hq(h, q)?;
    let costs = system.letter_costs(h, q);
    let qi = inv(q);
    let weight = |scale: f64, mass: f64| scale.powf(h) * mass.powf(qi);
    let mut heap = BinaryHeap::new();
    let mut sum = 0.0;
    for (j, map) in system.maps().iter().enumerate() {
        let leaf = Leaf { cost: costs[j], scale: map.scale(), mass: system.weights()[j] };
        sum += weight(leaf.scale, leaf.mass).powf(power);
        heap.push(leaf);
    }
    let mut levels = Vec::new();
    let mut s_lo = 0.0;
    loop {
        let min_cost = heap.peek().map(|l| l.cost).unwrap_or(f64::INFINITY);
        levels.push(CoverLevel { s_lo, s_hi: min_cost, cells: heap.len(), power_sum: sum });
        if heap.len() > max_cells {
            break;
        }
        // split every leaf at the minimal cost (ties split together)
        let tie = min_cost + 1e-12 * min_cost.abs().max(1.0);
        while heap.peek().is_some_and(|l| l.cost <= tie) {
            let leaf = heap.pop().expect("peeked");
            sum -= weight(leaf.scale, leaf.mass).powf(power);
            for (j, map) in system.maps().iter().enumerate() {
                let child = Leaf {
                    cost: leaf.cost + costs[j],
                    scale: leaf.scale * map.scale(),
                    mass: leaf.mass * system.weights()[j],
                };
                sum += weight(child.scale, child.mass).powf(power);
                heap.push(child);
            }
        }
        s_lo = min_cost;
    }
    Ok(levels)
}

/// The first level-s cover with at least `min_cells` cells, and its level.
pub fn cover_with_min_cells(
    system: &SelfSimilarSystem,
    h: f64,
    q: f64,
    min_cells: usize,
    cap: usize,
) -> Result<(f64, Vec<Word>)> {
    if min_cells > cap {
        return Err(Error::CoverTooLarge { estimate: min_cells as f64, cap });
    }
    let levels = cover_levels(system, h, q, 1.0, min_cells.saturating_sub(1).max(1))?;
    let level = levels
        .iter()
        .find(|l| l.cells >= min_cells)
        .expect("cover_levels runs until the cell bound is crossed");
    // any s in (s_lo, s_hi] selects this cover; the upper end avoids tie rounding
    let s = if level.s_hi.is_finite() { level.s_hi } else { level.s_lo + 1.0 };
    let s = if s > 0.0 { s } else { f64::MIN_POSITIVE };
    let words = enumerate_level_words(system, h, q, s, cap)?;
    Ok((s, words))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::builtin;

    #[test]
    fn cantor_level_one_gives_four_words() {
        let sys = builtin::cantor();
        let words = enumerate_level_words(&sys, 0.5, 2.0, 1.0, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words.len(), 4);
        for w in &words {
            assert_eq!(w.len(), 2);
            assert!((w.weight - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(words[1].indices, vec![0, 1]);
    }

    #[test]
    fn small_level_gives_single_letters() {
        let sys = builtin::vicsek();
        let dmin = sys.letter_costs(0.5, 2.0).into_iter().fold(f64::INFINITY, f64::min);
        let words = enumerate_level_words(&sys, 0.5, 2.0, dmin, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words.len(), sys.len());
    }

    #[test]
    fn empty_word_is_identity() {
        let sys = builtin::cantor();
        let id = compose(&sys, &[]).unwrap();
        assert_eq!(id.scale(), 1.0);
        assert_eq!(id.apply(&[0.37]), vec![0.37]);
        let one = compose(&sys, &[1]).unwrap();
        assert_eq!(&one, &sys.maps()[1]);
    }

    #[test]
    fn cap_is_enforced() {
        let sys = builtin::cantor();
        let err = enumerate_level_words(&sys, 0.5, 2.0, 40.0, 1000).unwrap_err();
        match err {
            Error::CoverTooLarge { estimate, cap } => {
                assert_eq!(cap, 1000);
                assert!(estimate > 1000.0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn cover_levels_match_enumeration() {
        let sys = builtin::sierpinski();
        let levels = cover_levels(&sys, 0.5, 2.0, 1.0, 5000).unwrap();
        for level in levels.iter().filter(|l| l.s_hi.is_finite()).take(6) {
            let s = 0.5 * (level.s_lo + level.s_hi);
            let words = enumerate_level_words(&sys, 0.5, 2.0, s, DEFAULT_WORD_CAP).unwrap();
            assert_eq!(words.len(), level.cells);
            let sum: f64 = words.iter().map(|w| w.weight).sum();
            assert!((sum - level.power_sum).abs() < 1e-10);
        }
    }

    #[test]
    fn min_cells_cover() {
        let (_, words) = cover_with_min_cells(&builtin::cantor(), 0.5, 2.0, 243, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words.len(), 256);
    }
}
