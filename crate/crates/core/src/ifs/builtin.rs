//! Canonical systems shipped with the crate.

use super::similarity::Similarity;
use super::system::{SelfSimilarSystem, Weights};
use crate::error::{Error, Result};
use crate::geometry::AaBox;

pub const NAMES: [&str; 5] = ["cantor", "sierpinski", "vicsek", "lebesgue-interval", "lebesgue-square"];

pub fn by_name(name: &str) -> Result<SelfSimilarSystem> {
    Ok(match name {
        "cantor" => cantor(),
        "sierpinski" => sierpinski(),
        "vicsek" => vicsek(),
        "lebesgue-interval" => lebesgue_interval(),
        "lebesgue-square" => lebesgue_square(),
        _ => {
            return Err(Error::invalid(format!(
                "unknown built-in system {name:?} (known: {})",
                NAMES.join(", ")
            )))
        }
    })
}

fn build(scale: f64, shifts: &[&[f64]], omega: AaBox) -> SelfSimilarSystem {
    let maps = shifts
        .iter()
        .map(|s| Similarity::scaled(scale, s).expect("built-in map"))
        .collect();
    SelfSimilarSystem::new(maps, Weights::Hausdorff, omega).expect("built-in system")
}

/// Middle-thirds Cantor set with its Hausdorff measure.
pub fn cantor() -> SelfSimilarSystem {
    build(1.0 / 3.0, &[&[0.0], &[2.0 / 3.0]], AaBox::unit(1))
}

/// Sierpinski triangle with vertices (0,0), (1,0), (1/2, √3/2).
pub fn sierpinski() -> SelfSimilarSystem {
    let h = 3f64.sqrt() / 2.0;
    build(
        0.5,
        &[&[0.0, 0.0], &[0.5, 0.0], &[0.25, h / 2.0]],
        AaBox { lo: vec![0.0, 0.0], hi: vec![1.0, h] },
    )
}

/// Vicsek fractal, saltire form: the four corner squares and the centre square of a 3×3 grid.
pub fn vicsek() -> SelfSimilarSystem {
    let t = 1.0 / 3.0;
    let u = 2.0 / 3.0;
    build(t, &[&[0.0, 0.0], &[u, 0.0], &[t, t], &[0.0, u], &[u, u]], AaBox::unit(2))
}

/// Lebesgue measure on [0,1] as a two-map system.
pub fn lebesgue_interval() -> SelfSimilarSystem {
    build(0.5, &[&[0.0], &[0.5]], AaBox::unit(1))
}

/// Lebesgue measure on [0,1]² as a four-map system.
pub fn lebesgue_square() -> SelfSimilarSystem {
    build(0.5, &[&[0.0, 0.0], &[0.5, 0.0], &[0.0, 0.5], &[0.5, 0.5]], AaBox::unit(2))
}
