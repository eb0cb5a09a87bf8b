use serde::{Deserialize, Serialize};

use super::similarity::Similarity;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::roots::{solve_decreasing, Root};

const WEIGHT_TOL: f64 = 1e-12;
const CONTAINMENT_TOL: f64 = 1e-12;

/// How the weights ρⱼ of a system are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Explicit(Vec<f64>),
    /// ρⱼ = λⱼᴰ with D the similarity dimension (normalized Hausdorff measure).
    Hausdorff,
}

/// Solution of the mixed exponent equation Σ λⱼ^{Hγ} ρⱼ^{γ/q} = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaExponent {
    pub gamma: f64,
    /// Predicted small-deviation exponent γq/(q−γ) (γ itself when q = ∞).
    pub rate: f64,
    pub residual: f64,
}

/// Finitely many contractive similarities with weights and a box `omega`
/// assumed to satisfy the strong open set condition.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarSystem {
    dim: usize,
    maps: Vec<Similarity>,
    weights: Vec<f64>,
    omega: AaBox,
}

impl SelfSimilarSystem {
    pub fn new(maps: Vec<Similarity>, weights: Weights, omega: AaBox) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidSystem("no maps".into()));
        }
        if maps.len() == 1 {
            return Err(Error::DegenerateSystem);
        }
        let dim = omega.dim();
        for (j, s) in maps.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::InvalidSystem(format!(
                    "map {j} acts on dimension {}, omega has dimension {dim}",
                    s.dim()
                )));
            }
            if !(s.scale() > 0.0 && s.scale() < 1.0) {
                return Err(Error::InvalidSystem(format!(
                    "map {j} has scale {} outside (0, 1)",
                    s.scale()
                )));
            }
        }
        let volume: f64 = maps.iter().map(|s| s.scale().powi(dim as i32)).sum();
        if volume > 1.0 + 1e-12 {
            return Err(Error::InvalidSystem(format!(
                "sum of scale^N is {volume}, exceeding 1"
            )));
        }
        let scales: Vec<f64> = maps.iter().map(Similarity::scale).collect();
        let weights = match weights {
            Weights::Explicit(w) => w,
            Weights::Hausdorff => {
                let d = dimension_of_scales(&scales, dim)?.value;
                scales.iter().map(|l| l.powf(d)).collect()
            }
        };
        if weights.len() != maps.len() {
            return Err(Error::InvalidSystem(format!(
                "{} weights for {} maps",
                weights.len(),
                maps.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidSystem("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidSystem(format!("weights sum to {total}, not 1")));
        }
        let system = SelfSimilarSystem { dim, maps, weights, omega };
        system.check_open_set()?;
        Ok(system)
    }

    /// Spot check of the open set condition: every image of `omega` stays in
    /// `omega` (corner test) and image bounding boxes have disjoint interiors.
    fn check_open_set(&self) -> Result<()> {
        let corners = self.omega.corners();
        let mut images = Vec::with_capacity(self.maps.len());
        for (j, s) in self.maps.iter().enumerate() {
            let mapped: Vec<Vec<f64>> = corners.iter().map(|c| s.apply(c)).collect();
            if let Some(c) = mapped.iter().find(|c| !self.omega.contains(c, CONTAINMENT_TOL)) {
                return Err(Error::InvalidSystem(format!(
                    "map {j} sends a corner of omega to {c:?}, outside omega"
                )));
            }
            let mut lo = vec![f64::INFINITY; self.dim];
            let mut hi = vec![f64::NEG_INFINITY; self.dim];
            for c in &mapped {
                for k in 0..self.dim {
                    lo[k] = lo[k].min(c[k]);
                    hi[k] = hi[k].max(c[k]);
                }
            }
            images.push(AaBox { lo, hi });
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if images[i].interiors_overlap(&images[j], CONTAINMENT_TOL) {
                    return Err(Error::InvalidSystem(format!(
                        "images of omega under maps {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn omega(&self) -> &AaBox {
        &self.omega
    }

    pub fn scales(&self) -> Vec<f64> {
        self.maps.iter().map(Similarity::scale).collect()
    }

    /// The unique D > 0 with Σ λⱼᴰ = 1.
    pub fn similarity_dimension(&self) -> Result<Root> {
        dimension_of_scales(&self.scales(), self.dim)
    }

    /// Whether ρⱼ = λⱼᴰ within `tol`.
    pub fn has_hausdorff_weights(&self, tol: f64) -> bool {
        match self.similarity_dimension() {
            Ok(d) => self
                .maps
                .iter()
                .zip(&self.weights)
                .all(|(s, w)| (s.scale().powf(d.value) - w).abs() <= tol),
            Err(_) => false,
        }
    }

    /// Cost of one letter in the word-cover enumeration: dⱼ = −log(λⱼᴴ ρⱼ^{1/q}).
    pub fn letter_costs(&self, h: f64, q: f64) -> Vec<f64> {
        self.maps
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| -(h * s.scale().ln() + w.ln() * inv(q)))
            .collect()
    }

    /// Root γ of Σ λⱼ^{Hγ} ρⱼ^{γ/q} = 1 without the rate check.
    pub fn mixed_root(&self, h: f64, q: f64) -> Result<Root> {
        check_hq(h, q)?;
        let costs = self.letter_costs(h, q);
        let f = |g: f64| {
            costs.iter().fold((-1.0, 0.0), |(v, dv), d| {
                let e = (-d * g).exp();
                (v + e, dv - d * e)
            })
        };
        solve_decreasing(f, f64::MIN_POSITIVE, 1.0)
    }

    /// γ and the predicted small-deviation exponent γq/(q−γ).
    pub fn gamma_exponent(&self, h: f64, q: f64) -> Result<GammaExponent> {
        let root = self.mixed_root(h, q)?;
        let gamma = root.value;
        let rate = if q.is_infinite() {
            gamma
        } else {
            if gamma >= q - 1e-9 {
                return Err(Error::RateUndefined { gamma, q });
            }
            gamma * q / (q - gamma)
        };
        Ok(GammaExponent { gamma, rate, residual: root.residual })
    }
}

pub(crate) fn inv(q: f64) -> f64 {
    if q.is_infinite() {
        0.0
    } else {
        1.0 / q
    }
}

pub(crate) fn check_hq(h: f64, q: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::invalid(format!("H = {h} outside (0, 1]")));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("q = {q} must be at least 1")));
    }
    Ok(())
}

fn dimension_of_scales(scales: &[f64], dim: usize) -> Result<Root> {
    if scales.len() < 2 {
        return Err(Error::DegenerateSystem);
    }
    let logs: Vec<f64> = scales.iter().map(|l| l.ln()).collect();
    let f = |d: f64| {
        logs.iter().fold((-1.0, 0.0), |(v, dv), ll| {
            let e = (ll * d).exp();
            (v + e, dv + ll * e)
        })
    };
    solve_decreasing(f, f64::MIN_POSITIVE, dim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::builtin;

    #[test]
    fn single_map_is_degenerate() {
        let maps = vec![Similarity::scaled(0.5, &[0.0]).unwrap()];
        let err = SelfSimilarSystem::new(maps, Weights::Explicit(vec![1.0]), AaBox::unit(1));
        assert!(matches!(err, Err(Error::DegenerateSystem)));
    }

    #[test]
    fn rejects_weights_not_summing_to_one() {
        let maps = vec![
            Similarity::scaled(1.0 / 3.0, &[0.0]).unwrap(),
            Similarity::scaled(1.0 / 3.0, &[2.0 / 3.0]).unwrap(),
        ];
        let err = SelfSimilarSystem::new(maps, Weights::Explicit(vec![0.5, 0.6]), AaBox::unit(1));
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn rejects_volume_excess() {
        let maps = vec![
            Similarity::scaled(0.6, &[0.0]).unwrap(),
            Similarity::scaled(0.6, &[0.4]).unwrap(),
        ];
        let err = SelfSimilarSystem::new(maps, Weights::Explicit(vec![0.5, 0.5]), AaBox::unit(1));
        assert!(err.unwrap_err().to_string().contains("exceeding 1"));
    }

    #[test]
    fn rejects_overlapping_images() {
        let maps = vec![
            Similarity::scaled(0.4, &[0.0]).unwrap(),
            Similarity::scaled(0.4, &[0.3]).unwrap(),
        ];
        let err = SelfSimilarSystem::new(maps, Weights::Explicit(vec![0.5, 0.5]), AaBox::unit(1));
        assert!(err.unwrap_err().to_string().contains("overlap"));
    }

    #[test]
    fn rejects_map_leaving_omega() {
        let maps = vec![
            Similarity::scaled(0.3, &[0.0]).unwrap(),
            Similarity::scaled(0.3, &[0.8]).unwrap(),
        ];
        let err = SelfSimilarSystem::new(maps, Weights::Explicit(vec![0.5, 0.5]), AaBox::unit(1));
        assert!(err.unwrap_err().to_string().contains("outside omega"));
    }

    #[test]
    fn closed_form_dimensions() {
        let d = builtin::cantor().similarity_dimension().unwrap();
        assert!((d.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(d.residual <= 1e-10);
        let d = builtin::sierpinski().similarity_dimension().unwrap();
        assert!((d.value - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
        let d = builtin::lebesgue_interval().similarity_dimension().unwrap();
        assert!((d.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_gamma() {
        let g = builtin::cantor().gamma_exponent(0.5, 2.0).unwrap();
        assert!((g.gamma - 2.0 * 2f64.ln() / 6f64.ln()).abs() < 1e-12);
        assert!((g.rate - 1.261_859_507_142_914_8).abs() < 1e-9);

        let g = builtin::lebesgue_interval().gamma_exponent(1.0, 1.0).unwrap();
        assert!((g.gamma - 0.5).abs() < 1e-12);
        assert!((g.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_q_gives_dimension_over_h() {
        let sys = builtin::cantor();
        let g = sys.gamma_exponent(0.5, f64::INFINITY).unwrap();
        let d = sys.similarity_dimension().unwrap().value;
        assert!((g.rate - d / 0.5).abs() < 1e-10);
    }
}
