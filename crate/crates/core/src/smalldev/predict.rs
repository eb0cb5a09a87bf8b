use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::SelfSimilarSystem;

/// Source of a predicted small-deviation exponent.
#[derive(Clone, Debug)]
pub enum PredictionSpec<'a> {
    /// γq/(q − γ) from the mixed exponent equation (γ itself for q = ∞).
    SelfSimilar { system: &'a SelfSimilarSystem, h: f64, q: f64 },
    /// D/H for the normalized Hausdorff measure.
    Hausdorff { system: &'a SelfSimilarSystem, h: f64 },
    /// N/H for Lebesgue measure on [0,1]ᴺ.
    Lebesgue { dim: usize, h: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub a: f64,
    pub note: String,
    /// Residuals of the exponent equations that were solved.
    pub residuals: Vec<f64>,
}

pub fn predicted_exponent(spec: &PredictionSpec<'_>) -> Result<Prediction> {
    match *spec {
        PredictionSpec::SelfSimilar { system, h, q } => {
            let g = system.gamma_exponent(h, q)?;
            let note = if q.is_infinite() {
                format!("a = gamma = {} (sup norm)", g.gamma)
            } else {
                format!("a = gamma q / (q - gamma) with gamma = {}", g.gamma)
            };
            Ok(Prediction { a: g.rate, note, residuals: vec![g.residual] })
        }
        PredictionSpec::Hausdorff { system, h } => {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::invalid(format!("H = {h} outside (0, 1]")));
            }
            let d = system.similarity_dimension()?;
            Ok(Prediction { a: d.value / h, note: format!("a = D / H with D = {}", d.value), residuals: vec![d.residual] })
        }
        PredictionSpec::Lebesgue { dim, h } => {
            if dim == 0 || !(h > 0.0 && h <= 1.0) {
                return Err(Error::invalid("Lebesgue prediction needs N >= 1 and H in (0, 1]"));
            }
            Ok(Prediction { a: dim as f64 / h, note: format!("a = N / H with N = {dim}"), residuals: vec![] })
        }
    }
}
