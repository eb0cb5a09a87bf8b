//! System definition files (TOML or JSON).
//!
//! ```toml
//! dim = 1
//! weights = "hausdorff"          # or a list [0.5, 0.5]
//! omega = { lo = [0.0], hi = [1.0] }
//!
//! [[maps]]
//! scale = 0.3333333333333333
//! rotation = "identity"          # or a row-major list
//! shift = [0.0]
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::similarity::Similarity;
use super::system::{SelfSimilarSystem, Weights};
use crate::error::{Error, Result};
use crate::geometry::AaBox;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RotationSpec {
    Named(String),
    RowMajor(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Named(String),
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub scale: f64,
    #[serde(default = "identity_rotation")]
    pub rotation: RotationSpec,
    pub shift: Vec<f64>,
}

fn identity_rotation() -> RotationSpec {
    RotationSpec::Named("identity".into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub dim: usize,
    pub maps: Vec<MapSpec>,
    pub weights: WeightsSpec,
    pub omega: BoxSpec,
}

impl SystemSpec {
    pub fn build(&self) -> Result<SelfSimilarSystem> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidSystem("dim must be positive".into()));
        }
        let mut maps = Vec::with_capacity(self.maps.len());
        for (j, m) in self.maps.iter().enumerate() {
            if m.shift.len() != n {
                return Err(Error::InvalidSystem(format!(
                    "map {j}: shift has {} entries, expected {n}",
                    m.shift.len()
                )));
            }
            let rotation = match &m.rotation {
                RotationSpec::Named(name) if name == "identity" => DMatrix::identity(n, n),
                RotationSpec::Named(name) => {
                    return Err(Error::InvalidSystem(format!("map {j}: unknown rotation {name:?}")))
                }
                RotationSpec::RowMajor(v) if v.len() == n * n => DMatrix::from_row_slice(n, n, v),
                RotationSpec::Rows(rows) if rows.len() == n && rows.iter().all(|r| r.len() == n) => {
                    DMatrix::from_row_slice(n, n, &rows.concat())
                }
                RotationSpec::Rows(_) => {
                    return Err(Error::InvalidSystem(format!("map {j}: rotation must be {n} rows of {n} entries")))
                }
                RotationSpec::RowMajor(v) => {
                    return Err(Error::InvalidSystem(format!(
                        "map {j}: rotation has {} entries, expected {}",
                        v.len(),
                        n * n
                    )))
                }
            };
            let sim = Similarity::new(m.scale, rotation, DVector::from_column_slice(&m.shift))
                .map_err(|e| Error::InvalidSystem(format!("map {j}: {e}")))?;
            maps.push(sim);
        }
        let weights = match &self.weights {
            WeightsSpec::Named(name) if name == "hausdorff" => Weights::Hausdorff,
            WeightsSpec::Named(name) => {
                return Err(Error::InvalidSystem(format!("unknown weights {name:?}")))
            }
            WeightsSpec::Explicit(w) => Weights::Explicit(w.clone()),
        };
        let omega = AaBox::new(self.omega.lo.clone(), self.omega.hi.clone())
            .map_err(|e| Error::InvalidSystem(format!("omega: {e}")))?;
        if omega.dim() != n {
            return Err(Error::InvalidSystem(format!("omega has dimension {}, expected {n}", omega.dim())));
        }
        SelfSimilarSystem::new(maps, weights, omega)
    }

    /// Explicit description of a built system (weights written out).
    pub fn from_system(system: &SelfSimilarSystem) -> Self {
        let n = system.dim();
        let maps = system
            .maps()
            .iter()
            .map(|s| {
                let r = s.rotation();
                let rotation = if *r == DMatrix::identity(n, n) {
                    identity_rotation()
                } else {
                    RotationSpec::RowMajor(r.transpose().iter().copied().collect())
                };
                MapSpec { scale: s.scale(), rotation, shift: s.shift().iter().copied().collect() }
            })
            .collect();
        SystemSpec {
            dim: n,
            maps,
            weights: WeightsSpec::Explicit(system.weights().to_vec()),
            omega: BoxSpec { lo: system.omega().lo.clone(), hi: system.omega().hi.clone() },
        }
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a file, choosing the format by extension (`.json` or anything else as TOML,
    /// falling back to JSON when TOML parsing fails).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text).or_else(|toml_err| {
                Self::from_json_str(&text).map_err(|_| toml_err)
            })
        };
        parsed.map_err(|message| Error::Parse { path: path.to_path_buf(), message })
    }
}

/// Loads and validates a system file.
pub fn load_system(path: &Path) -> Result<SelfSimilarSystem> {
    SystemSpec::load(path)?.build()
}
