use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::kernel::{gram, Kernel};
use crate::error::{Error, Result};
use crate::geometry::{dist, PointCloud};

/// Eigenvalues below this fraction of the largest are dropped from the
/// pseudo-inverse.
pub const PINV_RTOL: f64 = 1e-10;

/// Pseudo-inverse of a conditioning covariance K_SS in eigen form.
struct Schur {
    basis: DMatrix<f64>,
    inv_eigen: Vec<f64>,
}

impl Schur {
    fn new(k_ss: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(k_ss);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let inv_eigen = eig
            .eigenvalues
            .iter()
            .map(|&l| if top > 0.0 && l > PINV_RTOL * top { 1.0 / l } else { 0.0 })
            .collect();
        Schur { basis: eig.eigenvectors, inv_eigen }
    }

    /// k_tSᵀ K_SS⁺ k_tS.
    fn explained(&self, k_ts: &DVector<f64>) -> f64 {
        let proj = self.basis.tr_mul(k_ts);
        proj.iter().zip(&self.inv_eigen).map(|(c, w)| c * c * w).sum()
    }
}

fn residual(kernel: &Kernel, target: &[f64], cond: &PointCloud, schur: &Schur) -> f64 {
    let ktt = kernel.variance(target);
    let k_ts = DVector::from_iterator(cond.len(), cond.iter().map(|s| kernel.eval(target, s)));
    (ktt - schur.explained(&k_ts)).clamp(0.0, ktt)
}

/// Var[X(t) | X(s), s ∈ S] by a Schur complement with a pseudo-inverse,
/// clamped to [0, K(t, t)].
pub fn conditional_variance(kernel: &Kernel, target: &[f64], conditioners: &PointCloud) -> Result<f64> {
    kernel.check_point(target)?;
    if conditioners.is_empty() {
        return Ok(kernel.variance(target));
    }
    if conditioners.dim() != target.len() {
        return Err(Error::invalid("target and conditioners differ in dimension"));
    }
    if conditioners.iter().any(|s| dist(s, target) <= 1e-12) {
        return Err(Error::invalid("target coincides with a conditioning point"));
    }
    let schur = Schur::new(gram(kernel, conditioners)?);
    Ok(residual(kernel, target, conditioners, &schur))
}

/// How the separation τ of each cell is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum TauRule {
    /// One τ per cell.
    Given(Vec<f64>),
    /// τᵢ = dist(Aᵢ, ⋃_{k<i} A_k); the first cell is unconditioned.
    EarlierCells,
    /// τ = diam(A)/(2√N).
    Diameter,
}

/// Result of [`nondeterminism_profile`].
#[derive(Clone, Debug, PartialEq)]
pub struct NondeterminismProfile {
    /// V = minᵢ vᵢ.
    pub value: f64,
    /// vᵢ = v(Aᵢ, τᵢ)·μ(Aᵢ)^{1/q}; `None` for skipped empty cells.
    pub weighted: Vec<Option<f64>>,
    pub taus: Vec<f64>,
    pub warnings: Vec<String>,
}

fn set_distance(a: &PointCloud, b: &[&PointCloud]) -> f64 {
    let mut d = f64::INFINITY;
    for p in a.iter() {
        for cloud in b {
            for s in cloud.iter() {
                d = d.min(dist(p, s));
            }
        }
    }
    d
}

/// Point-cloud approximation of v(A, τ) = inf_{t∈A} Var[X(t) | X(s), |s − t| ≥ τ]^{1/2}
/// for each cell, weighted by μ(A)^{1/q}, and their minimum V.
///
/// Conditioning is on the supplied points only, so each vᵢ is at least the
/// continuum value.
pub fn nondeterminism_profile(
    kernel: &Kernel,
    cells: &[PointCloud],
    masses: &[f64],
    tau: &TauRule,
    q: f64,
) -> Result<NondeterminismProfile> {
    if cells.len() != masses.len() {
        return Err(Error::invalid("one mass per cell required"));
    }
    if masses.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
        return Err(Error::invalid("masses must lie in [0, 1]"));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("q = {q} must be at least 1")));
    }
    if let TauRule::Given(t) = tau {
        if t.len() != cells.len() || t.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::invalid("one nonnegative tau per cell required"));
        }
    }
    let dim = cells.iter().find(|c| !c.is_empty()).map(|c| c.dim()).unwrap_or(1);
    let mut all = PointCloud::new(dim);
    for c in cells {
        if !c.is_empty() && c.dim() != dim {
            return Err(Error::invalid("cells differ in dimension"));
        }
        for p in c.iter() {
            kernel.check_point(p)?;
            all.push(p);
        }
    }
    let inv_q = crate::ifs::inv_q(q);
    let mut cache: HashMap<Vec<usize>, Schur> = HashMap::new();
    let mut weighted = Vec::with_capacity(cells.len());
    let mut taus = Vec::with_capacity(cells.len());
    let mut warnings = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let t = match tau {
            TauRule::Given(t) => t[i],
            TauRule::EarlierCells => {
                let earlier: Vec<&PointCloud> = cells[..i].iter().filter(|c| !c.is_empty()).collect();
                set_distance(cell, &earlier)
            }
            TauRule::Diameter => cell.diameter() / (2.0 * (dim as f64).sqrt()),
        };
        taus.push(t);
        if cell.is_empty() {
            warnings.push(format!("cell {i} is empty and was skipped"));
            weighted.push(None);
            continue;
        }
        let mut v = f64::INFINITY;
        for target in cell.iter() {
            let idx: Vec<usize> = (0..all.len())
                .filter(|&j| {
                    let d = dist(all.point(j), target);
                    d > 1e-12 && d >= t
                })
                .collect();
            let var = if idx.is_empty() {
                kernel.variance(target)
            } else {
                let cond = PointCloud::from_points(dim, &idx.iter().map(|&j| all.point(j)).collect::<Vec<_>>())?;
                let schur = match cache.entry(idx) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => e.insert(Schur::new(gram(kernel, &cond)?)),
                };
                residual(kernel, target, &cond, schur)
            };
            v = v.min(var.sqrt());
        }
        weighted.push(Some(v * masses[i].powf(inv_q)));
    }
    let value = weighted.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    if !value.is_finite() {
        return Err(Error::invalid("all cells are empty"));
    }
    Ok(NondeterminismProfile { value, weighted, taus, warnings })
}
