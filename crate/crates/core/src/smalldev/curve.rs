use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldSampler, Kernel};
use crate::format::sig17;
use crate::geometry::WeightedPoints;

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z95: f64 = 1.959963984540054;

/// Smallest replicate count accepted by [`estimate_curve`].
pub const MIN_REPS: usize = 1000;

/// Largest number of sites the exact sampler is asked to factor.
pub const MAX_SITES: usize = 4096;

/// Counts below this are flagged `sparse`.
pub const SPARSE_COUNT: usize = 10;

/// (Σ mᵢ |xᵢ|^q)^{1/q}, or max |xᵢ| for q = ∞.
pub fn lq_norm(values: &[f64], masses: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    }
    let s: f64 = values.iter().zip(masses).map(|(x, m)| m * x.abs().powf(q)).sum();
    s.powf(1.0 / q)
}

/// Wilson score interval for a proportion `p` observed over `n` trials.
pub fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if p <= 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if p >= 1.0 { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFlag {
    Ok,
    /// Fewer than [`SPARSE_COUNT`] replicates below ε.
    Sparse,
    /// No replicate below ε; φ is not available.
    Unresolved,
    /// Every replicate below ε; φ = 0.
    Saturated,
}

impl PointFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::Sparse => "sparse",
            PointFlag::Unresolved => "unresolved",
            PointFlag::Saturated => "saturated",
        }
    }

    /// Whether log φ is finite at this point.
    pub fn is_resolved(&self) -> bool {
        matches!(self, PointFlag::Ok | PointFlag::Sparse)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eps: f64,
    pub count: f64,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    /// −log p̂ when p̂ > 0.
    pub phi: Option<f64>,
    pub flag: PointFlag,
}

impl CurvePoint {
    fn new(eps: f64, count: f64, reps: usize) -> Self {
        let n = reps as f64;
        let p_hat = count / n;
        let (lo, hi) = wilson(p_hat, n, Z95);
        let flag = if count <= 0.0 {
            PointFlag::Unresolved
        } else if count >= n {
            PointFlag::Saturated
        } else if count < SPARSE_COUNT as f64 {
            PointFlag::Sparse
        } else {
            PointFlag::Ok
        };
        let phi = (count > 0.0).then(|| -p_hat.ln()).map(|v| if v == 0.0 { 0.0 } else { v });
        CurvePoint { eps, count, p_hat, lo, hi, phi, flag }
    }
}

/// How the L_q(μ) norm was discretized.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_cell: Option<usize>,
}

/// Estimated P(‖X‖ < ε) on a grid of ε, all from one shared batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDevCurve {
    /// Sorted by decreasing ε.
    pub points: Vec<CurvePoint>,
    pub reps: usize,
    #[serde(with = "crate::format::q_serde")]
    pub q: f64,
    pub seed: u64,
    pub quadrature: Quadrature,
    pub jitter_used: f64,
}

impl SmallDevCurve {
    /// Curve from a sample of norms sorted ascending.
    pub fn from_sorted_norms(norms: &[f64], eps_grid: &[f64], q: f64, seed: u64, quadrature: Quadrature) -> Self {
        let mut grid = eps_grid.to_vec();
        grid.sort_by(|a, b| b.total_cmp(a));
        let points = grid
            .into_iter()
            .map(|eps| CurvePoint::new(eps, norms.partition_point(|&x| x < eps) as f64, norms.len()))
            .collect();
        SmallDevCurve { points, reps: norms.len(), q, seed, quadrature, jitter_used: 0.0 }
    }

    /// Noise-free curve with prescribed φ(ε) as if observed over `reps` trials.
    pub fn synthetic(eps: &[f64], phi: impl Fn(f64) -> f64, reps: usize) -> Self {
        let points = eps
            .iter()
            .map(|&e| CurvePoint::new(e, (-phi(e)).exp() * reps as f64, reps))
            .collect();
        SmallDevCurve { points, reps, q: 2.0, seed: 0, quadrature: Quadrature::default(), jitter_used: 0.0 }
    }

    /// Writes `eps,p_hat,lo,hi,phi,flag`; φ is empty where unresolved.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "p_hat", "lo", "hi", "phi", "flag"])?;
        for p in &self.points {
            w.write_record([
                sig17(p.eps),
                sig17(p.p_hat),
                sig17(p.lo),
                sig17(p.hi),
                p.phi.map(sig17).unwrap_or_default(),
                p.flag.as_str().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

fn check_sites(sites: &WeightedPoints) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::invalid("no measure sites"));
    }
    if sites.len() > MAX_SITES {
        return Err(Error::invalid(format!(
            "{} sites exceed the factorization cap of {MAX_SITES}",
            sites.len()
        )));
    }
    let total = sites.total_mass();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("site masses sum to {total}, expected 1")));
    }
    Ok(())
}

/// L_q(μ) norms of `reps` joint draws at the sites, sorted ascending, and the
/// jitter the factorization needed.
pub fn simulate_norms(
    kernel: &Kernel,
    sites: &WeightedPoints,
    q: f64,
    reps: usize,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    check_sites(sites)?;
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("q = {q} must be at least 1")));
    }
    let sampler = FieldSampler::new(*kernel, sites.points.clone())?;
    let masses = &sites.masses;
    let blocks = sampler.map_blocks(reps, seed, |block| {
        (0..block.nrows())
            .map(|i| {
                let row: Vec<f64> = block.row(i).iter().copied().collect();
                lq_norm(&row, masses, q)
            })
            .collect::<Vec<f64>>()
    })?;
    let mut norms: Vec<f64> = blocks.into_iter().flatten().collect();
    norms.sort_by(f64::total_cmp);
    Ok((norms, sampler.jitter_used()))
}

/// Estimates P(‖X‖_{L_q(μ)} < ε) for every ε from one shared batch.
pub fn estimate_curve(
    kernel: &Kernel,
    sites: &WeightedPoints,
    q: f64,
    eps_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<SmallDevCurve> {
    if reps < MIN_REPS {
        return Err(Error::invalid(format!("reps = {reps} below the minimum of {MIN_REPS}")));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("eps grid must be non-empty, positive and finite"));
    }
    let (norms, jitter) = simulate_norms(kernel, sites, q, reps, seed)?;
    let quadrature = Quadrature { sites: sites.len(), ..Quadrature::default() };
    let mut curve = SmallDevCurve::from_sorted_norms(&norms, eps_grid, q, seed, quadrature);
    curve.jitter_used = jitter;
    Ok(curve)
}

/// `k` points from `lo` to `hi`, geometrically spaced and decreasing.
pub fn geometric_grid(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || k < 2 {
        return Err(Error::invalid(format!("bad eps range [{lo}, {hi}] with {k} points")));
    }
    let ratio = (lo / hi).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { lo } else { hi * (ratio * i as f64).exp() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;

    #[test]
    fn norm_examples() {
        assert!((lq_norm(&[-3.0, -3.0], &[0.5, 0.5], 2.0) - 3.0).abs() < 1e-15);
        assert!((lq_norm(&[0.0, 2.0], &[0.5, 0.5], 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lq_norm(&[-3.0, 1.0], &[0.5, 0.5], f64::INFINITY), 3.0);
        assert!((lq_norm(&[1.5; 4], &[0.25; 4], 1.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson(0.01, 1000.0, Z95);
        assert!(lo > 0.0 && lo < 0.01 && hi > 0.01);
        let (lo, hi) = wilson(0.0, 1000.0, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.005);
    }

    #[test]
    fn flags_and_monotonicity() {
        let norms: Vec<f64> = (1..=2000).map(|i| i as f64 / 1000.0).collect();
        let c = SmallDevCurve::from_sorted_norms(&norms, &[0.0001, 0.005, 0.5, 3.0], 2.0, 1, Quadrature::default());
        let flags: Vec<PointFlag> = c.points.iter().map(|p| p.flag).collect();
        assert_eq!(flags, vec![PointFlag::Saturated, PointFlag::Ok, PointFlag::Sparse, PointFlag::Unresolved]);
        assert_eq!(c.points[0].phi, Some(0.0));
        assert_eq!(c.points[3].phi, None);
        assert!(c.points.windows(2).all(|w| w[0].p_hat >= w[1].p_hat));
    }

    #[test]
    fn curve_csv_leaves_unresolved_phi_empty() {
        let c = SmallDevCurve::from_sorted_norms(&[1.0; 1000], &[0.5, 2.0], 2.0, 1, Quadrature::default());
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "eps,p_hat,lo,hi,phi,flag");
        assert!(lines[2].ends_with(",,unresolved"));
    }

    #[test]
    fn estimate_rejects_small_budgets() {
        let bm = Kernel::fbm(0.5).unwrap();
        let sites = WeightedPoints::uniform(PointCloud::from_line(&[0.5, 1.0]).unwrap());
        assert!(estimate_curve(&bm, &sites, 2.0, &[0.5], 999, 1).is_err());
        let c = estimate_curve(&bm, &sites, 2.0, &[1e9], 1000, 1).unwrap();
        assert_eq!(c.points[0].p_hat, 1.0);
        assert_eq!(c.points[0].phi, Some(0.0));
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(0.25, 0.9, 12).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 0.9);
        assert_eq!(g[11], 0.25);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }
}
