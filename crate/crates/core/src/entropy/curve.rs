use std::io::Write;

use serde::{Deserialize, Serialize};

use super::params::MixedParams;
use crate::error::Result;
use crate::format::sig17;

/// Direction of a computed bound relative to the true quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
    Exact,
}

impl Bound {
    pub fn as_str(&self) -> &'static str {
        match self {
            Bound::Upper => "upper",
            Bound::Lower => "lower",
            Bound::Exact => "exact",
        }
    }
}

/// A single entropy evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub bound: Bound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    Sigma,
    Delta,
    InnerEntropy,
    SigmaInfty,
}

impl EntropyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntropyKind::Sigma => "sigma",
            EntropyKind::Delta => "delta",
            EntropyKind::InnerEntropy => "inner_entropy",
            EntropyKind::SigmaInfty => "sigma_infty",
        }
    }
}

/// Power-law summary value ≈ c · n^{−exponent} · (log n)^{log_exponent}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub log_exponent: f64,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub kind: EntropyKind,
    pub params: MixedParams,
    pub bound: Bound,
    pub points: Vec<(usize, f64)>,
    pub fit: Option<PowerFit>,
}

impl EntropyCurve {
    pub fn new(kind: EntropyKind, params: MixedParams, bound: Bound, points: Vec<(usize, f64)>) -> Self {
        EntropyCurve { kind, params, bound, points, fit: None }
    }

    /// True when values never increase along n (within relative `tol`).
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 * (1.0 + tol) + f64::MIN_POSITIVE)
    }

    /// Least-squares slope of log value against log n over positive values; stores
    /// the fit with `exponent` = −slope.
    pub fn fit_power_law(&mut self) -> Option<PowerFit> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(n, v)| *n > 0 && *v > 0.0)
            .map(|&(n, v)| ((n as f64).ln(), v.ln()))
            .collect();
        let (slope, intercept) = loglog_slope(&pts)?;
        let fit = PowerFit { exponent: -slope, log_exponent: 0.0, constant: intercept.exp() };
        self.fit = Some(fit);
        Some(fit)
    }

    /// Writes `kind,H,q,N,r,n,value,bound` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_curves_csv(std::slice::from_ref(self), out)
    }
}

/// Writes several curves under one `kind,H,q,N,r,n,value,bound` header.
pub fn write_curves_csv<W: Write>(curves: &[EntropyCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "H", "q", "N", "r", "n", "value", "bound"])?;
    for c in curves {
        let p = &c.params;
        for &(n, v) in &c.points {
            w.write_record([
                c.kind.as_str().to_string(),
                sig17(p.h()),
                sig17(p.q()),
                p.dim().to_string(),
                sig17(p.r()),
                n.to_string(),
                sig17(v),
                c.bound.as_str().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| crate::Error::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}

/// Ordinary least squares slope and intercept of `(x, y)` pairs.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
