use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, norm, PointCloud};

/// Covariance kernel of a centred Gaussian field indexed by ℝᴺ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Kernel {
    /// N-parameter fractional Brownian motion (Lévy fBm) with Hurst index H.
    Fbm { h: f64 },
    /// Brownian sheet on the positive orthant.
    BrownianSheet,
}

impl Kernel {
    pub fn fbm(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::invalid(format!("fBm Hurst index {h} outside (0, 1)")));
        }
        Ok(Kernel::Fbm { h })
    }

    /// Smoothness exponent H of the kernel (1/2 for the sheet).
    pub fn hurst(&self) -> f64 {
        match self {
            Kernel::Fbm { h } => *h,
            Kernel::BrownianSheet => 0.5,
        }
    }

    pub fn check_point(&self, t: &[f64]) -> Result<()> {
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        if matches!(self, Kernel::BrownianSheet) {
            if let Some(x) = t.iter().find(|&&x| x < 0.0) {
                return Err(Error::Domain(format!(
                    "Brownian sheet needs nonnegative coordinates, got {x}"
                )));
            }
        }
        Ok(())
    }

    /// K(s, t) without domain checks.
    pub fn eval(&self, s: &[f64], t: &[f64]) -> f64 {
        match self {
            Kernel::Fbm { h } => {
                let e = 2.0 * h;
                0.5 * (norm(s).powf(e) + norm(t).powf(e) - dist(s, t).powf(e))
            }
            Kernel::BrownianSheet => s.iter().zip(t).map(|(a, b)| a.min(*b)).product(),
        }
    }

    /// K(t, t).
    pub fn variance(&self, t: &[f64]) -> f64 {
        match self {
            Kernel::Fbm { h } => norm(t).powf(2.0 * h),
            Kernel::BrownianSheet => t.iter().product(),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Fbm { h } => write!(f, "fbm:{h}"),
            Kernel::BrownianSheet => write!(f, "sheet"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Accepts `fbm:<H>`, `bm` (fBm with H = 1/2) and `sheet`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sheet" | "brownian_sheet" | "brownian-sheet" => Ok(Kernel::BrownianSheet),
            "bm" => Kernel::fbm(0.5),
            _ => match s.strip_prefix("fbm:") {
                Some(h) => {
                    let h: f64 = h
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad Hurst index in kernel '{s}'")))?;
                    Kernel::fbm(h)
                }
                None => Err(Error::invalid(format!(
                    "unknown kernel '{s}'; expected fbm:<H>, bm or sheet"
                ))),
            },
        }
    }
}

/// Gram matrix K(tᵢ, tⱼ), symmetric by construction.
pub fn gram(kernel: &Kernel, points: &PointCloud) -> Result<DMatrix<f64>> {
    for p in points.iter() {
        kernel.check_point(p)?;
    }
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let pi = points.point(i);
        g[(i, i)] = kernel.variance(pi);
        for j in 0..i {
            let v = kernel.eval(pi, points.point(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}
