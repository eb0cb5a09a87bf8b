use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::curve::{SmallDevCurve, Z95};
use crate::error::{Error, Result};

/// Fit of φ(ε) ≈ c · ε^{−a} · log(1/ε)^{aβ}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub a: f64,
    /// `None` when β was locked to 0.
    pub beta: Option<f64>,
    pub c: f64,
    /// (smallest, largest) ε used.
    pub window: (f64, f64),
    pub stderr_a: f64,
    pub stderr_beta: Option<f64>,
    pub points_used: usize,
    /// Weighted residual sum of squares per degree of freedom.
    pub reduced_chi2: f64,
}

/// Weighted least squares of log φ on log(1/ε) (and log log(1/ε) when
/// `fit_beta`) over the resolved points with ε in `window`.
///
/// Each point is weighted by the inverse variance of log φ implied by its
/// Wilson interval. Standard errors are scaled by the reduced χ² when it
/// exceeds 1.
pub fn fit_rate(curve: &SmallDevCurve, fit_beta: bool, window: Option<(f64, f64)>) -> Result<RateFit> {
    let (wlo, whi) = window.unwrap_or((0.0, f64::INFINITY));
    let pts: Vec<_> = curve
        .points
        .iter()
        .filter(|p| p.flag.is_resolved() && p.eps >= wlo && p.eps <= whi)
        .collect();
    if pts.len() < 4 {
        return Err(Error::WindowTooNarrow { resolved: pts.len() });
    }
    if fit_beta && pts.iter().any(|p| p.eps >= 1.0) {
        return Err(Error::invalid("fitting the log exponent needs every eps in the window below 1"));
    }
    let cols = if fit_beta { 3 } else { 2 };
    let n = pts.len();
    let mut x = DMatrix::zeros(n, cols);
    let mut y = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    for (i, p) in pts.iter().enumerate() {
        let phi = p.phi.expect("resolved");
        let l = (1.0 / p.eps).ln();
        x[(i, 0)] = 1.0;
        x[(i, 1)] = l;
        if fit_beta {
            x[(i, 2)] = l.ln();
        }
        y[i] = phi.ln();
        let sd_p = (p.hi - p.lo) / (2.0 * Z95);
        let sd_log_phi = sd_p / (p.p_hat * phi);
        w[i] = if sd_log_phi > 0.0 { 1.0 / (sd_log_phi * sd_log_phi) } else { 1.0 };
    }
    let mut xtw = x.transpose();
    for i in 0..n {
        xtw.column_mut(i).scale_mut(w[i]);
    }
    let normal = &xtw * &x;
    let rhs = &xtw * &y;
    let cov = normal
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::invalid("degenerate eps window: design matrix is singular"))?;
    let coef = &cov * rhs;
    let resid = &y - &x * &coef;
    let chi2: f64 = (0..n).map(|i| w[i] * resid[i] * resid[i]).sum();
    let dof = n.saturating_sub(cols);
    let reduced_chi2 = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    let scale = reduced_chi2.max(1.0);
    let a = coef[1];
    let stderr_a = (cov[(1, 1)] * scale).sqrt();
    let (beta, stderr_beta) = if fit_beta {
        let b = coef[2];
        // β = b/a by the delta method
        let var = scale
            * (cov[(2, 2)] / (a * a) + b * b * cov[(1, 1)] / a.powi(4) - 2.0 * b * cov[(1, 2)] / a.powi(3));
        (Some(b / a), Some(var.max(0.0).sqrt()))
    } else {
        (None, None)
    };
    let eps: Vec<f64> = pts.iter().map(|p| p.eps).collect();
    let window = (
        eps.iter().copied().fold(f64::INFINITY, f64::min),
        eps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(RateFit { a, beta, c: coef[0].exp(), window, stderr_a, stderr_beta, points_used: n, reduced_chi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smalldev::curve::geometric_grid;

    #[test]
    fn recovers_pure_power() {
        let eps = geometric_grid(0.3, 0.9, 10).unwrap();
        let curve = SmallDevCurve::synthetic(&eps, |e| 5.0 * e.powi(-2), 1_000_000_000);
        let fit = fit_rate(&curve, false, None).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-6, "{}", fit.a);
        assert!((fit.c - 5.0).abs() < 1e-5);
    }

    #[test]
    fn recovers_log_correction() {
        let eps = geometric_grid(0.05, 0.5, 10).unwrap();
        let curve = SmallDevCurve::synthetic(&eps, |e| (1.0 / e) * (1.0 / e).ln().powi(2), 1_000_000_000);
        let fit = fit_rate(&curve, true, None).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-6, "{}", fit.a);
        assert!((fit.beta.unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn narrow_window_rejected() {
        let eps = geometric_grid(0.3, 0.9, 10).unwrap();
        let curve = SmallDevCurve::synthetic(&eps, |e| e.powi(-2), 1_000_000);
        let err = fit_rate(&curve, false, Some((0.8, 0.9))).unwrap_err();
        assert!(matches!(err, Error::WindowTooNarrow { .. }));
    }
}
