use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothness H, integrability q (possibly ∞) and ambient dimension N, with
/// the aggregation exponent r given by 1/r = H/N + 1/q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedParams {
    h: f64,
    #[serde(with = "crate::format::q_serde")]
    q: f64,
    dim: usize,
    r: f64,
}

impl MixedParams {
    pub fn new(h: f64, q: f64, dim: usize) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid(format!("H = {h} outside (0, 1]")));
        }
        if !(q >= 1.0) {
            return Err(Error::invalid(format!("q = {q} must be at least 1 (or inf)")));
        }
        if dim == 0 {
            return Err(Error::invalid("N must be positive"));
        }
        Ok(MixedParams { h, q, dim, r: Self::aggregation_exponent(h, q, dim) })
    }

    fn aggregation_exponent(h: f64, q: f64, dim: usize) -> f64 {
        1.0 / (h / dim as f64 + crate::ifs::inv_q(q))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// 1/q, zero for q = ∞.
    pub fn inv_q(&self) -> f64 {
        crate::ifs::inv_q(self.q)
    }

    /// Checks the stored r against a recomputation and the bounds r ≤ q, r ≤ N/H.
    pub fn is_consistent(&self) -> bool {
        let r = Self::aggregation_exponent(self.h, self.q, self.dim);
        (r - self.r).abs() <= 1e-14 * r.max(1.0)
            && self.r <= self.q * (1.0 + 1e-15)
            && self.r <= self.dim as f64 / self.h * (1.0 + 1e-15)
    }
}

/// J(A) = diam(A)^H · μ(A)^{1/q}; for q = ∞ the mass factor is the indicator μ(A) > 0.
pub fn j_functional(diameter: f64, mass: f64, params: &MixedParams) -> f64 {
    if diameter <= 0.0 || mass <= 0.0 {
        return 0.0;
    }
    let geometric = diameter.powf(params.h());
    if params.q().is_infinite() {
        geometric
    } else {
        geometric * mass.powf(params.inv_q())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_for_line_and_plane() {
        let p = MixedParams::new(0.5, 2.0, 1).unwrap();
        assert!((p.r() - 1.0).abs() < 1e-15);
        let p = MixedParams::new(0.5, 2.0, 2).unwrap();
        assert!((p.r() - 4.0 / 3.0).abs() < 1e-15);
        let p = MixedParams::new(0.5, f64::INFINITY, 2).unwrap();
        assert!((p.r() - 4.0).abs() < 1e-15);
        assert!(p.is_consistent());
    }

    #[test]
    fn j_examples() {
        let p = MixedParams::new(0.5, 2.0, 1).unwrap();
        assert_eq!(j_functional(1.0, 1.0, &p), 1.0);
        assert_eq!(j_functional(0.0, 0.3, &p), 0.0);
        for level in 1..6 {
            let j = j_functional(3f64.powi(-level), 2f64.powi(-level), &p);
            assert!((j - 6f64.powf(-level as f64 / 2.0)).abs() < 1e-15);
        }
        let inf = MixedParams::new(0.5, f64::INFINITY, 1).unwrap();
        assert_eq!(j_functional(0.25, 1e-9, &inf), 0.5);
        assert_eq!(j_functional(0.25, 0.0, &inf), 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(MixedParams::new(0.0, 2.0, 1).is_err());
        assert!(MixedParams::new(0.5, 0.5, 1).is_err());
        assert!(MixedParams::new(0.5, 2.0, 0).is_err());
    }
}
