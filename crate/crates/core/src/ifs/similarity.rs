use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-12;

/// `t ↦ scale · rotation · t + shift` with an orthogonal `rotation`.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    scale: f64,
    rotation: DMatrix<f64>,
    shift: DVector<f64>,
}

impl Similarity {
    pub fn new(scale: f64, rotation: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let n = shift.len();
        if n == 0 {
            return Err(Error::invalid("similarity needs a positive dimension"));
        }
        if rotation.nrows() != n || rotation.ncols() != n {
            return Err(Error::invalid(format!(
                "rotation is {}x{}, expected {n}x{n}",
                rotation.nrows(),
                rotation.ncols()
            )));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::invalid(format!("scale {scale} outside (0, 1]")));
        }
        let gram = rotation.transpose() * &rotation;
        let err = (gram - DMatrix::identity(n, n)).amax();
        if !(err <= ORTHO_TOL) {
            return Err(Error::invalid(format!(
                "rotation is not orthogonal (max |RᵀR - I| = {err:e})"
            )));
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("shift must be finite"));
        }
        Ok(Similarity { scale, rotation, shift })
    }

    /// Pure scaling plus translation.
    pub fn scaled(scale: f64, shift: &[f64]) -> Result<Self> {
        let n = shift.len();
        Self::new(scale, DMatrix::identity(n, n), DVector::from_column_slice(shift))
    }

    pub fn identity(dim: usize) -> Self {
        Similarity {
            scale: 1.0,
            rotation: DMatrix::identity(dim, dim),
            shift: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(t, &mut out);
        out
    }

    pub fn apply_into(&self, t: &[f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(t.len(), n);
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let acc: f64 = t.iter().enumerate().map(|(j, x)| self.rotation[(i, j)] * x).sum();
            *o = self.scale * acc + self.shift[i];
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            scale: self.scale * inner.scale,
            rotation: &self.rotation * &inner.rotation,
            shift: (&self.rotation * &inner.shift) * self.scale + &self.shift,
        }
    }

    /// The unique fixed point of a contraction.
    pub fn fixed_point(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let a = DMatrix::identity(n, n) - &self.rotation * self.scale;
        a.lu()
            .solve(&self.shift)
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::invalid("similarity has no unique fixed point"))
    }
}
