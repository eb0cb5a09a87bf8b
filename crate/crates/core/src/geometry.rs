//! Point clouds, weighted point sets and axis-aligned boxes in ℝᴺ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A finite set of points in ℝᴺ stored as one flat coordinate buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        PointCloud { dim, coords: Vec::new() }
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::invalid(format!(
                    "point of dimension {} in a cloud of dimension {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Points of a one-dimensional cloud.
    pub fn from_line(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec())
    }

    /// Regular grid with `per_axis` points per axis on `[0,1]ᴺ`, endpoints included.
    pub fn unit_grid(dim: usize, per_axis: usize) -> Self {
        assert!(per_axis >= 2);
        let step = 1.0 / (per_axis - 1) as f64;
        let total = per_axis.pow(dim as u32);
        let mut coords = Vec::with_capacity(total * dim);
        for mut idx in 0..total {
            for _ in 0..dim {
                coords.push((idx % per_axis) as f64 * step);
                idx /= per_axis;
            }
        }
        PointCloud { dim, coords }
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    /// Largest pairwise distance (O(n²); O(n) on the line).
    pub fn diameter(&self) -> f64 {
        if self.dim == 1 {
            let (lo, hi) = self
                .coords
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            return if self.is_empty() { 0.0 } else { hi - lo };
        }
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.max(dist(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Smallest axis-aligned box containing the cloud.
    pub fn bounding_box(&self) -> Option<AaBox> {
        if self.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some(AaBox { lo, hi })
    }
}

/// Points carrying probability masses; the discrete stand-in for a measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoints {
    pub points: PointCloud,
    pub masses: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: PointCloud, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::invalid(format!(
                "{} points but {} masses",
                points.len(),
                masses.len()
            )));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::invalid("masses must be finite and non-negative"));
        }
        Ok(WeightedPoints { points, masses })
    }

    /// Equal masses `1/len` on every point.
    pub fn uniform(points: PointCloud) -> Self {
        let n = points.len();
        let masses = vec![1.0 / n as f64; n];
        WeightedPoints { points, masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// One-dimensional atoms sorted by position, as `(position, mass)` pairs.
    pub fn sorted_atoms(&self) -> Result<Vec<(f64, f64)>> {
        if self.points.dim() != 1 {
            return Err(Error::invalid("atoms on the line require dimension 1"));
        }
        let mut atoms: Vec<(f64, f64)> = self
            .points
            .flat()
            .iter()
            .copied()
            .zip(self.masses.iter().copied())
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(atoms)
    }
}

/// Closed axis-aligned box `[lo, hi]` in ℝᴺ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AaBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("box corners must have equal, positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::invalid("box requires finite lo <= hi on every axis"));
        }
        Ok(AaBox { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        AaBox { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diameter(&self) -> f64 {
        dist(&self.lo, &self.hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// All 2ᴺ corners.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *x >= a - tol && *x <= b + tol)
    }

    /// Whether the interiors of two boxes intersect by more than `tol` on every axis.
    pub fn interiors_overlap(&self, other: &AaBox, tol: f64) -> bool {
        (0..self.dim()).all(|k| {
            let lo = self.lo[k].max(other.lo[k]);
            let hi = self.hi[k].min(other.hi[k]);
            hi - lo > tol
        })
    }

    /// Smallest cube sharing this box's lower corner and containing it.
    pub fn enclosing_cube(&self) -> AaBox {
        let side = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(0.0f64, f64::max);
        let side = if side > 0.0 { side } else { 1.0 };
        AaBox {
            lo: self.lo.clone(),
            hi: self.lo.iter().map(|a| a + side).collect(),
        }
    }
}
