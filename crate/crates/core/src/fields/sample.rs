use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::kernel::{gram, Kernel};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::rng::{stream_rng, streams};

/// Replicates per block. Each block has its own generator stream, so the
/// output does not depend on how blocks are scheduled across threads.
pub const BLOCK_REPS: usize = 2048;

/// Relative jitter levels tried after a failed factorization.
pub const JITTER_LEVELS: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Cholesky factor of the Gram matrix of a kernel on a fixed set of sites.
#[derive(Clone, Debug)]
pub struct FieldSampler {
    kernel: Kernel,
    points: PointCloud,
    factor: DMatrix<f64>,
    jitter_used: f64,
}

impl FieldSampler {
    pub fn new(kernel: Kernel, points: PointCloud) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("no sampling sites"));
        }
        let g = gram(&kernel, &points)?;
        let n = g.nrows();
        let max_diag = (0..n).map(|i| g[(i, i)]).fold(0.0f64, f64::max);
        if max_diag == 0.0 {
            // every site is degenerate (e.g. fBm at the origin): the field is 0
            return Ok(FieldSampler { kernel, points, factor: DMatrix::zeros(n, n), jitter_used: 0.0 });
        }
        // a pivot at rounding level means the matrix is singular in floating point
        let floor = n as f64 * f64::EPSILON * max_diag;
        let factorize = |m: DMatrix<f64>| {
            m.cholesky()
                .map(|c| c.l())
                .filter(|l| (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] * l[(i, i)] > floor))
        };
        let mut jitter_used = 0.0;
        let mut factor = factorize(g.clone());
        for eta in JITTER_LEVELS {
            if factor.is_some() {
                break;
            }
            let mut shifted = g.clone();
            for i in 0..n {
                shifted[(i, i)] += eta * max_diag;
            }
            factor = factorize(shifted);
            jitter_used = eta;
        }
        let factor = factor.ok_or(Error::NotPsd { max_jitter: JITTER_LEVELS[JITTER_LEVELS.len() - 1] })?;
        Ok(FieldSampler { kernel, points, factor, jitter_used })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn sites(&self) -> usize {
        self.points.len()
    }

    /// Relative jitter η that was added to the diagonal (0 if none).
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Lower-triangular factor L with L·Lᵀ = Gram (+ jitter).
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Block `b` of a run with `reps` replicates: a rows × sites matrix.
    pub fn block(&self, reps: usize, seed: u64, b: usize) -> DMatrix<f64> {
        let start = b * BLOCK_REPS;
        let rows = BLOCK_REPS.min(reps.saturating_sub(start));
        let n = self.sites();
        let mut rng = stream_rng(seed, streams::FIELD_BLOCKS + b as u64);
        let z: Vec<f64> = (0..rows * n).map(|_| rng.sample(StandardNormal)).collect();
        let z = DMatrix::from_row_slice(rows, n, &z);
        z * self.factor.transpose()
    }

    pub fn block_count(reps: usize) -> usize {
        reps.div_ceil(BLOCK_REPS)
    }

    /// Applies `f` to every block in parallel and returns the results in block order.
    pub fn map_blocks<T, F>(&self, reps: usize, seed: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&DMatrix<f64>) -> T + Sync,
    {
        if reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        Ok((0..Self::block_count(reps))
            .into_par_iter()
            .map(|b| f(&self.block(reps, seed, b)))
            .collect())
    }

    /// All replicates as one reps × sites matrix.
    pub fn sample(&self, reps: usize, seed: u64) -> Result<GaussianSampleBatch> {
        let blocks = self.map_blocks(reps, seed, |m| m.clone())?;
        let mut values = DMatrix::zeros(reps, self.sites());
        let mut row = 0;
        for block in blocks {
            values.rows_mut(row, block.nrows()).copy_from(&block);
            row += block.nrows();
        }
        Ok(GaussianSampleBatch {
            points: self.points.clone(),
            values,
            seed,
            jitter_used: self.jitter_used,
        })
    }
}

/// Independent joint draws of a Gaussian field at fixed sites.
#[derive(Clone, Debug)]
pub struct GaussianSampleBatch {
    pub points: PointCloud,
    /// reps × sites.
    pub values: DMatrix<f64>,
    pub seed: u64,
    pub jitter_used: f64,
}

impl GaussianSampleBatch {
    pub fn reps(&self) -> usize {
        self.values.nrows()
    }

    /// Empirical covariance of the sites (mean known to be zero).
    pub fn empirical_covariance(&self) -> DMatrix<f64> {
        self.values.transpose() * &self.values / self.reps() as f64
    }

    /// Writes `rep,site_index,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rep", "site_index", "value"])?;
        for rep in 0..self.reps() {
            for site in 0..self.values.ncols() {
                w.write_record([
                    rep.to_string(),
                    site.to_string(),
                    crate::format::sig17(self.values[(rep, site)]),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

/// Draws `reps` joint samples of `kernel` at `points`.
pub fn sample(kernel: &Kernel, points: &PointCloud, reps: usize, seed: u64) -> Result<GaussianSampleBatch> {
    if reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    FieldSampler::new(*kernel, points.clone())?.sample(reps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_at_one() {
        let bm = Kernel::fbm(0.5).unwrap();
        let batch = sample(&bm, &PointCloud::from_line(&[1.0]).unwrap(), 100_000, 7).unwrap();
        let var = batch.values.iter().map(|x| x * x).sum::<f64>() / batch.reps() as f64;
        assert!((0.98..=1.02).contains(&var), "{var}");
        assert_eq!(batch.jitter_used, 0.0);
    }

    #[test]
    fn duplicate_sites_engage_jitter() {
        let bm = Kernel::fbm(0.5).unwrap();
        let batch = sample(&bm, &PointCloud::from_line(&[0.5, 0.5]).unwrap(), 500, 3).unwrap();
        assert!(batch.jitter_used > 0.0);
        for rep in 0..batch.reps() {
            assert!((batch.values[(rep, 0)] - batch.values[(rep, 1)]).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_reps_rejected() {
        let bm = Kernel::fbm(0.5).unwrap();
        assert!(sample(&bm, &PointCloud::from_line(&[1.0]).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let k = Kernel::fbm(0.3).unwrap();
        let pts = PointCloud::from_line(&[0.1, 0.4, 0.9]).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample(&k, &pts, 5000, 11).unwrap());
        let b = four.install(|| sample(&k, &pts, 5000, 11).unwrap());
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn csv_dump() {
        let bm = Kernel::fbm(0.5).unwrap();
        let batch = sample(&bm, &PointCloud::from_line(&[0.5, 1.0]).unwrap(), 2, 1).unwrap();
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("rep,site_index,value\n0,0,"));
    }
}
