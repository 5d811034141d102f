//! Unconditional Gaussian process sample paths on a finite point set.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::covariance::CovarianceSpec;
use super::design::Points;
use super::kriging::checked_cholesky;
use crate::error::{Error, Result};

/// Zero-mean sample paths evaluated jointly on `points`; `values[p][i]` is
/// path `p` at point `i`.
#[derive(Debug, Clone)]
pub struct GpPathSet {
    pub points: Points,
    pub values: Vec<Vec<f64>>,
    /// Relative jitter that was needed to factor the covariance matrix.
    pub jitter: f64,
}

/// Draws `count` paths of a zero-mean process with covariance `cov` at
/// `points`, deterministically from `seed`.
pub fn simulate_paths(cov: &CovarianceSpec, points: &Points, count: usize, seed: u64) -> Result<GpPathSet> {
    if points.dim() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            got: points.dim(),
        });
    }
    let n = points.len();
    let sigma2 = cov.variance();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = cov.eval(points.row(i), points.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let mut chol = None;
    let mut used = 0.0;
    for jitter in [0.0, 1e-12, 1e-10, 1e-8, 1e-6] {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter * sigma2;
        }
        if let Some(l) = checked_cholesky(kj, 0.0) {
            chol = Some(l);
            used = jitter;
            break;
        }
    }
    let chol = chol.ok_or_else(|| Error::Conditioning {
        n,
        nugget: 1e-6 * sigma2,
        bbox: format!("{:?}", points.bounding_box()),
    })?;
    if used > 0.0 {
        warn!("path simulation needed relative jitter {used:e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count)
        .map(|_| {
            let e = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            (&chol * e).as_slice().to_vec()
        })
        .collect();
    Ok(GpPathSet {
        points: points.clone(),
        values,
        jitter: used,
    })
}
