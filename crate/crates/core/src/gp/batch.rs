//! Predictions over a fixed point set, updated incrementally as the design grows.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::design::Points;
use super::kriging::KrigingModel;
use crate::error::{Error, Result};

/// Kriging means, variances and whitened cross-covariances for a fixed set
/// of prediction points (typically the Monte Carlo sample).
///
/// Holds `A = L⁻¹ K(X, Y)` and `B = C⁻¹ (H(Y) − (L⁻¹F)ᵀ A)` column by column,
/// so posterior covariances between any two points of the set cost one
/// covariance evaluation and two dot products.
#[derive(Debug, Clone)]
pub struct BatchPredictor {
    points: Points,
    a: DMatrix<f64>,
    /// `(L⁻¹F)ᵀ A`, kept to update `b` cheaply.
    fa: DMatrix<f64>,
    h: DMatrix<f64>,
    b: DMatrix<f64>,
    mean: Vec<f64>,
    variance: Vec<f64>,
    n: usize,
    nugget: f64,
    cov_theta: Vec<f64>,
    /// Prior covariances between pairs of set points, reused across steps
    /// while the covariance parameters stay the same.
    prior_cache: RefCell<HashMap<u64, f64>>,
}

/// Entries kept in the prior cache before it is flushed.
const CACHE_LIMIT: usize = 1 << 22;

impl BatchPredictor {
    pub fn new(model: &KrigingModel, points: Points) -> Result<Self> {
        if points.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: points.dim(),
            });
        }
        let n = model.len();
        let m = points.len();
        let l = model.trend().len();
        let cov = model.covariance();
        let design_pts = model.design().points();
        let mut a = DMatrix::zeros(n, m);
        for (j, y) in points.rows().enumerate() {
            let mut col = a.column_mut(j);
            for (i, x) in design_pts.rows().enumerate() {
                col[i] = cov.eval(x, y);
            }
        }
        model.chol().solve_lower_triangular_mut(&mut a);
        let mut h = DMatrix::zeros(l, m);
        let mut hbuf = vec![0.0; l];
        for (j, y) in points.rows().enumerate() {
            model.trend().eval_into(y, &mut hbuf);
            h.column_mut(j).copy_from_slice(&hbuf);
        }
        let fa = model.f_white().transpose() * &a;
        let mut out = Self {
            points,
            a,
            fa,
            h,
            b: DMatrix::zeros(l, m),
            mean: vec![0.0; m],
            variance: vec![0.0; m],
            n,
            nugget: model.nugget(),
            cov_theta: cov.to_theta(),
            prior_cache: RefCell::new(HashMap::new()),
        };
        out.refresh(model);
        Ok(out)
    }

    fn refresh(&mut self, model: &KrigingModel) {
        self.b = &self.h - &self.fa;
        model.schur_chol().solve_lower_triangular_mut(&mut self.b);
        let sigma2 = model.covariance().variance();
        let beta = model.beta();
        let resid = model.resid_white();
        for j in 0..self.points.len() {
            let aj = self.a.column(j);
            let bj = self.b.column(j);
            self.mean[j] = self.h.column(j).dot(beta) + aj.dot(resid);
            self.variance[j] = (sigma2 - aj.norm_squared() + bj.norm_squared()).max(0.0);
        }
    }

    /// Brings the cache in line with `model`. When `model` is the previous
    /// model extended by exactly one observation only one row of `A` is
    /// computed; otherwise everything is rebuilt.
    pub fn update(&mut self, model: &KrigingModel) -> Result<()> {
        let n = model.len();
        let incremental = n == self.n + 1
            && model.nugget() == self.nugget
            && model.covariance().to_theta() == self.cov_theta;
        if !incremental {
            *self = Self::new(model, self.points.clone())?;
            return Ok(());
        }
        let chol = model.chol();
        let x_new = model.design().points().row(n - 1);
        let cov = model.covariance();
        let pivot = chol[(n - 1, n - 1)];
        let lrow = DVector::from_iterator(n - 1, (0..n - 1).map(|k| chol[(n - 1, k)]));
        let mut new_row = DVector::zeros(self.points.len());
        for (j, y) in self.points.rows().enumerate() {
            let aj = self.a.column(j);
            new_row[j] = (cov.eval(x_new, y) - lrow.dot(&aj)) / pivot;
        }
        let a = std::mem::replace(&mut self.a, DMatrix::zeros(0, 0));
        let mut a = a.insert_row(n - 1, 0.0);
        a.row_mut(n - 1).copy_from(&new_row.transpose());
        self.a = a;
        // The whitened trend matrix gained a row; its product with A gains
        // the corresponding rank-one term.
        let f_new = model.f_white().row(n - 1).transpose();
        self.fa += &f_new * new_row.transpose();
        self.n = n;
        self.refresh(model);
        Ok(())
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// Posterior covariance between points `i` and `j` of the set.
    pub fn covariance(&self, model: &KrigingModel, i: usize, j: usize) -> f64 {
        model.covariance().eval(self.points.row(i), self.points.row(j))
            - self.a.column(i).dot(&self.a.column(j))
            + self.b.column(i).dot(&self.b.column(j))
    }

    /// Posterior covariance block `k_n(Y_rows, Y_cols)`.
    pub fn covariance_block(&self, model: &KrigingModel, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let gather = |mat: &DMatrix<f64>, idx: &[usize]| {
            DMatrix::from_fn(mat.nrows(), idx.len(), |r, c| mat[(r, idx[c])])
        };
        let ar = gather(&self.a, rows);
        let br = gather(&self.b, rows);
        let (ac, bc) = if rows == cols {
            (ar.clone(), br.clone())
        } else {
            (gather(&self.a, cols), gather(&self.b, cols))
        };
        let mut out = br.transpose() * bc - ar.transpose() * ac;
        let cov = model.covariance();
        let mut cache = self.prior_cache.borrow_mut();
        if cache.len() > CACHE_LIMIT {
            cache.clear();
        }
        for (c, &jc) in cols.iter().enumerate() {
            let yc = self.points.row(jc);
            for (r, &jr) in rows.iter().enumerate() {
                let key = if jr < jc { (jr as u64) << 32 | jc as u64 } else { (jc as u64) << 32 | jr as u64 };
                out[(r, c)] += *cache.entry(key).or_insert_with(|| cov.eval(self.points.row(jr), yc));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{CovarianceSpec, Design, FitOptions, TrendSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn incremental_update_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rows: Vec<[f64; 2]> = (0..6).map(|_| [rng.gen(), rng.gen()]).collect();
        let values: Vec<f64> = rows.iter().map(|r| (3.0 * r[0]).sin() + r[1]).collect();
        let cov = CovarianceSpec::new(2.0, 2.0, vec![0.3, 0.6]).unwrap();
        let trend = TrendSpec::linear(2);
        let design = Design::new(Points::from_rows(&rows).unwrap(), values).unwrap();
        let mut model = KrigingModel::fit(design, trend, cov, FitOptions::default()).unwrap();
        let sample: Vec<[f64; 2]> = (0..40).map(|_| [rng.gen(), rng.gen()]).collect();
        let sample = Points::from_rows(&sample).unwrap();
        let mut batch = BatchPredictor::new(&model, sample.clone()).unwrap();
        for step in 0..4 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            rows.push(x);
            model = model.extend(&x, step as f64 * 0.3 - 0.2).unwrap();
            batch.update(&model).unwrap();
        }
        let fresh = BatchPredictor::new(&model, sample.clone()).unwrap();
        for j in 0..sample.len() {
            let p = model.predict(sample.row(j)).unwrap();
            assert!((batch.mean()[j] - fresh.mean()[j]).abs() < 1e-9);
            assert!((batch.variance()[j] - fresh.variance()[j]).abs() < 1e-9);
            assert!((batch.mean()[j] - p.mean).abs() < 1e-9);
            assert!((batch.variance()[j] - p.variance).abs() < 1e-9);
        }
        let idx = [0, 5, 17];
        let block = batch.covariance_block(&model, &idx, &[3, 5]);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in [3usize, 5].iter().enumerate() {
                let direct = model.posterior_covariance(sample.row(i), sample.row(j)).unwrap();
                assert!((block[(r, c)] - direct).abs() < 1e-9);
                assert!((batch.covariance(&model, i, j) - direct).abs() < 1e-9);
            }
        }
    }
}
