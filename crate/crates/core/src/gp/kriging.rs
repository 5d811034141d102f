//! Universal kriging.
//!
//! The bordered system
//!
//! ```text
//! | K   F | | λ |   | k(x) |
//! | Fᵀ  0 | | μ | = | h(x) |
//! ```
//!
//! is factorized once per design through the Cholesky factor `L` of the
//! covariance matrix `K` (plus nugget) and the Cholesky factor `C` of the
//! Schur complement `Fᵀ K⁻¹ F`. With `a = L⁻¹ k(x)` and
//! `b = C⁻¹ (h(x) − (L⁻¹F)ᵀ a)` every quantity of interest is a dot product:
//! the kriging variance is `σ² − aᵀa + bᵀb` and the posterior covariance of
//! two points is `k(x, y) − a_xᵀ a_y + b_xᵀ b_y`.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use super::covariance::CovarianceSpec;
use super::design::{Design, Points, SEPARATION_TOLERANCE};
use super::trend::TrendSpec;
use crate::error::{Error, Result};

/// Nugget settings, relative to the process variance σ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub nugget: f64,
    /// Largest relative nugget tried when the factorization fails.
    pub max_nugget: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nugget: 1e-8,
            max_nugget: 1e-4,
        }
    }
}

impl FitOptions {
    pub fn exact() -> Self {
        Self {
            nugget: 0.0,
            max_nugget: 0.0,
        }
    }

    pub(crate) fn ladder(&self) -> Vec<f64> {
        let mut out = vec![self.nugget];
        let mut next = if self.nugget > 0.0 { self.nugget * 10.0 } else { 1e-8 };
        while next <= self.max_nugget * (1.0 + 1e-12) {
            out.push(next);
            next *= 10.0;
        }
        out
    }
}

/// Kriging mean and variance at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Whitened representation of a prediction point.
#[derive(Debug, Clone)]
pub(crate) struct Whitened {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

/// Kriging predictor fitted to a design. Immutable once built.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    design: Design,
    trend: TrendSpec,
    cov: CovarianceSpec,
    options: FitOptions,
    /// Absolute nugget actually added to the diagonal.
    nugget: f64,
    chol: DMatrix<f64>,
    f_white: DMatrix<f64>,
    schur_chol: DMatrix<f64>,
    beta: DVector<f64>,
    resid_white: DVector<f64>,
}

pub(crate) fn lower_solve(l: &DMatrix<f64>, rhs: &mut DVector<f64>) {
    let ok = l.solve_lower_triangular_mut(rhs);
    debug_assert!(ok);
}

fn upper_solve_transposed(l: &DMatrix<f64>, rhs: &mut DVector<f64>) {
    let ok = l.tr_solve_lower_triangular_mut(rhs);
    debug_assert!(ok);
}

fn bbox_string(points: &Points) -> String {
    points
        .bounding_box()
        .iter()
        .map(|(lo, hi)| format!("[{lo:.6}, {hi:.6}]"))
        .collect::<Vec<_>>()
        .join(" x ")
}

/// Cholesky factorization that also rejects numerically meaningless
/// pivots. Works column by column on the upper triangle so that every inner
/// product runs over contiguous memory, and returns the lower factor.
pub(crate) fn checked_cholesky(mut k: DMatrix<f64>, min_pivot_sq: f64) -> Option<DMatrix<f64>> {
    let n = k.nrows();
    let data = k.as_mut_slice();
    for j in 0..n {
        for i in 0..j {
            let (head, tail) = data.split_at_mut(j * n);
            let ui = &head[i * n..i * n + i];
            let uj = &tail[..i];
            let s = tail[i] - ui.iter().zip(uj).map(|(a, b)| a * b).sum::<f64>();
            tail[i] = s / head[i * n + i];
        }
        let col = &data[j * n..j * n + j];
        let d = data[j * n + j] - col.iter().map(|v| v * v).sum::<f64>();
        if !(d > min_pivot_sq) {
            return None;
        }
        data[j * n + j] = d.sqrt();
    }
    for j in 0..n {
        for i in j + 1..n {
            data[j * n + i] = 0.0;
        }
    }
    Some(k.transpose())
}

pub(crate) fn min_pivot_sq(nugget: f64, variance: f64, n: usize) -> f64 {
    (0.5 * nugget).max(100.0 * n as f64 * f64::EPSILON * variance)
}

impl KrigingModel {
    pub fn fit(design: Design, trend: TrendSpec, cov: CovarianceSpec, options: FitOptions) -> Result<Self> {
        let n = design.len();
        let l = trend.len();
        if design.dim() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                got: design.dim(),
            });
        }
        if n < l {
            return Err(Error::RankDeficientTrend { n, l });
        }
        let sigma2 = cov.variance();
        let pts = design.points();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = sigma2;
            for j in 0..i {
                let v = cov.eval(pts.row(i), pts.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }

        let mut factor = None;
        let mut tried = 0.0;
        for rel in options.ladder() {
            tried = rel * sigma2;
            let mut kk = k.clone();
            for i in 0..n {
                kk[(i, i)] += tried;
            }
            if let Some(chol) = checked_cholesky(kk, min_pivot_sq(tried, sigma2, n)) {
                if rel > options.nugget {
                    warn!("kriging factorization needed nugget {rel:e}·σ² for n = {n}");
                }
                factor = Some(chol);
                break;
            }
        }
        let chol = factor.ok_or_else(|| Error::Conditioning {
            n,
            nugget: tried,
            bbox: bbox_string(pts),
        })?;

        let mut f = DMatrix::zeros(n, l);
        let mut hbuf = vec![0.0; l];
        for i in 0..n {
            trend.eval_into(pts.row(i), &mut hbuf);
            for (j, h) in hbuf.iter().enumerate() {
                f[(i, j)] = *h;
            }
        }
        Self::assemble(design, trend, cov, options, tried, chol, f)
    }

    fn assemble(
        design: Design,
        trend: TrendSpec,
        cov: CovarianceSpec,
        options: FitOptions,
        nugget: f64,
        chol: DMatrix<f64>,
        f: DMatrix<f64>,
    ) -> Result<Self> {
        let n = design.len();
        let l = trend.len();
        let mut f_white = f;
        for j in 0..l {
            let mut col = f_white.column(j).clone_owned();
            lower_solve(&chol, &mut col);
            f_white.set_column(j, &col);
        }
        let schur = f_white.transpose() * &f_white;
        let scale = schur.diagonal().max().max(f64::MIN_POSITIVE);
        let schur_chol =
            checked_cholesky(schur, 1e-13 * scale).ok_or(Error::RankDeficientTrend { n, l })?;

        let mut z_white = DVector::from_column_slice(design.values());
        lower_solve(&chol, &mut z_white);
        let mut beta = f_white.transpose() * &z_white;
        lower_solve(&schur_chol, &mut beta);
        upper_solve_transposed(&schur_chol, &mut beta);
        let resid_white = &z_white - &f_white * &beta;

        Ok(Self {
            design,
            trend,
            cov,
            options,
            nugget,
            chol,
            f_white,
            schur_chol,
            beta,
            resid_white,
        })
    }

    /// Adds one observation. The Cholesky factor is extended by one row;
    /// when the new pivot is numerically unusable the model is refitted,
    /// which escalates the nugget.
    pub fn extend(&self, x: &[f64], z: f64) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !z.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("new observation"));
        }
        let tol = self.separation_tolerance();
        if let Some(i) = self.design.find_near(x, tol) {
            return Err(Error::CoincidentPoints {
                first: i,
                second: self.len(),
                tolerance: tol,
            });
        }
        let mut design = self.design.clone();
        design.push_unchecked(x, z);

        let n = self.len();
        let sigma2 = self.cov.variance();
        let mut row = self.cross_cov(x);
        lower_solve(&self.chol, &mut row);
        let pivot_sq = sigma2 + self.nugget - row.norm_squared();
        if !(pivot_sq > min_pivot_sq(self.nugget, sigma2, n + 1)) {
            debug!("extension pivot {pivot_sq:e} too small, refitting");
            return Self::fit(design, self.trend.clone(), self.cov.clone(), self.options);
        }
        let mut chol = self.chol.clone().insert_row(n, 0.0).insert_column(n, 0.0);
        for k in 0..n {
            chol[(n, k)] = row[k];
        }
        chol[(n, n)] = pivot_sq.sqrt();

        let l = self.trend.len();
        let mut f = DMatrix::zeros(n + 1, l);
        let mut hbuf = vec![0.0; l];
        for (i, p) in design.points().rows().enumerate() {
            self.trend.eval_into(p, &mut hbuf);
            for (j, h) in hbuf.iter().enumerate() {
                f[(i, j)] = *h;
            }
        }
        Self::assemble(design, self.trend.clone(), self.cov.clone(), self.options, self.nugget, chol, f)
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn trend(&self) -> &TrendSpec {
        &self.trend
    }

    pub fn covariance(&self) -> &CovarianceSpec {
        &self.cov
    }

    pub fn options(&self) -> FitOptions {
        self.options
    }

    /// Absolute nugget on the diagonal of the covariance matrix.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.design.dim()
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn separation_tolerance(&self) -> f64 {
        SEPARATION_TOLERANCE * self.design.points().diameter().max(1.0)
    }

    pub(crate) fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub(crate) fn f_white(&self) -> &DMatrix<f64> {
        &self.f_white
    }

    pub(crate) fn schur_chol(&self) -> &DMatrix<f64> {
        &self.schur_chol
    }

    pub(crate) fn resid_white(&self) -> &DVector<f64> {
        &self.resid_white
    }

    fn cross_cov(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.design.points().rows().map(|p| self.cov.eval(p, x)))
    }

    pub(crate) fn whiten(&self, x: &[f64]) -> Whitened {
        let mut a = self.cross_cov(x);
        lower_solve(&self.chol, &mut a);
        let mut b = DVector::from_vec(self.trend.eval(x)) - self.f_white.transpose() * &a;
        lower_solve(&self.schur_chol, &mut b);
        Whitened { a, b }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction point"));
        }
        Ok(())
    }

    pub(crate) fn mean_from(&self, x: &[f64], w: &Whitened) -> f64 {
        let h = DVector::from_vec(self.trend.eval(x));
        h.dot(&self.beta) + w.a.dot(&self.resid_white)
    }

    pub(crate) fn raw_variance_from(&self, w: &Whitened) -> f64 {
        self.cov.variance() - w.a.norm_squared() + w.b.norm_squared()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_point(x)?;
        let w = self.whiten(x);
        let raw = self.raw_variance_from(&w);
        if raw < -1e-8 * self.cov.variance() {
            debug!("clamping kriging variance {raw:e} to zero");
        }
        Ok(Prediction {
            mean: self.mean_from(x, &w),
            variance: raw.max(0.0),
        })
    }

    /// Kriging weights `λ(x)` and Lagrange multipliers `μ(x)` of the bordered system.
    pub fn weights(&self, x: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_point(x)?;
        let w = self.whiten(x);
        let mut cb = w.b.clone();
        upper_solve_transposed(&self.schur_chol, &mut cb);
        let mut lambda = &w.a + &self.f_white * &cb;
        upper_solve_transposed(&self.chol, &mut lambda);
        Ok((lambda, -cb))
    }

    /// Posterior covariance `k(x, y; x_n)`.
    pub fn posterior_covariance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let wx = self.whiten(x);
        let wy = self.whiten(y);
        Ok(self.cov.eval(x, y) - wx.a.dot(&wy.a) + wx.b.dot(&wy.b))
    }

    /// Posterior covariance matrix over a finite point set.
    pub fn posterior_covariance_matrix(&self, points: &Points) -> Result<DMatrix<f64>> {
        let ws = points
            .rows()
            .map(|p| {
                self.check_point(p)?;
                Ok(self.whiten(p))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = points.len();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = self.cov.eval(points.row(i), points.row(j)) - ws[i].a.dot(&ws[j].a)
                    + ws[i].b.dot(&ws[j].b);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Predictor for the design augmented with `x_new`, whose value is not
    /// yet known. See [`AugmentedPredictor`].
    pub fn augment(&self, x_new: &[f64]) -> Result<AugmentedPredictor<'_>> {
        self.check_point(x_new)?;
        let tol = self.separation_tolerance();
        if let Some(i) = self.design.find_near(x_new, tol) {
            return Err(Error::CoincidentPoints {
                first: i,
                second: self.len(),
                tolerance: tol,
            });
        }
        let w = self.whiten(x_new);
        let variance = self.raw_variance_from(&w);
        if !(variance > 0.0) {
            return Err(Error::CoincidentPoints {
                first: self.len(),
                second: self.len(),
                tolerance: tol,
            });
        }
        let (weights, _) = self.weights(x_new)?;
        Ok(AugmentedPredictor {
            model: self,
            x_new: x_new.to_vec(),
            mean: self.mean_from(x_new, &w),
            variance,
            weights,
            whitened: w,
        })
    }
}

/// Kriging predictor for `x_n ∪ {x_new}` before `z = f(x_new)` is observed.
///
/// Weights and variances do not depend on `z`; the mean at `y` is the
/// combination `Σ λ_i(y) z_i + λ_new(y) z`.
#[derive(Debug, Clone)]
pub struct AugmentedPredictor<'a> {
    model: &'a KrigingModel,
    x_new: Vec<f64>,
    mean: f64,
    variance: f64,
    weights: DVector<f64>,
    whitened: Whitened,
}

/// Weights and variance of the augmented predictor at a point.
#[derive(Debug, Clone)]
pub struct AugmentedWeights {
    /// Weights on the existing observations `z_1…z_n`.
    pub existing: DVector<f64>,
    /// Weight on the hypothetical observation at `x_new`.
    pub new: f64,
    pub variance: f64,
}

impl AugmentedPredictor<'_> {
    pub fn x_new(&self) -> &[f64] {
        &self.x_new
    }

    /// Current kriging mean at `x_new`.
    pub fn current_mean(&self) -> f64 {
        self.mean
    }

    /// Current kriging variance at `x_new`.
    pub fn current_variance(&self) -> f64 {
        self.variance
    }

    pub fn weights(&self, y: &[f64]) -> Result<AugmentedWeights> {
        self.model.check_point(y)?;
        let wy = self.model.whiten(y);
        let cov = self.model.cov.eval(y, &self.x_new) - wy.a.dot(&self.whitened.a)
            + wy.b.dot(&self.whitened.b);
        // The nugget enters the new diagonal entry, so the update divides by
        // the variance of the (jittered) observation rather than of ξ(x_new).
        let denom = self.variance + self.model.nugget;
        let new = cov / denom;
        let (lambda_y, _) = self.model.weights(y)?;
        let existing = lambda_y - &self.weights * new;
        let current = self.model.raw_variance_from(&wy);
        Ok(AugmentedWeights {
            existing,
            new,
            variance: (current - cov * cov / denom).max(0.0),
        })
    }

    /// Augmented mean at `y` given the hypothetical value `z` at `x_new`.
    pub fn mean(&self, y: &[f64], z: f64) -> Result<f64> {
        let w = self.weights(y)?;
        Ok(w.existing.dot(&DVector::from_column_slice(self.model.design.values())) + w.new * z)
    }

    pub fn variance(&self, y: &[f64]) -> Result<f64> {
        Ok(self.weights(y)?.variance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_1d() -> KrigingModel {
        let pts = Points::from_rows(&[[0.1], [0.45], [0.9]]).unwrap();
        let design = Design::new(pts, vec![0.3, -1.2, 0.8]).unwrap();
        let cov = CovarianceSpec::new(1.5, 2.0, vec![0.3]).unwrap();
        KrigingModel::fit(design, TrendSpec::constant(), cov, FitOptions::exact()).unwrap()
    }

    #[test]
    fn interpolates_design_points() {
        let m = model_1d();
        for (p, z) in m.design().points().rows().zip(m.design().values()) {
            let pred = m.predict(p).unwrap();
            assert!((pred.mean - z).abs() < 1e-8);
            assert!(pred.variance < 1e-8);
        }
    }

    #[test]
    fn single_point_ordinary_kriging_is_constant() {
        let design = Design::new(Points::from_rows(&[[0.2, 0.4]]).unwrap(), vec![3.25]).unwrap();
        let cov = CovarianceSpec::new(1.0, 1.5, vec![0.5, 0.5]).unwrap();
        let m = KrigingModel::fit(design, TrendSpec::constant(), cov, FitOptions::exact()).unwrap();
        for x in [[0.0, 0.0], [5.0, -3.0], [0.21, 0.4]] {
            assert!((m.predict(&x).unwrap().mean - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_one_with_constant_trend() {
        let m = model_1d();
        for x in [-0.5, 0.0, 0.3, 0.77, 2.0] {
            let (lambda, _) = m.weights(&[x]).unwrap();
            assert!((lambda.sum() - 1.0).abs() < 1e-10);
            let direct = m.predict(&[x]).unwrap().mean;
            let via_weights = lambda.dot(&DVector::from_column_slice(m.design().values()));
            assert!((direct - via_weights).abs() < 1e-10);
        }
    }

    #[test]
    fn posterior_covariance_diagonal_and_pinning() {
        let m = model_1d();
        let x = [0.3];
        let var = m.predict(&x).unwrap().variance;
        assert!((m.posterior_covariance(&x, &x).unwrap() - var).abs() < 1e-12);
        assert!(m.posterior_covariance(&[0.45], &[0.7]).unwrap().abs() < 1e-8);
        let a = m.posterior_covariance(&[0.2], &[0.6]).unwrap();
        let b = m.posterior_covariance(&[0.6], &[0.2]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn augmentation_rules() {
        let m = model_1d();
        let aug = m.augment(&[0.65]).unwrap();
        assert!(aug.variance(&[0.65]).unwrap() < 1e-10);
        for y in [0.0, 0.3, 0.6, 1.2] {
            assert!(aug.variance(&[y]).unwrap() <= m.predict(&[y]).unwrap().variance + 1e-10);
        }
        assert!(matches!(m.augment(&[0.45]), Err(Error::CoincidentPoints { .. })));
        let w1 = aug.weights(&[0.3]).unwrap();
        let w2 = aug.weights(&[0.3]).unwrap();
        assert_eq!(w1.existing, w2.existing);
        assert_eq!(w1.new.to_bits(), w2.new.to_bits());
    }

    #[test]
    fn extend_matches_refit() {
        let m = model_1d();
        let grown = m.extend(&[0.65], 0.1).unwrap();
        let mut design = m.design().clone();
        design.push_unchecked(&[0.65], 0.1);
        let refit = KrigingModel::fit(design, TrendSpec::constant(), m.covariance().clone(), m.options()).unwrap();
        for y in [0.0, 0.3, 0.6, 1.2] {
            let a = grown.predict(&[y]).unwrap();
            let b = refit.predict(&[y]).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-10);
            assert!((a.variance - b.variance).abs() < 1e-10);
        }
        assert!(m.extend(&[0.9], 1.0).is_err());
    }

    #[test]
    fn nugget_ladder() {
        let ladder = FitOptions::default().ladder();
        let expected = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4];
        assert_eq!(ladder.len(), expected.len());
        for (a, b) in ladder.iter().zip(expected) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
        assert_eq!(FitOptions::exact().ladder(), vec![0.0]);
    }

    #[test]
    fn too_few_points_for_trend() {
        let design = Design::new(Points::from_rows(&[[0.2, 0.4]]).unwrap(), vec![1.0]).unwrap();
        let cov = CovarianceSpec::new(1.0, 1.5, vec![0.5, 0.5]).unwrap();
        let res = KrigingModel::fit(design, TrendSpec::linear(2), cov, FitOptions::default());
        assert!(matches!(res, Err(Error::RankDeficientTrend { .. })));
    }
}
