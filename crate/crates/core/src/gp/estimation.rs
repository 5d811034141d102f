//! Maximum (restricted) likelihood estimation of Matérn parameters.
//!
//! The variance is profiled out in closed form; the remaining parameters
//! (the log-ranges, and optionally the log-smoothness) are searched with a
//! Nelder–Mead simplex restarted from a few fixed perturbations of the
//! initial guess.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::covariance::{CovarianceSpec, Matern};
use super::design::Design;
use super::kriging::{checked_cholesky, lower_solve, min_pivot_sq};
use super::trend::TrendSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodMode {
    Ml,
    /// Likelihood of the trend-orthogonal contrasts.
    #[default]
    Reml,
}

#[derive(Debug, Clone)]
pub struct EstimationOptions {
    pub mode: LikelihoodMode,
    pub estimate_smoothness: bool,
    /// Number of simplex searches; the first starts at the initial guess.
    pub starts: usize,
    /// Iteration cap of each simplex search.
    pub max_iters: u64,
    /// Per-axis domain widths used for the range bounds. Defaults to the
    /// design's bounding box.
    pub widths: Option<Vec<f64>>,
    /// Relative nugget added to the correlation matrix.
    pub nugget: f64,
    pub seed: u64,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            mode: LikelihoodMode::Reml,
            estimate_smoothness: false,
            starts: 5,
            max_iters: 300,
            widths: None,
            nugget: 1e-8,
            seed: 0,
        }
    }
}

/// Bounds on the smoothness when it is estimated.
const SMOOTHNESS_BOUNDS: (f64, f64) = (0.25, 10.0);
/// Bounds on each range, as multiples of the domain width along that axis.
const RANGE_BOUNDS: (f64, f64) = (1e-3, 10.0);
const INFEASIBLE: f64 = 1e100;

#[derive(Debug, Clone)]
pub struct EstimationOutcome {
    pub spec: CovarianceSpec,
    /// Log-likelihood at `spec`.
    pub log_likelihood: f64,
    /// Log-likelihood at the initial guess.
    pub initial_log_likelihood: f64,
    /// Set when no start improved on the initial guess.
    pub warning: Option<String>,
}

/// Pairwise squared coordinate differences and the linear-algebra pieces
/// shared by all likelihood evaluations on a design.
struct Workspace<'a> {
    design: &'a Design,
    f: DMatrix<f64>,
    log_det_ftf: f64,
    sq_diffs: Vec<f64>,
    mode: LikelihoodMode,
    nugget: f64,
}

struct Profile {
    /// Log-likelihood with the variance profiled out.
    value: f64,
    variance: f64,
}

/// Pieces of the likelihood that do not depend on the variance.
struct Fit {
    log_det_r: f64,
    log_det_m: f64,
    quad: f64,
}

impl<'a> Workspace<'a> {
    fn new(design: &'a Design, trend: &TrendSpec, mode: LikelihoodMode, nugget: f64) -> Result<Self> {
        let n = design.len();
        let l = trend.len();
        let dim = design.dim();
        let pts = design.points();
        if n < l + usize::from(mode == LikelihoodMode::Reml) {
            return Err(Error::RankDeficientTrend { n, l });
        }
        let mut f = DMatrix::zeros(n, l);
        for (i, p) in pts.rows().enumerate() {
            for (j, b) in trend.basis().iter().enumerate() {
                f[(i, j)] = b.eval(p);
            }
        }
        let ftf = f.transpose() * &f;
        let scale = ftf.diagonal().max().max(f64::MIN_POSITIVE);
        let ftf_chol = checked_cholesky(ftf, 1e-13 * scale).ok_or(Error::RankDeficientTrend { n, l })?;
        let log_det_ftf = 2.0 * ftf_chol.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let mut sq_diffs = Vec::with_capacity(n * (n - 1) / 2 * dim);
        for i in 0..n {
            for j in 0..i {
                for k in 0..dim {
                    let d = pts.row(i)[k] - pts.row(j)[k];
                    sq_diffs.push(d * d);
                }
            }
        }
        Ok(Self {
            design,
            f,
            log_det_ftf,
            sq_diffs,
            mode,
            nugget,
        })
    }

    fn dof(&self) -> f64 {
        match self.mode {
            LikelihoodMode::Ml => self.design.len() as f64,
            LikelihoodMode::Reml => (self.design.len() - self.f.ncols()) as f64,
        }
    }

    fn fit(&self, smoothness: f64, ranges: &[f64]) -> Option<Fit> {
        let n = self.design.len();
        let dim = self.design.dim();
        let matern = Matern::new(smoothness);
        let inv_sq: Vec<f64> = ranges.iter().map(|r| 1.0 / (r * r)).collect();
        let mut r = DMatrix::zeros(n, n);
        let mut pair = self.sq_diffs.chunks_exact(dim);
        for i in 0..n {
            r[(i, i)] = 1.0 + self.nugget;
            for j in 0..i {
                let d = pair.next()?;
                let h = d.iter().zip(&inv_sq).map(|(a, b)| a * b).sum::<f64>().sqrt();
                let v = matern.correlation(h);
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        let chol = checked_cholesky(r, min_pivot_sq(self.nugget, 1.0, n))?;
        let log_det_r = 2.0 * chol.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let mut f_white = self.f.clone();
        chol.solve_lower_triangular_mut(&mut f_white);
        let mut z_white = DVector::from_column_slice(self.design.values());
        lower_solve(&chol, &mut z_white);
        let m = f_white.transpose() * &f_white;
        let scale = m.diagonal().max().max(f64::MIN_POSITIVE);
        let m_chol = checked_cholesky(m, 1e-14 * scale)?;
        let log_det_m = 2.0 * m_chol.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let mut coef = f_white.transpose() * &z_white;
        lower_solve(&m_chol, &mut coef);
        // ‖z_w‖² − ‖C⁻¹ F_wᵀ z_w‖² is the generalized residual sum of squares.
        let quad = (z_white.norm_squared() - coef.norm_squared()).max(0.0);
        Some(Fit {
            log_det_r,
            log_det_m,
            quad,
        })
    }

    fn log_lik(&self, fit: &Fit, variance: f64) -> f64 {
        let dof = self.dof();
        let mut two_nll = dof * (2.0 * PI * variance).ln() + fit.log_det_r + fit.quad / variance;
        if self.mode == LikelihoodMode::Reml {
            two_nll += fit.log_det_m - self.log_det_ftf;
        }
        -0.5 * two_nll
    }

    fn profile(&self, smoothness: f64, ranges: &[f64]) -> Option<Profile> {
        let fit = self.fit(smoothness, ranges)?;
        let variance = (fit.quad / self.dof()).max(1e-300);
        Some(Profile {
            value: self.log_lik(&fit, variance),
            variance,
        })
    }
}

/// Log-likelihood (or restricted log-likelihood) of the design's values under `spec`.
pub fn log_likelihood(
    design: &Design,
    trend: &TrendSpec,
    spec: &CovarianceSpec,
    mode: LikelihoodMode,
    nugget: f64,
) -> Result<f64> {
    let ws = Workspace::new(design, trend, mode, nugget)?;
    let fit = ws.fit(spec.smoothness(), spec.ranges()).ok_or_else(|| Error::Conditioning {
        n: design.len(),
        nugget,
        bbox: format!("{:?}", design.points().bounding_box()),
    })?;
    Ok(ws.log_lik(&fit, spec.variance()))
}

/// Search space: optional log-smoothness followed by −log ρ_i.
#[derive(Clone)]
struct Problem<'w, 'a> {
    ws: &'w Workspace<'a>,
    fixed_smoothness: Option<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Problem<'_, '_> {
    fn clamp(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect()
    }

    fn decode(&self, p: &[f64]) -> (f64, Vec<f64>) {
        match self.fixed_smoothness {
            Some(nu) => (nu, p.iter().map(|t| (-t).exp()).collect()),
            None => (p[0].exp(), p[1..].iter().map(|t| (-t).exp()).collect()),
        }
    }

    fn encode(&self, spec: &CovarianceSpec) -> Vec<f64> {
        let mut p = Vec::new();
        if self.fixed_smoothness.is_none() {
            p.push(spec.smoothness().ln());
        }
        p.extend(spec.ranges().iter().map(|r| -r.ln()));
        p
    }
}

impl CostFunction for Problem<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let inside = self.clamp(p);
        let penalty: f64 = p.iter().zip(&inside).map(|(a, b)| (a - b) * (a - b)).sum();
        let (nu, ranges) = self.decode(&inside);
        Ok(match self.ws.profile(nu, &ranges) {
            Some(prof) if prof.value.is_finite() => -prof.value + 1e3 * penalty,
            _ => INFEASIBLE,
        })
    }
}

/// Maximizes the (restricted) likelihood over the covariance parameters,
/// starting from `init`. Deterministic given `options.seed`; the returned
/// parameters are never worse in likelihood than `init`.
pub fn estimate_params(
    design: &Design,
    trend: &TrendSpec,
    init: &CovarianceSpec,
    options: &EstimationOptions,
) -> Result<EstimationOutcome> {
    let dim = design.dim();
    if init.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: init.dim(),
        });
    }
    if design.len() < trend.len() + 2 {
        return Err(Error::InvalidArgument(format!(
            "estimation needs at least {} points, got {}",
            trend.len() + 2,
            design.len()
        )));
    }
    let ws = Workspace::new(design, trend, options.mode, options.nugget)?;
    let widths: Vec<f64> = match &options.widths {
        Some(w) if w.len() == dim => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: w.len(),
            })
        }
        None => design
            .points()
            .bounding_box()
            .iter()
            .map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect(),
    };
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    if options.estimate_smoothness {
        lower.push(SMOOTHNESS_BOUNDS.0.ln());
        upper.push(SMOOTHNESS_BOUNDS.1.ln());
    }
    for w in &widths {
        lower.push(-(RANGE_BOUNDS.1 * w).ln());
        upper.push(-(RANGE_BOUNDS.0 * w).ln());
    }
    let problem = Problem {
        ws: &ws,
        fixed_smoothness: (!options.estimate_smoothness).then(|| init.smoothness()),
        lower,
        upper,
    };

    let initial_log_likelihood = ws
        .fit(init.smoothness(), init.ranges())
        .map(|fit| ws.log_lik(&fit, init.variance()))
        .unwrap_or(f64::NEG_INFINITY);

    let origin = problem.clamp(&problem.encode(init));
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut starts = vec![origin.clone()];
    for _ in 1..options.starts.max(1) {
        let p: Vec<f64> = origin.iter().map(|v| v + rng.gen_range(-1.5..1.5)).collect();
        starts.push(problem.clamp(&p));
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let mut simplex = vec![start.clone()];
        for k in 0..start.len() {
            let mut v = start.clone();
            v[k] += if v[k] + 0.7 <= problem.upper[k] { 0.7 } else { -0.7 };
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-7)
            .expect("tolerance is non-negative");
        let run = Executor::new(problem.clone(), solver)
            .configure(|s| s.max_iters(options.max_iters))
            .run();
        let (param, cost) = match run {
            Ok(res) => {
                let state = res.state();
                match state.best_param.clone() {
                    Some(p) => (p, state.best_cost),
                    None => continue,
                }
            }
            Err(e) => {
                debug!("simplex search failed: {e}");
                continue;
            }
        };
        if cost < INFEASIBLE && best.as_ref().map_or(true, |(_, c)| cost < *c) {
            best = Some((problem.clamp(&param), cost));
        }
    }

    let improved = best.and_then(|(p, _)| {
        let (nu, ranges) = problem.decode(&p);
        let prof = ws.profile(nu, &ranges)?;
        (prof.value >= initial_log_likelihood)
            .then(|| CovarianceSpec::new(prof.variance, nu, ranges).ok().map(|s| (s, prof.value)))
            .flatten()
    });
    Ok(match improved {
        Some((spec, value)) => EstimationOutcome {
            spec,
            log_likelihood: value,
            initial_log_likelihood,
            warning: None,
        },
        None => {
            let msg = "likelihood search did not improve on the initial parameters".to_string();
            warn!("{msg}");
            EstimationOutcome {
                spec: init.clone(),
                log_likelihood: initial_log_likelihood,
                initial_log_likelihood,
                warning: Some(msg),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Points;

    fn toy_design() -> Design {
        let xs: Vec<[f64; 1]> = (0..12).map(|i| [i as f64 / 11.0]).collect();
        let zs = xs.iter().map(|x| (6.0 * x[0]).sin() + 0.3 * x[0]).collect();
        Design::new(Points::from_rows(&xs).unwrap(), zs).unwrap()
    }

    #[test]
    fn profile_matches_full_likelihood_at_optimal_variance() {
        let design = toy_design();
        let trend = TrendSpec::constant();
        for mode in [LikelihoodMode::Ml, LikelihoodMode::Reml] {
            let ws = Workspace::new(&design, &trend, mode, 1e-8).unwrap();
            let prof = ws.profile(2.0, &[0.3]).unwrap();
            let spec = CovarianceSpec::new(prof.variance, 2.0, vec![0.3]).unwrap();
            let full = log_likelihood(&design, &trend, &spec, mode, 1e-8).unwrap();
            assert!((full - prof.value).abs() < 1e-9);
            for scale in [0.5, 2.0] {
                let other = spec.with_variance(prof.variance * scale).unwrap();
                assert!(log_likelihood(&design, &trend, &other, mode, 1e-8).unwrap() < full);
            }
        }
    }

    #[test]
    fn estimate_never_worse_than_init() {
        let design = toy_design();
        let trend = TrendSpec::constant();
        let init = CovarianceSpec::new(1.0, 2.0, vec![0.05]).unwrap();
        let out = estimate_params(&design, &trend, &init, &EstimationOptions::default()).unwrap();
        assert!(out.log_likelihood >= out.initial_log_likelihood);
        assert!(out.warning.is_none());
        let again = estimate_params(&design, &trend, &init, &EstimationOptions::default()).unwrap();
        assert_eq!(out.spec, again.spec);
    }

    #[test]
    fn constant_data_does_not_crash() {
        let xs: Vec<[f64; 1]> = (0..8).map(|i| [i as f64]).collect();
        let design = Design::new(Points::from_rows(&xs).unwrap(), vec![4.2; 8]).unwrap();
        let init = CovarianceSpec::new(1.0, 2.0, vec![2.0]).unwrap();
        let out = estimate_params(&design, &TrendSpec::constant(), &init, &EstimationOptions::default()).unwrap();
        assert!(out.spec.variance() > 0.0);
        assert!(out.spec.variance() < 1e-10);
    }

    #[test]
    fn too_small_design_rejected() {
        let design = Design::new(Points::from_rows(&[[0.0], [1.0]]).unwrap(), vec![0.0, 1.0]).unwrap();
        let init = CovarianceSpec::new(1.0, 2.0, vec![1.0]).unwrap();
        assert!(estimate_params(&design, &TrendSpec::constant(), &init, &EstimationOptions::default()).is_err());
    }
}
