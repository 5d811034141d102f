//! The sequential estimation loop: initial design, covariance
//! (re-)estimation, criterion-driven evaluations and per-step estimates.

use std::io::Write;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{select_next, Criterion};
use crate::error::{Error, Result};
use crate::estimators::{alpha_plugin, alpha_posterior_mean, fmt_f64, mc_reference, summarize_batch, InputLaw, MCSample, PosteriorSummary};
use crate::gp::{
    estimate_params, euclidean, BatchPredictor, CovarianceSpec, Design, EstimationOptions, FitOptions, KrigingModel,
    LikelihoodMode, Points, TrendKind, TrendSpec,
};

pub const DEFAULT_LHS_TRIALS: usize = 10_000;
pub const DEFAULT_REESTIMATE_EVERY: usize = 10;

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = Self { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty()
            || self.lower.len() != self.upper.len()
            || self.lower.iter().zip(&self.upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return Err(Error::Config(format!("invalid domain {self:?}")));
        }
        Ok(())
    }
}

/// Which side of the threshold counts as failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceedanceSide {
    /// Failure when `f(x) > u`.
    #[default]
    Above,
    /// Failure when `f(x) ≤ u`; handled by modelling `−f` against `−u`.
    Below,
}

impl ExceedanceSide {
    fn sign(self) -> f64 {
        match self {
            ExceedanceSide::Above => 1.0,
            ExceedanceSide::Below => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CovarianceMode {
    /// Use `cov_init` throughout.
    Fixed,
    /// Estimate on the initial design, then every `reestimate_every` steps.
    Estimated {
        #[serde(default)]
        likelihood: LikelihoodMode,
        #[serde(default)]
        estimate_smoothness: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub design: u64,
    #[serde(default)]
    pub sample: u64,
    #[serde(default)]
    pub estimation: u64,
}

fn default_lhs_trials() -> usize {
    DEFAULT_LHS_TRIALS
}

fn default_reestimate() -> usize {
    DEFAULT_REESTIMATE_EVERY
}

/// Everything a run needs except the objective itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Box on which the initial design is laid out.
    pub domain: Domain,
    pub input_law: InputLaw,
    pub threshold: f64,
    #[serde(default)]
    pub side: ExceedanceSide,
    pub n0: usize,
    /// Total number of evaluations, initial design included.
    pub budget: usize,
    /// Monte Carlo sample size.
    pub m: usize,
    pub criterion: Criterion,
    pub covariance: CovarianceMode,
    /// Steps between covariance re-estimations (0 = never).
    #[serde(default = "default_reestimate")]
    pub reestimate_every: usize,
    #[serde(default)]
    pub trend: TrendKind,
    #[serde(default)]
    pub cov_init: Option<CovarianceSpec>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "default_lhs_trials")]
    pub lhs_trials: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.input_law.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.criterion.validate()?;
        let d = self.domain.dim();
        if self.input_law.dim() != d {
            return Err(Error::Config(format!(
                "input_law has dimension {}, domain has {d}",
                self.input_law.dim()
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if self.n0 < 2 {
            return Err(Error::Config(format!("n0 must be at least 2, got {}", self.n0)));
        }
        if self.budget < self.n0 {
            return Err(Error::Config(format!("budget ({}) must be at least n0 ({})", self.budget, self.n0)));
        }
        if self.m == 0 || self.m < self.budget - self.n0 {
            return Err(Error::Config(format!(
                "m ({}) must be positive and at least the number of sequential steps ({})",
                self.m,
                self.budget - self.n0
            )));
        }
        if self.lhs_trials == 0 {
            return Err(Error::Config("lhs_trials must be positive".into()));
        }
        match (&self.covariance, &self.cov_init) {
            (CovarianceMode::Fixed, None) => {
                return Err(Error::Config("cov_init is required when covariance.kind = \"fixed\"".into()))
            }
            (_, Some(c)) if c.dim() != d => {
                return Err(Error::Config(format!("cov_init has {} ranges, domain has dimension {d}", c.dim())))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Latin hypercube with one point per stratum along every axis and uniform
/// jitter within cells; the best of `n_trials` draws by minimum pairwise
/// distance is kept.
pub fn maximin_lhs(n0: usize, domain: &Domain, n_trials: usize, seed: u64) -> Result<Points> {
    domain.validate()?;
    if n0 < 2 {
        return Err(Error::InvalidArgument(format!("n0 must be at least 2, got {n0}")));
    }
    let d = domain.dim();
    let widths = domain.widths();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut perm: Vec<usize> = (0..n0).collect();
    let mut data = vec![0.0; n0 * d];
    for _ in 0..n_trials.max(1) {
        for k in 0..d {
            perm.shuffle(&mut rng);
            for (i, cell) in perm.iter().enumerate() {
                let t = (*cell as f64 + rng.gen::<f64>()) / n0 as f64;
                data[i * d + k] = domain.lower[k] + widths[k] * t;
            }
        }
        let mut sep = f64::INFINITY;
        for i in 0..n0 {
            for j in 0..i {
                sep = sep.min(euclidean(&data[i * d..(i + 1) * d], &data[j * d..(j + 1) * d]));
            }
        }
        if best.as_ref().map_or(true, |(b, _)| sep > *b) {
            best = Some((sep, data.clone()));
        }
    }
    Points::from_flat(d, best.expect("at least one trial").1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub point: Vec<f64>,
    pub value: f64,
    /// 0 for the initial design, then 1, 2, … for sequential evaluations.
    pub step: usize,
    /// Index into the Monte Carlo sample, for sequential evaluations.
    pub sample_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceRecord {
    /// Number of evaluations the parameters were estimated on.
    pub n: usize,
    pub spec: CovarianceSpec,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub evaluations: Vec<Evaluation>,
    /// Posterior-mean estimates after `n0`, `n0 + 1`, … evaluations.
    pub alpha_hat: Vec<f64>,
    pub alpha_plugin: Vec<f64>,
    /// Monte Carlo reference on the same sample.
    pub alpha_m: f64,
    pub cov_history: Vec<CovarianceRecord>,
    pub n0: usize,
    pub seeds: Seeds,
}

impl RunTrace {
    /// Final estimate, the posterior mean after the last evaluation.
    pub fn final_estimate(&self) -> f64 {
        *self.alpha_hat.last().expect("trace has at least one estimate")
    }

    /// Writes `step, x1…xd, z, alpha_hat, alpha_plugin`. Estimate columns
    /// are empty on initial-design rows except the last one.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.evaluations.first().map_or(0, |e| e.point.len());
        let mut header = vec!["step".to_string()];
        header.extend((1..=d).map(|k| format!("x{k}")));
        header.extend(["z", "alpha_hat", "alpha_plugin"].map(String::from));
        w.write_record(&header)?;
        for (i, e) in self.evaluations.iter().enumerate() {
            let mut rec = vec![e.step.to_string()];
            rec.extend(e.point.iter().map(|v| fmt_f64(*v)));
            rec.push(fmt_f64(e.value));
            if i + 1 >= self.n0 {
                let k = i + 1 - self.n0;
                rec.push(fmt_f64(self.alpha_hat[k]));
                rec.push(fmt_f64(self.alpha_plugin[k]));
            } else {
                rec.extend([String::new(), String::new()]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The sequential procedure, one evaluation at a time.
pub struct Runner<'f> {
    config: ExperimentConfig,
    objective: &'f dyn Fn(&[f64]) -> f64,
    sign: f64,
    threshold: f64,
    trend: TrendSpec,
    sample: MCSample,
    model: KrigingModel,
    batch: BatchPredictor,
    summary: PosteriorSummary,
    evaluated: Vec<bool>,
    trace: RunTrace,
}

impl<'f> Runner<'f> {
    /// Lays out the initial design and draws the sample from the config seeds.
    pub fn new(config: &ExperimentConfig, objective: &'f dyn Fn(&[f64]) -> f64) -> Result<Self> {
        config.validate()?;
        let design = maximin_lhs(config.n0, &config.domain, config.lhs_trials, config.seeds.design)?;
        let sample = MCSample::draw(&config.input_law, config.m, config.seeds.sample)?;
        Self::with_inputs(config, design, sample, objective)
    }

    /// Starts from a given initial design and sample (shared across
    /// criteria in comparative studies).
    pub fn with_inputs(
        config: &ExperimentConfig,
        design_points: Points,
        sample: MCSample,
        objective: &'f dyn Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        config.validate()?;
        if design_points.len() != config.n0 || sample.len() != config.m {
            return Err(Error::Config(format!(
                "initial design has {} points and sample {} (expected n0 = {}, m = {})",
                design_points.len(),
                sample.len(),
                config.n0,
                config.m
            )));
        }
        let sign = config.side.sign();
        let threshold = sign * config.threshold;
        let d = config.domain.dim();
        let trend = TrendSpec::from_kind(config.trend, d);

        let mut evaluations = Vec::with_capacity(config.budget);
        let mut values = Vec::with_capacity(config.n0);
        for x in design_points.rows() {
            let z = (objective)(x);
            if !z.is_finite() {
                return Err(Error::ObjectiveFailure {
                    step: 0,
                    point: x.to_vec(),
                    value: z,
                });
            }
            evaluations.push(Evaluation {
                point: x.to_vec(),
                value: z,
                step: 0,
                sample_index: None,
            });
            values.push(sign * z);
        }
        let design = Design::new(design_points, values)?;

        let reference: Vec<f64> = sample.points.rows().map(|y| sign * (objective)(y)).collect();
        let alpha_m = mc_reference(&reference, threshold);

        let mut cov_history = Vec::new();
        let cov = match &config.covariance {
            CovarianceMode::Fixed => config.cov_init.clone().expect("validated"),
            CovarianceMode::Estimated { likelihood, estimate_smoothness } => {
                let init = config.cov_init.clone().unwrap_or(default_init(&design, &config.domain)?);
                let options = estimation_options(config, *likelihood, *estimate_smoothness, 5, 0);
                let out = estimate_params(&design, &trend, &init, &options)?;
                cov_history.push(CovarianceRecord {
                    n: design.len(),
                    spec: out.spec.clone(),
                    log_likelihood: out.log_likelihood,
                });
                out.spec
            }
        };
        let model = KrigingModel::fit(design, trend.clone(), cov, FitOptions::default())?;
        let batch = BatchPredictor::new(&model, sample.points.clone())?;
        let summary = summarize_batch(&batch, threshold)?;

        let tol = model.separation_tolerance();
        let evaluated = sample.points.rows().map(|y| model.design().find_near(y, tol).is_some()).collect();

        let trace = RunTrace {
            evaluations,
            alpha_hat: vec![alpha_posterior_mean(&summary)],
            alpha_plugin: vec![alpha_plugin(&summary)],
            alpha_m,
            cov_history,
            n0: config.n0,
            seeds: config.seeds,
        };
        Ok(Self {
            config: config.clone(),
            objective,
            sign,
            threshold,
            trend,
            sample,
            model,
            batch,
            summary,
            evaluated,
            trace,
        })
    }

    /// Number of evaluations so far.
    pub fn n(&self) -> usize {
        self.model.len()
    }

    pub fn is_done(&self) -> bool {
        self.n() >= self.config.budget
    }

    pub fn model(&self) -> &KrigingModel {
        &self.model
    }

    pub fn batch(&self) -> &BatchPredictor {
        &self.batch
    }

    pub fn summary(&self) -> &PosteriorSummary {
        &self.summary
    }

    pub fn sample(&self) -> &MCSample {
        &self.sample
    }

    pub fn evaluated(&self) -> &[bool] {
        &self.evaluated
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    fn reestimate(&mut self, likelihood: LikelihoodMode, estimate_smoothness: bool) -> Result<()> {
        let step = self.n() - self.config.n0;
        let options = estimation_options(&self.config, likelihood, estimate_smoothness, 1, step as u64);
        let out = estimate_params(self.model.design(), &self.trend, self.model.covariance(), &options)?;
        debug!("n = {}: re-estimated covariance {:?}", self.n(), out.spec);
        self.trace.cov_history.push(CovarianceRecord {
            n: self.n(),
            spec: out.spec.clone(),
            log_likelihood: out.log_likelihood,
        });
        if &out.spec != self.model.covariance() {
            self.model = KrigingModel::fit(self.model.design().clone(), self.trend.clone(), out.spec, FitOptions::default())?;
        }
        Ok(())
    }

    /// Performs one sequential evaluation.
    pub fn step(&mut self) -> Result<()> {
        if self.is_done() {
            return Err(Error::InvalidArgument("evaluation budget exhausted".into()));
        }
        let k = self.n() - self.config.n0;
        if let CovarianceMode::Estimated { likelihood, estimate_smoothness } = self.config.covariance {
            let every = self.config.reestimate_every;
            if every > 0 && k > 0 && k % every == 0 {
                self.reestimate(likelihood, estimate_smoothness)?;
                self.batch.update(&self.model)?;
                self.summary = summarize_batch(&self.batch, self.threshold)?;
            }
        }
        let sel = select_next(&self.config.criterion, &self.model, &self.batch, &self.summary, &self.evaluated)?;
        let j = sel.chosen_index;
        let x = self.sample.points.row(j).to_vec();
        let z = (self.objective)(&x);
        if !z.is_finite() {
            return Err(Error::ObjectiveFailure {
                step: k + 1,
                point: x,
                value: z,
            });
        }
        self.model = self.model.extend(&x, self.sign * z)?;
        self.batch.update(&self.model)?;
        self.summary = summarize_batch(&self.batch, self.threshold)?;
        self.evaluated[j] = true;
        self.trace.evaluations.push(Evaluation {
            point: x,
            value: z,
            step: k + 1,
            sample_index: Some(j),
        });
        self.trace.alpha_hat.push(alpha_posterior_mean(&self.summary));
        self.trace.alpha_plugin.push(alpha_plugin(&self.summary));
        Ok(())
    }

    pub fn finish(mut self) -> Result<RunTrace> {
        while !self.is_done() {
            self.step()?;
        }
        info!(
            "run finished: n = {}, alpha_hat = {:.6e}, alpha_m = {:.6e}",
            self.n(),
            self.trace.final_estimate(),
            self.trace.alpha_m
        );
        Ok(self.trace)
    }
}

fn estimation_options(
    config: &ExperimentConfig,
    mode: LikelihoodMode,
    estimate_smoothness: bool,
    starts: usize,
    salt: u64,
) -> EstimationOptions {
    EstimationOptions {
        mode,
        estimate_smoothness,
        starts,
        widths: Some(config.domain.widths()),
        seed: config.seeds.estimation.wrapping_add(salt),
        ..EstimationOptions::default()
    }
}

/// Starting point for estimation when none is configured: the empirical
/// variance, ν = 2 and ranges of a third of the domain width.
fn default_init(design: &Design, domain: &Domain) -> Result<CovarianceSpec> {
    let z = design.values();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
    let ranges = domain.widths().iter().map(|w| w / 3.0).collect();
    CovarianceSpec::new(if var > 0.0 { var } else { 1.0 }, 2.0, ranges)
}

/// Runs the whole procedure of `config` on `objective`.
pub fn run(config: &ExperimentConfig, objective: &dyn Fn(&[f64]) -> f64) -> Result<RunTrace> {
    Runner::new(config, objective)?.finish()
}

/// Smallest `n` such that every relative error from `alpha_hat[n]` on is
/// below `gamma`; `None` when the last one is not.
pub fn n_gamma(alpha_hat: &[f64], alpha_m: f64, gamma: f64) -> Result<Option<usize>> {
    if alpha_m == 0.0 || !alpha_m.is_finite() {
        return Err(Error::InvalidArgument(format!("reference probability must be non-zero, got {alpha_m}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let mut n = alpha_hat.len();
    for (k, a) in alpha_hat.iter().enumerate().rev() {
        if ((a - alpha_m) / alpha_m).abs() < gamma {
            n = k;
        } else {
            break;
        }
    }
    Ok((n < alpha_hat.len()).then_some(n))
}

/// `10 log10` of the mean squared relative error; `−∞` when every estimate
/// is exact.
pub fn rmse_db(estimates: &[f64], reference: f64) -> Result<f64> {
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::InvalidArgument(format!("reference must be non-zero, got {reference}")));
    }
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("no estimates".into()));
    }
    let mse = estimates.iter().map(|a| ((a - reference) / reference).powi(2)).sum::<f64>() / estimates.len() as f64;
    Ok(10.0 * mse.log10())
}

/// As [`rmse_db`], with a per-estimate reference.
pub fn rmse_db_paired(estimates: &[f64], references: &[f64]) -> Result<f64> {
    if estimates.len() != references.len() || estimates.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: references.len(),
            got: estimates.len(),
        });
    }
    let mut total = 0.0;
    for (a, r) in estimates.iter().zip(references) {
        if *r == 0.0 {
            return Err(Error::InvalidArgument("reference must be non-zero".into()));
        }
        total += ((a - r) / r).powi(2);
    }
    Ok(10.0 * (total / estimates.len() as f64).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::PruneSize;
    use proptest::prelude::*;

    #[test]
    fn lhs_stratification() {
        let dom = Domain::cube(3, -6.0, 6.0);
        let pts = maximin_lhs(7, &dom, 200, 5).unwrap();
        for k in 0..3 {
            let mut cells: Vec<usize> = pts.rows().map(|x| ((x[k] + 6.0) / 12.0 * 7.0).floor() as usize).collect();
            cells.sort_unstable();
            assert_eq!(cells, (0..7).collect::<Vec<_>>());
        }
        let two = maximin_lhs(2, &Domain::cube(1, 0.0, 1.0), 10, 1).unwrap();
        assert!((two.row(0)[0] < 0.5) != (two.row(1)[0] < 0.5));
        assert_eq!(pts, maximin_lhs(7, &dom, 200, 5).unwrap());
    }

    #[test]
    fn n_gamma_examples() {
        let a = [1.5, 1.2, 1.05, 0.98, 1.01];
        assert_eq!(n_gamma(&a, 1.0, 0.03).unwrap(), Some(3));
        assert_eq!(n_gamma(&a, 1.0, 0.6).unwrap(), Some(0));
        assert_eq!(n_gamma(&[1.0, 1.5], 1.0, 0.1).unwrap(), None);
        assert!(n_gamma(&a, 0.0, 0.1).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert!((rmse_db(&[1.1, 0.9], 1.0).unwrap() + 20.0).abs() < 1e-9);
        assert!(rmse_db(&[2.0, 0.0], 1.0).unwrap().abs() < 1e-12);
        assert!((rmse_db(&[1.1, 1.3], 1.0).unwrap() - 10.0 * 0.05f64.log10()).abs() < 1e-9);
        assert_eq!(rmse_db(&[0.5], 0.5).unwrap(), f64::NEG_INFINITY);
        assert!(rmse_db(&[0.5], 0.0).is_err());
    }

    fn small_config(criterion: Criterion) -> ExperimentConfig {
        ExperimentConfig {
            domain: Domain::cube(1, 0.0, 1.0),
            input_law: InputLaw::uniform_unit(1),
            threshold: 0.5,
            side: ExceedanceSide::Above,
            n0: 3,
            budget: 8,
            m: 60,
            criterion,
            covariance: CovarianceMode::Fixed,
            reestimate_every: 0,
            trend: TrendKind::Constant,
            cov_init: Some(CovarianceSpec::new(1.0, 2.0, vec![0.2]).unwrap()),
            seeds: Seeds {
                design: 1,
                sample: 2,
                estimation: 3,
            },
            lhs_trials: 100,
        }
    }

    fn f(x: &[f64]) -> f64 {
        (7.0 * x[0]).sin()
    }

    #[test]
    fn degenerate_budget() {
        let mut cfg = small_config(Criterion::sur(1));
        cfg.budget = cfg.n0;
        let t = run(&cfg, &f).unwrap();
        assert_eq!(t.evaluations.len(), 3);
        assert_eq!(t.alpha_hat.len(), 1);
    }

    #[test]
    fn run_is_deterministic_and_consistent() {
        for c in [Criterion::sur(1), Criterion::timse(0.1), Criterion::Ech, Criterion::Maximin, Criterion::Rb { kappa: 2.0, delta: 1 }] {
            let cfg = small_config(c);
            let a = run(&cfg, &f).unwrap();
            let b = run(&cfg, &f).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.evaluations.len(), cfg.budget);
            assert_eq!(a.alpha_hat.len(), cfg.budget - cfg.n0 + 1);
            let idx: Vec<usize> = a.evaluations.iter().filter_map(|e| e.sample_index).collect();
            let mut uniq = idx.clone();
            uniq.sort_unstable();
            uniq.dedup();
            assert_eq!(uniq.len(), idx.len());
            let mut buf1 = Vec::new();
            let mut buf2 = Vec::new();
            a.write_csv(&mut buf1).unwrap();
            b.write_csv(&mut buf2).unwrap();
            assert_eq!(buf1, buf2);
        }
    }

    #[test]
    fn exhaustive_evaluation_recovers_reference() {
        let mut cfg = small_config(Criterion::sur(1).with_m0(PruneSize::All));
        cfg.m = 30;
        cfg.budget = 33;
        let t = run(&cfg, &f).unwrap();
        assert_eq!(t.final_estimate(), t.alpha_m);
        assert_eq!(*t.alpha_plugin.last().unwrap(), t.alpha_m);
    }

    #[test]
    fn below_side_counts_lower_tail() {
        let mut cfg = small_config(Criterion::Maximin);
        cfg.side = ExceedanceSide::Below;
        cfg.m = 30;
        cfg.budget = 33;
        let t = run(&cfg, &f).unwrap();
        let sample = MCSample::draw(&cfg.input_law, 30, 2).unwrap();
        let below = sample.points.rows().filter(|y| f(y) <= 0.5).count() as f64 / 30.0;
        assert_eq!(t.alpha_m, below);
        assert_eq!(t.final_estimate(), below);
    }

    #[test]
    fn estimated_covariance_records_history() {
        let mut cfg = small_config(Criterion::sur(2));
        cfg.covariance = CovarianceMode::Estimated {
            likelihood: LikelihoodMode::Reml,
            estimate_smoothness: false,
        };
        cfg.n0 = 5;
        cfg.budget = 12;
        cfg.reestimate_every = 3;
        let t = run(&cfg, &f).unwrap();
        let ns: Vec<usize> = t.cov_history.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![5, 8, 11]);
    }

    #[test]
    fn objective_failure_is_reported() {
        let cfg = small_config(Criterion::Ech);
        let bad = |x: &[f64]| if x[0] > 0.9 { f64::NAN } else { x[0] };
        match run(&cfg, &bad) {
            Err(Error::ObjectiveFailure { .. }) | Ok(_) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    proptest! {
        #[test]
        fn n_gamma_monotone(errs in prop::collection::vec(0.0f64..0.5, 1..30), g1 in 0.01f64..0.4, g2 in 0.01f64..0.4) {
            let a: Vec<f64> = errs.iter().map(|e| 1.0 + e).collect();
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let n_lo = n_gamma(&a, 1.0, lo).unwrap().unwrap_or(usize::MAX);
            let n_hi = n_gamma(&a, 1.0, hi).unwrap().unwrap_or(usize::MAX);
            prop_assert!(n_hi <= n_lo);
        }
    }
}
