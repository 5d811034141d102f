//! Test problems and the comparative study protocols built on them.

use std::collections::HashMap;
use std::io::Write;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{Criterion, PruneSize};
use crate::error::{Error, Result};
use crate::estimators::{fmt_f64, InputLaw, MCSample};
use crate::gp::{simulate_paths, CovarianceSpec, LikelihoodMode, Points, TrendKind};
use crate::sequencer::{
    maximin_lhs, n_gamma, rmse_db, CovarianceMode, Domain, ExceedanceSide, ExperimentConfig, RunTrace, Runner, Seeds,
    DEFAULT_LHS_TRIALS, DEFAULT_REESTIMATE_EVERY,
};

/// One-dimensional illustration function.
pub fn f_one_d(x: f64) -> f64 {
    (0.4 * x - 0.3).powi(2) + (-11.534 * x.abs().powf(1.95)).exp() + (-5.0 * (x - 0.8).powi(2)).exp()
}

/// Four-branch series system; failure when the value is `≤ 0`.
pub fn f_four_branch(x1: f64, x2: f64) -> f64 {
    let s = std::f64::consts::SQRT_2;
    let a = 3.0 + 0.1 * (x1 - x2).powi(2) - (x1 + x2) / s;
    let b = 3.0 + 0.1 * (x1 - x2).powi(2) + (x1 + x2) / s;
    let c = (x1 - x2) + 6.0 / s;
    let d = (x2 - x1) + 6.0 / s;
    a.min(b).min(c).min(d)
}

/// Fixed covariance of the one-dimensional illustration (REML fit of the
/// function on a dense grid over the design box, rounded).
pub fn one_d_covariance() -> CovarianceSpec {
    CovarianceSpec::new(ONE_D_COV.0, ONE_D_COV.1, vec![ONE_D_COV.2]).expect("valid constants")
}

const ONE_D_COV: (f64, f64, f64) = (0.17, 6.0, 0.55);

/// Setup of the one-dimensional illustration: `u = 1`, `P_X = N(0, 0.4²)`,
/// `m = 1500`, four initial points, fixed covariance, SUR variant 1.
pub fn one_d_config(budget: usize, seeds: Seeds) -> ExperimentConfig {
    ExperimentConfig {
        domain: Domain::cube(1, -1.2, 1.2),
        input_law: InputLaw::Normal {
            mean: vec![0.0],
            sd: vec![0.4],
        },
        threshold: 1.0,
        side: ExceedanceSide::Above,
        n0: 4,
        budget,
        m: 1500,
        criterion: Criterion::sur(1).with_m0(PruneSize::All),
        covariance: CovarianceMode::Fixed,
        reestimate_every: 0,
        trend: TrendKind::Constant,
        cov_init: Some(one_d_covariance()),
        seeds,
        lhs_trials: DEFAULT_LHS_TRIALS,
    }
}

/// Four-branch setup: ten maximin-LHS points on `[−6, 6]²`, standard normal
/// inputs, REML on the initial design and every ten steps.
pub fn four_branch_config(m: usize, budget: usize, criterion: Criterion, seeds: Seeds) -> ExperimentConfig {
    ExperimentConfig {
        domain: Domain::cube(2, -6.0, 6.0),
        input_law: InputLaw::standard_normal(2),
        threshold: 0.0,
        side: ExceedanceSide::Below,
        n0: 10,
        budget,
        m,
        criterion,
        covariance: CovarianceMode::Estimated {
            likelihood: LikelihoodMode::Reml,
            estimate_smoothness: true,
        },
        reestimate_every: DEFAULT_REESTIMATE_EVERY,
        trend: TrendKind::Constant,
        cov_init: None,
        seeds,
        lhs_trials: DEFAULT_LHS_TRIALS,
    }
}

/// Closed-form objectives that a run config can name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    OneD,
    FourBranch,
}

impl Benchmark {
    pub fn dim(self) -> usize {
        match self {
            Benchmark::OneD => 1,
            Benchmark::FourBranch => 2,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::OneD => f_one_d(x[0]),
            Benchmark::FourBranch => f_four_branch(x[0], x[1]),
        }
    }
}

/// Initial design size and isotropic Matérn parameters `(σ², ν, ρ)` for the
/// sample-path experiments in dimension `d`.
pub fn gp_path_setup(d: usize) -> Result<(usize, CovarianceSpec)> {
    let (n0, rho) = match d {
        1 => (3, 0.100),
        2 => (10, 0.252),
        3 => (15, 0.363),
        _ => return Err(Error::Config(format!("sample-path study supports d in 1..=3, got {d}"))),
    };
    Ok((n0, CovarianceSpec::isotropic(1.0, 2.0, rho, d)?))
}

/// Default total number of evaluations of the sample-path study.
pub fn gp_path_budget(d: usize) -> usize {
    match d {
        1 => 30,
        2 => 80,
        _ => 100,
    }
}

pub const GAMMAS: [f64; 3] = [0.10, 0.03, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StudyKind {
    OneDIllustration {
        #[serde(default = "default_one_d_budget")]
        budget: usize,
    },
    FourBranch {
        #[serde(default = "default_four_branch_m")]
        m: usize,
        /// Number of sequential evaluations after the initial design.
        #[serde(default = "default_added")]
        added: usize,
    },
    GpPaths {
        d: usize,
        #[serde(default)]
        budget: Option<usize>,
        #[serde(default = "default_path_m")]
        m: usize,
    },
}

fn default_one_d_budget() -> usize {
    12
}
fn default_four_branch_m() -> usize {
    10_000
}
fn default_added() -> usize {
    200
}
fn default_path_m() -> usize {
    500
}

/// A comparative study: one problem, several criteria, replicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub study: StudyKind,
    /// Replications (four-branch) or sample paths (GP paths).
    pub replications: usize,
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub seed: u64,
}

pub const DESK_FOUR_BRANCH_REPLICATIONS: usize = 20;
pub const PAPER_FOUR_BRANCH_REPLICATIONS: usize = 100;
pub const PAPER_FOUR_BRANCH_M: usize = 30_000;
pub const DESK_GP_PATHS: usize = 200;
pub const PAPER_GP_PATHS: usize = 4000;

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("criteria must not be empty".into()));
        }
        for c in &self.criteria {
            c.validate()?;
        }
        match &self.study {
            StudyKind::GpPaths { d, budget, m } => {
                let (n0, _) = gp_path_setup(*d)?;
                let b = budget.unwrap_or(gp_path_budget(*d));
                if b < n0 || *m < b {
                    return Err(Error::Config(format!("gp-paths budget {b} must lie in [n0 = {n0}, m = {m}]")));
                }
            }
            StudyKind::FourBranch { m, added } => {
                if *m < *added {
                    return Err(Error::Config(format!("m ({m}) must be at least added ({added})")));
                }
            }
            StudyKind::OneDIllustration { budget } => {
                if *budget < 4 {
                    return Err(Error::Config("one-d budget must be at least 4".into()));
                }
            }
        }
        Ok(())
    }

    /// Switches replication counts (and the four-branch sample size) to
    /// the values of the original experiments.
    pub fn paper_scale(mut self) -> Self {
        match &mut self.study {
            StudyKind::FourBranch { m, .. } => {
                self.replications = PAPER_FOUR_BRANCH_REPLICATIONS;
                *m = PAPER_FOUR_BRANCH_M;
            }
            StudyKind::GpPaths { .. } => self.replications = PAPER_GP_PATHS,
            StudyKind::OneDIllustration { .. } => {}
        }
        self
    }
}

/// Seeds of replication `r` of a study seeded with `base`.
pub fn replication_seeds(base: u64, r: usize) -> Seeds {
    let r = r as u64;
    Seeds {
        design: base.wrapping_mul(1_000_003).wrapping_add(2 * r),
        sample: base.wrapping_mul(1_000_003).wrapping_add(2 * r + 1),
        estimation: base.wrapping_add(r),
    }
}

/// Linear-interpolation percentile (`q` in `[0, 100]`).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGammaRow {
    pub criterion: String,
    pub params: String,
    pub gamma: f64,
    pub mean_n_gamma: f64,
    pub p10: f64,
    pub p90: f64,
    pub not_attained_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourBranchReport {
    pub rows: Vec<NGammaRow>,
    /// `n_γ` per criterion, replication and γ; `None` when not attained.
    pub n_gamma: Vec<Vec<[Option<usize>; 3]>>,
    /// Sequential evaluations per run (the value used for runs that never
    /// reach the accuracy).
    pub added: usize,
    pub alpha_m: Vec<f64>,
}

impl FourBranchReport {
    pub fn row(&self, criterion: &Criterion, gamma: f64) -> Option<&NGammaRow> {
        let (name, params) = (criterion.name(), criterion.params());
        self.rows.iter().find(|r| r.criterion == name && r.params == params && r.gamma == gamma)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["criterion", "params", "gamma", "mean_n_gamma", "p10", "p90", "not_attained_fraction"])?;
        for r in &self.rows {
            w.write_record([
                r.criterion.clone(),
                r.params.clone(),
                fmt_f64(r.gamma),
                fmt_f64(r.mean_n_gamma),
                fmt_f64(r.p10),
                fmt_f64(r.p90),
                fmt_f64(r.not_attained_fraction),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// Replicated four-branch comparison. Every criterion sees the same initial
/// design and sample within a replication. Runs that never stabilize count
/// as `added` in the averages and percentiles.
pub fn run_four_branch_study(spec: &StudySpec, jobs: usize) -> Result<FourBranchReport> {
    spec.validate()?;
    let StudyKind::FourBranch { m, added } = spec.study else {
        return Err(Error::Config("not a four-branch study".into()));
    };
    let objective = |x: &[f64]| f_four_branch(x[0], x[1]);
    let tasks: Vec<(usize, usize)> = (0..spec.criteria.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    let traces: Vec<Result<RunTrace>> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let cfg = four_branch_config(m, 10 + added, spec.criteria[c].clone(), replication_seeds(spec.seed, r));
                let t = Runner::new(&cfg, &objective)?.finish();
                info!("four-branch {} replication {r} done", spec.criteria[c]);
                t
            })
            .collect()
    });
    let traces: Vec<RunTrace> = traces.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut all = Vec::new();
    let mut alpha_m = Vec::new();
    for (c, crit) in spec.criteria.iter().enumerate() {
        let runs = &traces[c * spec.replications..(c + 1) * spec.replications];
        if c == 0 {
            alpha_m = runs.iter().map(|t| t.alpha_m).collect();
        }
        let mut per_run = Vec::new();
        for t in runs {
            let mut ng = [None; 3];
            for (g, slot) in GAMMAS.iter().zip(ng.iter_mut()) {
                *slot = n_gamma(&t.alpha_hat, t.alpha_m, *g)?;
            }
            per_run.push(ng);
        }
        for (gi, g) in GAMMAS.iter().enumerate() {
            let vals: Vec<f64> = per_run.iter().map(|ng| ng[gi].unwrap_or(added) as f64).collect();
            let missing = per_run.iter().filter(|ng| ng[gi].is_none()).count();
            rows.push(NGammaRow {
                criterion: crit.name(),
                params: crit.params(),
                gamma: *g,
                mean_n_gamma: vals.iter().sum::<f64>() / vals.len() as f64,
                p10: percentile(&vals, 10.0),
                p90: percentile(&vals, 90.0),
                not_attained_fraction: missing as f64 / vals.len() as f64,
            });
        }
        all.push(per_run);
    }
    Ok(FourBranchReport {
        rows,
        n_gamma: all,
        added,
        alpha_m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseCurve {
    pub criterion: String,
    pub params: String,
    pub d: usize,
    /// `(n, rMSE in dB)` for each total number of evaluations.
    pub points: Vec<(usize, f64)>,
}

impl RmseCurve {
    pub fn final_db(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpPathReport {
    pub curves: Vec<RmseCurve>,
    /// Number of sample points above the threshold on each path.
    pub exceedances: Vec<usize>,
    pub alpha_m: f64,
}

impl GpPathReport {
    pub fn curve(&self, criterion: &Criterion) -> Option<&RmseCurve> {
        let (name, params) = (criterion.name(), criterion.params());
        self.curves.iter().find(|c| c.criterion == name && c.params == params)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["criterion", "params", "d", "n", "rmse_db"])?;
        for c in &self.curves {
            for (n, v) in &c.points {
                w.write_record([c.criterion.clone(), c.params.clone(), c.d.to_string(), n.to_string(), fmt_f64(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Threshold leaving exactly `ceil(fraction · m)` sample values above it:
/// the midpoint between the k-th and (k+1)-th largest.
pub fn path_threshold(values: &[f64], fraction: f64) -> f64 {
    let k = (fraction * values.len() as f64).ceil() as usize;
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    0.5 * (v[k - 1] + v[k])
}

pub const PATH_ALPHA: f64 = 0.02;

/// Sample-path study: the objective of path `l` is the simulated path
/// itself, thresholded so that exactly 2% of the sample exceeds it. The
/// covariance is known and fixed. The sequential maximin curve is always
/// included as a reference.
pub fn run_gp_path_study(spec: &StudySpec, jobs: usize) -> Result<GpPathReport> {
    spec.validate()?;
    let StudyKind::GpPaths { d, budget, m } = spec.study else {
        return Err(Error::Config("not a sample-path study".into()));
    };
    let budget = budget.unwrap_or(gp_path_budget(d));
    let (n0, cov) = gp_path_setup(d)?;
    let seeds = replication_seeds(spec.seed, 0);
    let domain = Domain::cube(d, 0.0, 1.0);
    let law = InputLaw::uniform_unit(d);
    let design = maximin_lhs(n0, &domain, DEFAULT_LHS_TRIALS, seeds.design)?;
    let sample = MCSample::draw(&law, m, seeds.sample)?;
    let mut joint = design.clone();
    for y in sample.points.rows() {
        joint.push(y)?;
    }
    let paths = simulate_paths(&cov, &joint, spec.replications, spec.seed.wrapping_add(0x5eed))?;

    let mut criteria = spec.criteria.clone();
    if !criteria.contains(&Criterion::Maximin) {
        criteria.push(Criterion::Maximin);
    }
    let base = ExperimentConfig {
        domain,
        input_law: law,
        threshold: 0.0,
        side: ExceedanceSide::Above,
        n0,
        budget,
        m,
        criterion: Criterion::Maximin,
        covariance: CovarianceMode::Fixed,
        reestimate_every: 0,
        trend: TrendKind::Constant,
        cov_init: Some(cov),
        seeds,
        lhs_trials: DEFAULT_LHS_TRIALS,
    };

    let thresholds: Vec<f64> = paths.values.iter().map(|p| path_threshold(&p[n0..], PATH_ALPHA)).collect();
    let exceedances: Vec<usize> = paths
        .values
        .iter()
        .zip(&thresholds)
        .map(|(p, u)| p[n0..].iter().filter(|v| *v > u).count())
        .collect();

    let tasks: Vec<(usize, usize)> = (0..criteria.len())
        .flat_map(|c| (0..spec.replications).map(move |l| (c, l)))
        .collect();
    let results: Vec<Result<(Vec<f64>, f64)>> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(c, l)| {
                let lookup: HashMap<Vec<u64>, f64> = joint
                    .rows()
                    .zip(&paths.values[l])
                    .map(|(x, v)| (point_key(x), *v))
                    .collect();
                let objective = |x: &[f64]| lookup.get(&point_key(x)).copied().unwrap_or(f64::NAN);
                let cfg = ExperimentConfig {
                    threshold: thresholds[l],
                    criterion: criteria[c].clone(),
                    ..base.clone()
                };
                let trace = Runner::with_inputs(&cfg, design.clone(), sample.clone(), &objective)?.finish()?;
                Ok((trace.alpha_hat, trace.alpha_m))
            })
            .collect()
    });
    let results: Vec<(Vec<f64>, f64)> = results.into_iter().collect::<Result<_>>()?;
    let alpha_m = exceedances[0] as f64 / m as f64;

    let mut curves = Vec::new();
    for (c, crit) in criteria.iter().enumerate() {
        let runs = &results[c * spec.replications..(c + 1) * spec.replications];
        let mut points = Vec::new();
        for k in 0..=(budget - n0) {
            let est: Vec<f64> = runs.iter().map(|r| r.0[k]).collect();
            points.push((n0 + k, rmse_db(&est, runs[0].1)?));
        }
        curves.push(RmseCurve {
            criterion: crit.name(),
            params: crit.params(),
            d,
            points,
        });
    }
    Ok(GpPathReport {
        curves,
        exceedances,
        alpha_m,
    })
}

/// Final estimate of one replication of the 1-D illustration.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDRow {
    pub criterion: String,
    pub params: String,
    pub replication: usize,
    pub alpha_hat: f64,
    pub alpha_m: f64,
}

/// Replicated 1-D illustration, one row per criterion and replication.
pub fn run_one_d_study(spec: &StudySpec, jobs: usize) -> Result<Vec<OneDRow>> {
    spec.validate()?;
    let StudyKind::OneDIllustration { budget } = spec.study else {
        return Err(Error::Config("not a one-d study".into()));
    };
    let objective = |x: &[f64]| f_one_d(x[0]);
    let tasks: Vec<(usize, usize)> = (0..spec.criteria.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let crit = &spec.criteria[c];
                let cfg = ExperimentConfig {
                    criterion: crit.clone(),
                    ..one_d_config(budget, replication_seeds(spec.seed, r))
                };
                let t = Runner::new(&cfg, &objective)?.finish()?;
                Ok(OneDRow {
                    criterion: crit.name(),
                    params: crit.params(),
                    replication: r,
                    alpha_hat: t.final_estimate(),
                    alpha_m: t.alpha_m,
                })
            })
            .collect()
    })
}

/// Writes `criterion, params, replication, alpha_hat, alpha_m, rel_error`.
pub fn write_one_d_csv<W: Write>(rows: &[OneDRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["criterion", "params", "replication", "alpha_hat", "alpha_m", "rel_error"])?;
    for r in rows {
        let rel = ((r.alpha_hat - r.alpha_m) / r.alpha_m).abs();
        w.write_record([
            r.criterion.clone(),
            r.params.clone(),
            r.replication.to_string(),
            fmt_f64(r.alpha_hat),
            fmt_f64(r.alpha_m),
            fmt_f64(rel),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a TOML sidecar: crate version, the given entries (TOML literals,
/// kept as strings when they do not parse) and the config under `[config]`.
pub fn write_sidecar<W: Write, T: Serialize>(mut out: W, title: &str, config: &T, extra: &[(&str, String)]) -> Result<()> {
    let mut table = toml::Table::new();
    table.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    for (k, v) in extra {
        let value = format!("v = {v}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| v.clone().into());
        table.insert((*k).into(), value);
    }
    let config = toml::Value::try_from(config).map_err(|e| Error::Config(e.to_string()))?;
    table.insert("config".into(), config);
    writeln!(out, "# {title}")?;
    let body = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
    out.write_all(body.as_bytes())?;
    Ok(())
}

/// Points of `Points` as a `Vec` of rows, for small designs.
pub fn rows(points: &Points) -> Vec<Vec<f64>> {
    points.rows().map(|r| r.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_values() {
        let expected = 0.09 + 1.0 + (-3.2f64).exp();
        assert!((f_one_d(0.0) - expected).abs() < 1e-15);
        assert!((f_one_d(0.0) - 1.1308).abs() < 1e-4);
        let x = 40.0;
        assert!((f_one_d(x) - (0.4 * x - 0.3f64).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn four_branch_values() {
        assert!((f_four_branch(0.0, 0.0) - 3.0).abs() < 1e-15);
        for (a, b) in [(0.3, -2.0), (4.0, 1.0), (-3.3, -3.1)] {
            assert_eq!(f_four_branch(a, b), f_four_branch(b, a));
        }
    }

    #[test]
    fn thresholds_leave_exact_count() {
        let v: Vec<f64> = (0..500).map(|i| ((i * 7919) % 500) as f64 * 0.01).collect();
        let u = path_threshold(&v, PATH_ALPHA);
        assert_eq!(v.iter().filter(|x| **x > u).count(), 10);
    }

    #[test]
    fn percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 50.0), 3.0);
        assert_eq!(percentile(&v, 10.0), 1.4);
        assert_eq!(percentile(&v, 100.0), 5.0);
    }

    #[test]
    fn paper_scale_flag() {
        let s = StudySpec {
            study: StudyKind::FourBranch { m: 10_000, added: 200 },
            replications: 20,
            criteria: vec![Criterion::sur(1)],
            seed: 0,
        };
        let p = s.paper_scale();
        assert_eq!(p.replications, 100);
        assert_eq!(p.study, StudyKind::FourBranch { m: 30_000, added: 200 });
    }

    #[test]
    fn small_gp_path_study() {
        let spec = StudySpec {
            study: StudyKind::GpPaths {
                d: 1,
                budget: Some(6),
                m: 100,
            },
            replications: 3,
            criteria: vec![Criterion::sur(1)],
            seed: 4,
        };
        let r = run_gp_path_study(&spec, 1).unwrap();
        assert_eq!(r.curves.len(), 2);
        assert!(r.curve(&Criterion::Maximin).is_some());
        assert!(r.exceedances.iter().all(|k| *k == 2));
        assert_eq!(r.curves[0].points.len(), 4);
        assert_eq!(r, run_gp_path_study(&spec, 1).unwrap());
    }
}
