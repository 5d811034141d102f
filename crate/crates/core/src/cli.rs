//! Command-line front end. Every command reads one TOML file, validates it
//! before computing anything, and writes CSV files (each with a TOML
//! sidecar) under the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    one_d_config, rows, run_four_branch_study, run_gp_path_study, run_one_d_study, write_one_d_csv, write_sidecar,
    Benchmark, StudyKind, StudySpec,
};
use crate::criteria::{select_next, Criterion, PruneSize};
use crate::error::{Error, Result};
use crate::estimators::fmt_f64;
use crate::gp::euclidean;
use crate::sequencer::{ExperimentConfig, Runner, Seeds};

#[derive(Debug, Parser)]
#[command(name = "failprob", version, about = "Sequential designs for estimating a probability of failure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one sequential experiment and write its trace.
    Run(RunArgs),
    /// Run a replicated comparison of criteria.
    Study(StudyArgs),
    /// Run the 1-D illustration and write traces, summaries and criterion surfaces.
    #[command(name = "illustrate-1d")]
    Illustrate1d(IllustrateArgs),
    /// Score every unevaluated sample point after a given number of evaluations.
    CriteriaSurface(SurfaceArgs),
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Overrides the seed of the initial design.
    #[arg(long)]
    pub seed_design: Option<u64>,
    /// Overrides the seed of the Monte Carlo sample.
    #[arg(long)]
    pub seed_sample: Option<u64>,
}

impl SeedArgs {
    fn apply(&self, seeds: &mut Seeds) {
        if let Some(s) = self.seed_design {
            seeds.design = s;
        }
        if let Some(s) = self.seed_sample {
            seeds.sample = s;
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Replaces the configured criterion, e.g. `sur1`, `timse:sigma_eps_sq=1`.
    #[arg(long)]
    pub criterion: Option<Criterion>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Use the replication counts and sample sizes of the original experiments.
    #[arg(long)]
    pub paper_scale: bool,
    /// Replaces the configured list of criteria with this one.
    #[arg(long)]
    pub criterion: Option<Criterion>,
}

#[derive(Debug, Args)]
pub struct IllustrateArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long)]
    pub criterion: Option<Criterion>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Number of evaluations (initial design included) at which to score.
    #[arg(long)]
    pub step: usize,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long)]
    pub criterion: Option<Criterion>,
}

/// A run config: a named objective plus the experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub objective: Benchmark,
    pub experiment: ExperimentConfig,
}

impl RunFile {
    pub fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        let d = self.experiment.domain.dim();
        if d != self.objective.dim() {
            return Err(Error::Config(format!(
                "objective takes {} inputs, domain has dimension {d}",
                self.objective.dim()
            )));
        }
        Ok(())
    }
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

pub fn load_run_file(path: &Path) -> Result<RunFile> {
    let file: RunFile = load(path)?;
    file.validate()?;
    Ok(file)
}

pub fn load_study_spec(path: &Path) -> Result<StudySpec> {
    let spec: StudySpec = load(path)?;
    spec.validate()?;
    Ok(spec)
}

/// Process exit status for an error: 2 for bad input, 3 for numerical
/// failures, 1 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Csv(_) => 1,
        e if e.is_numerical() || matches!(e, Error::CoincidentPoints { .. }) => 3,
        _ => 2,
    }
}

/// Writes `name.csv` through `body` and `name.toml` next to it.
fn emit<T: Serialize>(
    out: &Path,
    name: &str,
    config: &T,
    extra: &[(&str, String)],
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let csv_path = out.join(format!("{name}.csv"));
    let mut w = BufWriter::new(File::create(&csv_path)?);
    body(&mut w)?;
    w.flush()?;
    let side = BufWriter::new(File::create(out.join(format!("{name}.toml")))?);
    write_sidecar(side, &format!("metadata for {name}.csv"), config, extra)?;
    info!("wrote {}", csv_path.display());
    Ok(())
}

fn quoted(s: &str) -> String {
    format!("{s:?}")
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Study(args) => cmd_study(args),
        Command::Illustrate1d(args) => cmd_illustrate(args),
        Command::CriteriaSurface(args) => cmd_surface(args),
    }
}

fn run_file_with_overrides(path: &Path, seeds: &SeedArgs, criterion: &Option<Criterion>) -> Result<RunFile> {
    let mut file = load_run_file(path)?;
    seeds.apply(&mut file.experiment.seeds);
    if let Some(c) = criterion {
        file.experiment.criterion = c.clone();
    }
    file.validate()?;
    Ok(file)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let file = run_file_with_overrides(&args.config, &args.seeds, &args.criterion)?;
    fs::create_dir_all(&args.out)?;
    let objective = |x: &[f64]| file.objective.eval(x);
    let trace = Runner::new(&file.experiment, &objective)?.finish()?;
    let extra = [
        ("alpha_m", fmt_f64(trace.alpha_m)),
        ("alpha_hat", fmt_f64(trace.final_estimate())),
        ("evaluations", trace.evaluations.len().to_string()),
    ];
    emit(&args.out, "trace", &file, &extra, |w| trace.write_csv(w))
}

fn cmd_study(args: &StudyArgs) -> Result<()> {
    let mut spec = load_study_spec(&args.config)?;
    if let Some(c) = &args.criterion {
        spec.criteria = vec![c.clone()];
    }
    if args.paper_scale {
        spec = spec.paper_scale();
    }
    spec.validate()?;
    fs::create_dir_all(&args.out)?;
    let reps = ("replications", spec.replications.to_string());
    match spec.study {
        StudyKind::FourBranch { .. } => {
            let report = run_four_branch_study(&spec, args.jobs)?;
            emit(&args.out, "n_gamma", &spec, &[reps], |w| report.write_csv(w))
        }
        StudyKind::GpPaths { .. } => {
            let report = run_gp_path_study(&spec, args.jobs)?;
            let extra = [reps, ("alpha_m_first_path", fmt_f64(report.alpha_m))];
            emit(&args.out, "rmse", &spec, &extra, |w| report.write_csv(w))
        }
        StudyKind::OneDIllustration { .. } => {
            let rows = run_one_d_study(&spec, args.jobs)?;
            emit(&args.out, "one_d", &spec, &[reps], |w| write_one_d_csv(&rows, w))
        }
    }
}

/// Evaluation counts at which the illustration writes summaries and surfaces.
pub const ILLUSTRATION_STEPS: [usize; 3] = [4, 6, 12];

fn cmd_illustrate(args: &IllustrateArgs) -> Result<()> {
    let mut seeds = Seeds::default();
    args.seeds.apply(&mut seeds);
    let mut config = one_d_config(*ILLUSTRATION_STEPS.last().unwrap(), seeds);
    if let Some(c) = &args.criterion {
        config.criterion = c.clone();
    }
    let file = RunFile {
        objective: Benchmark::OneD,
        experiment: config,
    };
    file.validate()?;
    fs::create_dir_all(&args.out)?;
    let objective = |x: &[f64]| file.objective.eval(x);
    let mut runner = Runner::new(&file.experiment, &objective)?;
    for &n in &ILLUSTRATION_STEPS {
        while runner.n() < n {
            runner.step()?;
        }
        let step = [("evaluations", n.to_string())];
        emit(&args.out, &format!("summary_n{n}"), &file, &step, |w| {
            runner.summary().write_csv(&runner.sample().points, w)
        })?;
        if !runner.is_done() {
            write_surface(&args.out, &format!("surface_n{n}"), &file, &runner)?;
        }
    }
    let trace = runner.finish()?;
    let extra = [("alpha_m", fmt_f64(trace.alpha_m)), ("alpha_hat", fmt_f64(trace.final_estimate()))];
    emit(&args.out, "trace", &file, &extra, |w| trace.write_csv(w))
}

fn cmd_surface(args: &SurfaceArgs) -> Result<()> {
    let file = run_file_with_overrides(&args.config, &args.seeds, &args.criterion)?;
    let (n0, budget) = (file.experiment.n0, file.experiment.budget);
    if args.step < n0 || args.step >= budget {
        return Err(Error::Config(format!("step must lie in [n0 = {n0}, budget = {budget}), got {}", args.step)));
    }
    fs::create_dir_all(&args.out)?;
    let objective = |x: &[f64]| file.objective.eval(x);
    let mut runner = Runner::new(&file.experiment, &objective)?;
    while runner.n() < args.step {
        runner.step()?;
    }
    write_surface(&args.out, &format!("surface_n{}", args.step), &file, &runner)
}

/// Criterion scores (smaller is better) at every unevaluated sample point,
/// without pruning. For maximin the score is minus the distance to the design.
pub fn surface(criterion: &Criterion, runner: &Runner) -> Result<(Vec<usize>, Vec<f64>, usize)> {
    if let Criterion::Maximin = criterion {
        let design = runner.model().design().points();
        let mut idx = Vec::new();
        let mut scores = Vec::new();
        for (j, y) in runner.sample().points.rows().enumerate() {
            if !runner.evaluated()[j] {
                idx.push(j);
                scores.push(-design.rows().map(|x| euclidean(x, y)).fold(f64::INFINITY, f64::min));
            }
        }
        let chosen = crate::criteria::maximin_next(design, &runner.sample().points, runner.evaluated())?;
        return Ok((idx, scores, chosen));
    }
    let crit = criterion.clone().with_m0(PruneSize::All);
    let sel = select_next(&crit, runner.model(), runner.batch(), runner.summary(), runner.evaluated())?;
    Ok((sel.searched_indices, sel.scores, sel.chosen_index))
}

fn write_surface(out: &Path, name: &str, file: &RunFile, runner: &Runner) -> Result<()> {
    let (idx, scores, chosen) = surface(&file.experiment.criterion, runner)?;
    let points = &runner.sample().points;
    let extra = [
        ("evaluations", runner.n().to_string()),
        ("criterion", quoted(&file.experiment.criterion.to_string())),
        ("argmin_index", chosen.to_string()),
        ("argmin_point", format!("{:?}", rows(&points.select(&[chosen]))[0])),
    ];
    emit(out, name, file, &extra, |w| {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["index".to_string()];
        header.extend((1..=points.dim()).map(|k| format!("y{k}")));
        header.push("score".into());
        w.write_record(&header)?;
        for (&j, &s) in idx.iter().zip(&scores) {
            let mut rec = vec![j.to_string()];
            rec.extend(points.row(j).iter().map(|v| fmt_f64(*v)));
            rec.push(fmt_f64(s));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })
}
