//! Excursion probabilities and the two probability-of-failure estimators
//! over a fixed Monte Carlo sample.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{BatchPredictor, KrigingModel, Points};
use crate::special::normal_cdf;

/// Beyond this many standard deviations the excursion probability is set
/// to exactly 0 or 1.
pub const SATURATION_Z: f64 = 8.3;

/// Distribution of the uncertain inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputLaw {
    /// Independent uniforms on `[lower_i, upper_i]`.
    Uniform { lower: Vec<f64>, upper: Vec<f64> },
    /// Independent normals.
    Normal { mean: Vec<f64>, sd: Vec<f64> },
}

impl InputLaw {
    pub fn uniform_unit(dim: usize) -> Self {
        InputLaw::Uniform {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn standard_normal(dim: usize) -> Self {
        InputLaw::Normal {
            mean: vec![0.0; dim],
            sd: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InputLaw::Uniform { lower, .. } => lower.len(),
            InputLaw::Normal { mean, .. } => mean.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InputLaw::Uniform { lower, upper } => {
                lower.len() == upper.len()
                    && !lower.is_empty()
                    && lower.iter().zip(upper).all(|(a, b)| a.is_finite() && b.is_finite() && a < b)
            }
            InputLaw::Normal { mean, sd } => {
                mean.len() == sd.len()
                    && !mean.is_empty()
                    && mean.iter().all(|v| v.is_finite())
                    && sd.iter().all(|s| s.is_finite() && *s > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid input law {self:?}")))
        }
    }

    /// Whether `x` lies in the support.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            InputLaw::Uniform { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (a, b))| a <= v && v <= b)
            }
            InputLaw::Normal { .. } => x.iter().all(|v| v.is_finite()),
        }
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            InputLaw::Uniform { lower, upper } => {
                for (a, b) in lower.iter().zip(upper) {
                    out.push(a + (b - a) * rng.gen::<f64>());
                }
            }
            InputLaw::Normal { mean, sd } => {
                for (mu, s) in mean.iter().zip(sd) {
                    let e: f64 = StandardNormal.sample(rng);
                    out.push(mu + s * e);
                }
            }
        }
    }
}

/// `m` i.i.d. draws from the input law, each with weight `1/m`.
#[derive(Debug, Clone)]
pub struct MCSample {
    pub points: Points,
    pub law: InputLaw,
    pub seed: u64,
}

impl MCSample {
    /// Deterministic in `(law, m, seed)`.
    pub fn draw(law: &InputLaw, m: usize, seed: u64) -> Result<Self> {
        law.validate()?;
        if m == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(m * law.dim());
        for _ in 0..m {
            law.sample_into(&mut rng, &mut data);
        }
        Ok(Self {
            points: Points::from_flat(law.dim(), data)?,
            law: law.clone(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// Posterior excursion probability `P(ξ(x) > u)` from the kriging mean and sd.
pub fn excursion_probability(mean: f64, sd: f64, threshold: f64) -> Result<f64> {
    if !mean.is_finite() || !threshold.is_finite() {
        return Err(Error::NonFinite("excursion probability input"));
    }
    if !(sd >= 0.0) || !sd.is_finite() {
        return Err(Error::InvalidArgument(format!("standard deviation must be non-negative, got {sd}")));
    }
    Ok(excursion_probability_unchecked(mean, sd, threshold))
}

#[inline]
pub(crate) fn excursion_probability_unchecked(mean: f64, sd: f64, threshold: f64) -> f64 {
    let d = mean - threshold;
    if sd == 0.0 {
        return if d > 0.0 {
            1.0
        } else if d < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    let z = d / sd;
    if z > SATURATION_Z {
        1.0
    } else if z < -SATURATION_Z {
        0.0
    } else {
        normal_cdf(z)
    }
}

/// Per-point posterior quantities on the Monte Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Excursion probabilities `p_n(Y_j)`.
    pub p: Vec<f64>,
    /// Misclassification probabilities `min(p, 1 − p)`.
    pub tau: Vec<f64>,
    /// `p (1 − p)`.
    pub nu: Vec<f64>,
    pub threshold: f64,
}

impl PosteriorSummary {
    pub fn from_moments(mean: Vec<f64>, variance: &[f64], threshold: f64) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: variance.len(),
            });
        }
        let sd: Vec<f64> = variance.iter().map(|v| v.max(0.0).sqrt()).collect();
        let mut p = Vec::with_capacity(mean.len());
        for (mu, s) in mean.iter().zip(&sd) {
            p.push(excursion_probability(*mu, *s, threshold)?);
        }
        let tau = p.iter().map(|p| p.min(1.0 - p)).collect();
        let nu = p.iter().map(|p| p * (1.0 - p)).collect();
        Ok(Self {
            mean,
            sd,
            p,
            tau,
            nu,
            threshold,
        })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Writes `index, y_1…y_d, mean, sd, p, tau, nu`.
    pub fn write_csv<W: Write>(&self, points: &Points, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string()];
        header.extend((1..=points.dim()).map(|k| format!("y{k}")));
        header.extend(["mean", "sd", "p", "tau", "nu"].map(String::from));
        w.write_record(&header)?;
        for j in 0..self.len() {
            let mut rec = vec![j.to_string()];
            rec.extend(points.row(j).iter().map(|v| fmt_f64(*v)));
            for v in [self.mean[j], self.sd[j], self.p[j], self.tau[j], self.nu[j]] {
                rec.push(fmt_f64(v));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Kriging summary of `model` on every sample point.
pub fn summarize(model: &KrigingModel, sample: &MCSample, threshold: f64) -> Result<PosteriorSummary> {
    let mut mean = Vec::with_capacity(sample.len());
    let mut var = Vec::with_capacity(sample.len());
    for y in sample.points.rows() {
        let pred = model.predict(y)?;
        mean.push(pred.mean);
        var.push(pred.variance);
    }
    PosteriorSummary::from_moments(mean, &var, threshold)
}

/// Same as [`summarize`], from a cached batch predictor.
pub fn summarize_batch(batch: &BatchPredictor, threshold: f64) -> Result<PosteriorSummary> {
    PosteriorSummary::from_moments(batch.mean().to_vec(), batch.variance(), threshold)
}

/// Posterior mean of the Monte Carlo estimator, `(1/m) Σ p_j`.
pub fn alpha_posterior_mean(summary: &PosteriorSummary) -> f64 {
    mean_of(&summary.p)
}

/// Failure probability of the kriging mean surface, `(1/m) Σ 1{mean_j > u}`.
pub fn alpha_plugin(summary: &PosteriorSummary) -> f64 {
    let hits = summary.mean.iter().filter(|m| **m > summary.threshold).count();
    ratio(hits, summary.len())
}

/// The Monte Carlo estimator `(1/m) Σ 1{f(Y_j) > u}`.
pub fn mc_reference(values: &[f64], threshold: f64) -> f64 {
    ratio(values.iter().filter(|v| **v > threshold).count(), values.len())
}

fn mean_of(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn ratio(k: usize, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        k as f64 / m as f64
    }
}

/// Shortest decimal representation that round-trips to the same `f64`
/// (never more than 17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
