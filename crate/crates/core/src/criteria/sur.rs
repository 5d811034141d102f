//! One-step lookahead criteria: the four SUR variants and tIMSE.
//!
//! For a candidate `c` the posterior after observing `z` at `c` is
//!
//! ```text
//! mean_{n+1}(y) = mean_n(y) + k_n(y, c) / v_c · (z − mean_n(c))
//! var_{n+1}(y)  = var_n(y) − k_n(y, c)² / v_c
//! ```
//!
//! with `v_c` the variance of the new observation. Only the mean depends on
//! `z`, so one covariance column per candidate suffices.

use std::f64::consts::SQRT_2;

use crate::estimators::{PosteriorSummary, SATURATION_Z};
use crate::gp::{BatchPredictor, KrigingModel};
use crate::special::{normal_cdf, normal_pdf};

use super::quadrature::QuadratureRule;

/// Candidates whose kriging variance is below this fraction of σ² (or twice
/// the nugget) cannot be told apart from design points.
const MIN_RELATIVE_VARIANCE: f64 = 1e-14;
/// Columns of the covariance block computed at once.
const BLOCK: usize = 256;

/// Scores of the four SUR variants at each candidate (smaller is better).
#[derive(Debug, Clone, PartialEq)]
pub struct SurScores {
    pub variants: [Vec<f64>; 4],
}

impl SurScores {
    pub fn variant(&self, v: u8) -> &[f64] {
        &self.variants[(v - 1) as usize]
    }
}

fn candidate_variance(model: &KrigingModel, batch: &BatchPredictor, c: usize) -> Option<f64> {
    let var = batch.variance()[c];
    (var > (MIN_RELATIVE_VARIANCE * model.covariance().variance()).max(2.0 * model.nugget())).then_some(var)
}

/// Evaluates all four SUR variants over `candidates`, integrating over the
/// sample points listed in `integrand`. Sums are normalized by the full
/// sample size. Candidates at zero variance score `+∞`.
pub fn sur_scores(
    model: &KrigingModel,
    batch: &BatchPredictor,
    summary: &PosteriorSummary,
    rule: &QuadratureRule,
    integrand: &[usize],
    candidates: &[usize],
) -> SurScores {
    let m = batch.len() as f64;
    let u = summary.threshold;
    let nq = rule.len();
    let max_node = rule.nodes.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(candidates.len()));
    let mut sums = vec![[0.0f64; 4]; nq];
    // Since |k_n(y, c)| ≤ σ_n(y) σ_n(c), the mean shift at y never exceeds
    // σ_n(y) √2 max|u_q|: points farther than that plus the saturation
    // margin from the threshold contribute nothing for any candidate.
    let reach = SATURATION_Z + SQRT_2 * max_node;
    let integrand: Vec<usize> = integrand
        .iter()
        .copied()
        .filter(|&j| (summary.mean[j] - u).abs() <= reach * batch.variance()[j].sqrt())
        .collect();
    let integrand = &integrand[..];

    for chunk in candidates.chunks(BLOCK) {
        let block = batch.covariance_block(model, integrand, chunk);
        for (col, &c) in chunk.iter().enumerate() {
            let Some(var_c) = candidate_variance(model, batch, c) else {
                out.iter_mut().for_each(|o| o.push(f64::INFINITY));
                continue;
            };
            let denom = var_c + model.nugget();
            let sd_c = var_c.sqrt();
            sums.iter_mut().for_each(|s| *s = [0.0; 4]);
            for (row, &j) in integrand.iter().enumerate() {
                let k = block[(row, col)];
                let var_new = (batch.variance()[j] - k * k / denom).max(0.0);
                let sd_new = var_new.sqrt();
                let gap = summary.mean[j] - u;
                // Mean shift per unit node: z − mean_c = sd_c u_q √2.
                let shift = k / denom * sd_c * SQRT_2;
                if gap.abs() - shift.abs() * max_node > SATURATION_Z * sd_new {
                    continue;
                }
                for (s, node) in sums.iter_mut().zip(&rule.nodes) {
                    let tau = misclassification(gap + shift * node, sd_new);
                    if tau > 0.0 {
                        let nu = tau * (1.0 - tau);
                        s[0] += tau.sqrt();
                        s[1] += nu.sqrt();
                        s[2] += tau;
                        s[3] += nu;
                    }
                }
            }
            let mut scores = [0.0; 4];
            for (s, w) in sums.iter().zip(&rule.weights) {
                scores[0] += w * (s[0] / m).powi(2);
                scores[1] += w * (s[1] / m).powi(2);
                scores[2] += w * s[2] / m;
                scores[3] += w * s[3] / m;
            }
            for (o, s) in out.iter_mut().zip(scores) {
                o.push(s);
            }
        }
    }
    SurScores { variants: out }
}

/// `min(p, 1 − p)` for a Gaussian with mean `gap` above the threshold,
/// saturated the same way as the excursion probability.
#[inline]
fn misclassification(gap: f64, sd: f64) -> f64 {
    let a = gap.abs();
    if sd == 0.0 {
        return if a == 0.0 { 0.5 } else { 0.0 };
    }
    let z = a / sd;
    if z > SATURATION_Z {
        0.0
    } else {
        normal_cdf(-z)
    }
}

/// Targeted IMSE: `(1/m) Σ_j var_{n+1}(Y_j) W_n(Y_j)` with the current
/// weight `W_n(y) = φ((mean_n(y) − u)/s) / s`, `s² = σ_ε² + var_n(y)`.
pub fn timse_scores(
    model: &KrigingModel,
    batch: &BatchPredictor,
    summary: &PosteriorSummary,
    sigma_eps_sq: f64,
    integrand: &[usize],
    candidates: &[usize],
) -> Vec<f64> {
    let m = batch.len() as f64;
    let weights: Vec<f64> = integrand
        .iter()
        .map(|&j| {
            let s = (sigma_eps_sq + batch.variance()[j]).sqrt();
            if s > 0.0 {
                normal_pdf((summary.mean[j] - summary.threshold) / s) / s
            } else {
                0.0
            }
        })
        .collect();
    let mut out = Vec::with_capacity(candidates.len());
    for chunk in candidates.chunks(BLOCK) {
        let block = batch.covariance_block(model, integrand, chunk);
        for (col, &c) in chunk.iter().enumerate() {
            let Some(var_c) = candidate_variance(model, batch, c) else {
                out.push(f64::INFINITY);
                continue;
            };
            let denom = var_c + model.nugget();
            let score: f64 = integrand
                .iter()
                .enumerate()
                .map(|(row, &j)| {
                    let k = block[(row, col)];
                    (batch.variance()[j] - k * k / denom).max(0.0) * weights[row]
                })
                .sum();
            out.push(score / m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::gauss_hermite;
    use crate::estimators::summarize_batch;
    use crate::gp::{CovarianceSpec, Design, FitOptions, Points, TrendSpec};

    fn state() -> (KrigingModel, BatchPredictor, PosteriorSummary) {
        let pts = Points::from_rows(&[[0.1], [0.5], [0.85]]).unwrap();
        let design = Design::new(pts, vec![0.2, 1.4, -0.3]).unwrap();
        let cov = CovarianceSpec::new(1.0, 2.0, vec![0.25]).unwrap();
        let model = KrigingModel::fit(design, TrendSpec::constant(), cov, FitOptions::default()).unwrap();
        let sample = Points::from_rows(&(0..41).map(|i| [i as f64 / 40.0]).collect::<Vec<_>>()).unwrap();
        let batch = BatchPredictor::new(&model, sample).unwrap();
        let summary = summarize_batch(&batch, 0.6).unwrap();
        (model, batch, summary)
    }

    #[test]
    fn cauchy_schwarz_and_nonnegativity() {
        let (model, batch, summary) = state();
        let all: Vec<usize> = (0..batch.len()).collect();
        let s = sur_scores(&model, &batch, &summary, &gauss_hermite(12).unwrap(), &all, &all);
        for i in 0..all.len() {
            for v in 0..4 {
                assert!(s.variants[v][i] >= 0.0);
            }
            assert!(s.variants[0][i] <= s.variants[2][i] + 1e-10);
            assert!(s.variants[1][i] <= s.variants[3][i] + 1e-10);
        }
        // Sample point 4 (x = 0.1) is a design point.
        assert!(s.variants[0][4].is_infinite());
    }

    #[test]
    fn node_order_does_not_matter() {
        let (model, batch, summary) = state();
        let all: Vec<usize> = (0..batch.len()).collect();
        let rule = gauss_hermite(12).unwrap();
        let mut rev = rule.clone();
        rev.nodes.reverse();
        rev.weights.reverse();
        let a = sur_scores(&model, &batch, &summary, &rule, &all, &all);
        let b = sur_scores(&model, &batch, &summary, &rev, &all, &all);
        for v in 0..4 {
            for (x, y) in a.variants[v].iter().zip(&b.variants[v]) {
                assert!(x == y || (x - y).abs() <= 1e-12 * x.abs());
            }
        }
    }

    #[test]
    fn certain_integrand_scores_zero() {
        let (model, batch, summary) = state();
        // Design points: x = 0.1, 0.5, 0.85 are sample indices 4, 20, 34.
        let integrand = [4, 20, 34];
        let s = sur_scores(&model, &batch, &summary, &gauss_hermite(12).unwrap(), &integrand, &[10, 27]);
        for v in 0..4 {
            assert_eq!(s.variants[v], vec![0.0, 0.0]);
        }
    }

    #[test]
    fn timse_flat_weight_matches_imse_ranking() {
        let (model, batch, summary) = state();
        let all: Vec<usize> = (0..batch.len()).collect();
        let cand: Vec<usize> = all.iter().copied().filter(|j| ![4, 20, 34].contains(j)).collect();
        let t = timse_scores(&model, &batch, &summary, 1e6, &all, &cand);
        let imse = timse_scores(&model, &batch, &PosteriorSummary { mean: vec![summary.threshold; all.len()], ..summary.clone() }, 1e6, &all, &cand);
        let rank = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
            idx
        };
        assert_eq!(rank(&t), rank(&imse));
        assert!(t.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}
