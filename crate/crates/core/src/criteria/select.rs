//! Pruning, the space-filling reference strategy and the selection step.

use crate::error::{Error, Result};
use crate::estimators::PosteriorSummary;
use crate::gp::{euclidean, BatchPredictor, KrigingModel, Points};

use super::config::{Criterion, PruneMode, PruneSize};
use super::marginal::{j_ech, j_rb};
use super::quadrature::gauss_hermite;
use super::sur::{sur_scores, timse_scores};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen_index: usize,
    /// Criterion values (smaller is better) over `searched_indices`.
    pub scores: Vec<f64>,
    pub searched_indices: Vec<usize>,
}

/// Indices of the `m0` largest misclassification probabilities, ties going
/// to the lower index, returned in increasing order.
pub fn prune(summary: &PosteriorSummary, m0: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..summary.len()).collect();
    prune_among(&summary.tau, m0, &all)
}

/// [`prune`] restricted to `indices` (assumed increasing).
pub fn prune_among(tau: &[f64], m0: usize, indices: &[usize]) -> Vec<usize> {
    if m0 >= indices.len() {
        return indices.to_vec();
    }
    let mut order = indices.to_vec();
    order.sort_by(|a, b| tau[*b].total_cmp(&tau[*a]).then(a.cmp(b)));
    order.truncate(m0);
    order.sort_unstable();
    order
}

/// Unevaluated sample index farthest from the design, ties to the lowest index.
pub fn maximin_next(design: &Points, sample: &Points, evaluated: &[bool]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, y) in sample.rows().enumerate() {
        if evaluated.get(j).copied().unwrap_or(false) {
            continue;
        }
        let d = design.rows().map(|x| euclidean(x, y)).fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, b)| d > b) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::EmptyCandidateSet)
}

fn argmin(indices: &[usize], scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&j, &s) in indices.iter().zip(scores) {
        if s.is_finite() && best.map_or(true, |(_, b)| s < b) {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j)
}

/// Picks the next sample index to evaluate. Pure in its inputs; never
/// returns an index flagged in `evaluated`.
pub fn select_next(
    criterion: &Criterion,
    model: &KrigingModel,
    batch: &BatchPredictor,
    summary: &PosteriorSummary,
    evaluated: &[bool],
) -> Result<SelectionResult> {
    let open: Vec<usize> = (0..batch.len()).filter(|j| !evaluated.get(*j).copied().unwrap_or(false)).collect();
    if open.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    if let Criterion::Maximin = criterion {
        let chosen = maximin_next(model.design().points(), batch.points(), evaluated)?;
        return Ok(SelectionResult {
            chosen_index: chosen,
            scores: vec![],
            searched_indices: vec![chosen],
        });
    }

    let sets = |m0: &PruneSize, mode: &PruneMode| -> (Vec<usize>, Vec<usize>) {
        match m0 {
            PruneSize::All => ((0..batch.len()).collect(), open.clone()),
            PruneSize::Top(k) => {
                let candidates = prune_among(&summary.tau, *k, &open);
                let integrand = match mode {
                    PruneMode::Both => prune(summary, *k),
                    PruneMode::CandidatesOnly => (0..batch.len()).collect(),
                };
                (integrand, candidates)
            }
        }
    };

    let (candidates, raw): (Vec<usize>, Vec<f64>) = match criterion {
        Criterion::Sur { variant, q, m0, prune_mode } => {
            let rule = gauss_hermite(*q)?;
            let (integrand, candidates) = sets(m0, prune_mode);
            let s = sur_scores(model, batch, summary, &rule, &integrand, &candidates);
            (candidates, s.variant(*variant).to_vec())
        }
        Criterion::Timse { sigma_eps_sq, m0, prune_mode } => {
            let (integrand, candidates) = sets(m0, prune_mode);
            let s = timse_scores(model, batch, summary, *sigma_eps_sq, &integrand, &candidates);
            (candidates, s)
        }
        Criterion::Rb { kappa, delta } => {
            let all = j_rb(summary, *kappa, *delta)?;
            (open.clone(), open.iter().map(|&j| -all[j]).collect())
        }
        Criterion::Ech => {
            let all = j_ech(summary);
            (open.clone(), open.iter().map(|&j| -all[j]).collect())
        }
        Criterion::Maximin => unreachable!(),
    };

    let chosen = argmin(&candidates, &raw).ok_or(Error::EmptyCandidateSet)?;
    let (searched_indices, scores) = candidates
        .iter()
        .zip(&raw)
        .filter(|(_, s)| s.is_finite())
        .map(|(j, s)| (*j, *s))
        .unzip();
    Ok(SelectionResult {
        chosen_index: chosen,
        scores,
        searched_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary_with_tau(tau: &[f64]) -> PosteriorSummary {
        PosteriorSummary {
            mean: vec![0.0; tau.len()],
            sd: vec![1.0; tau.len()],
            p: tau.to_vec(),
            tau: tau.to_vec(),
            nu: tau.iter().map(|t| t * (1.0 - t)).collect(),
            threshold: 0.0,
        }
    }

    #[test]
    fn pruning_examples() {
        let s = summary_with_tau(&[0.0, 0.5, 0.2]);
        assert_eq!(prune(&s, 2), vec![1, 2]);
        assert_eq!(prune(&s, 3), vec![0, 1, 2]);
        assert_eq!(prune(&s, 10), vec![0, 1, 2]);
        assert_eq!(prune(&summary_with_tau(&[0.3, 0.3]), 1), vec![0]);
        assert_eq!(prune_among(&[0.1, 0.4, 0.4, 0.2], 2, &[0, 2, 3]), vec![2, 3]);
    }

    #[test]
    fn maximin_examples() {
        let design = Points::from_rows(&[[0.5, 0.5]]).unwrap();
        let sample = Points::from_rows(&[[0.4, 0.6], [0.05, 0.98], [0.7, 0.2], [0.02, 0.01]]).unwrap();
        assert_eq!(maximin_next(&design, &sample, &[false; 4]).unwrap(), 3);
        assert_eq!(maximin_next(&design, &sample, &[false, false, false, true]).unwrap(), 1);
        assert!(maximin_next(&design, &sample, &[true; 4]).is_err());
    }
}
