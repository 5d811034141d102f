//! Pointwise criteria: Ranjan/Bichon expected feasibility and Echard's
//! misclassification probability.

use crate::error::{Error, Result};
use crate::estimators::PosteriorSummary;
use crate::special::{normal_cdf, normal_pdf, normal_quantile};

/// `G_{κ,δ}(p) = E max(0, κ^δ − |Φ⁻¹(p) + U|^δ)` with `U ~ N(0, 1)`.
pub fn g_closed(p: f64, kappa: f64, delta: u8) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    check_params(kappa, delta)?;
    Ok(g_of_t(normal_quantile(1.0 - p), kappa, delta))
}

fn check_params(kappa: f64, delta: u8) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    if delta != 1 && delta != 2 {
        return Err(Error::InvalidArgument(format!("delta must be 1 or 2, got {delta}")));
    }
    Ok(())
}

/// `G` as a function of `t = Φ⁻¹(1 − p)`. Even in `t`; evaluated at `−|t|`
/// where the normal tail is accurate.
pub(crate) fn g_of_t(t: f64, kappa: f64, delta: u8) -> f64 {
    let t = -t.abs();
    let (tp, tm) = (t + kappa, t - kappa);
    let (cp, cm, c0) = (normal_cdf(tp), normal_cdf(tm), normal_cdf(t));
    let (dp, dm, d0) = (normal_pdf(tp), normal_pdf(tm), normal_pdf(t));
    let g = match delta {
        1 => kappa * (cp - cm) - t * (2.0 * c0 - cp - cm) - (2.0 * d0 - dp - dm),
        _ => (kappa * kappa - 1.0 - t * t) * (cp - cm) - 2.0 * t * (dp - dm) + tp * dp - tm * dm,
    };
    g.max(0.0)
}

/// `σ_n^δ G_{κ,δ}(p_n)` per sample point; larger is better.
pub fn j_rb(summary: &PosteriorSummary, kappa: f64, delta: u8) -> Result<Vec<f64>> {
    check_params(kappa, delta)?;
    Ok(summary
        .mean
        .iter()
        .zip(&summary.sd)
        .map(|(&mu, &sd)| {
            if sd == 0.0 {
                0.0
            } else {
                sd.powi(delta as i32) * g_of_t((summary.threshold - mu) / sd, kappa, delta)
            }
        })
        .collect())
}

/// Misclassification probability per sample point; larger is better.
pub fn j_ech(summary: &PosteriorSummary) -> Vec<f64> {
    summary.tau.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_peaked() {
        for kappa in [0.5, 1.0, 2.0] {
            for delta in [1, 2] {
                for k in 1..50 {
                    let p = k as f64 / 100.0;
                    let a = g_closed(p, kappa, delta).unwrap();
                    let b = g_closed(1.0 - p, kappa, delta).unwrap();
                    assert!((a - b).abs() < 1e-12);
                    assert!(a < g_closed(0.5, kappa, delta).unwrap());
                }
                assert!(g_closed(1e-30, kappa, delta).unwrap() < 1e-15);
            }
        }
        assert!(g_closed(0.0, 1.0, 1).is_err());
        assert!(g_closed(0.5, 1.0, 3).is_err());
        assert!(g_closed(0.5, -1.0, 1).is_err());
    }

    #[test]
    fn center_values() {
        // At p = 1/2: δ = 1 gives κ(2Φ(κ)−1) − 2(φ(0)−φ(κ)); δ = 2 gives
        // (κ²−1)(2Φ(κ)−1) + 2κφ(κ).
        let k: f64 = 1.3;
        let g1 = k * (2.0 * normal_cdf(k) - 1.0) - 2.0 * (normal_pdf(0.0) - normal_pdf(k));
        let g2 = (k * k - 1.0) * (2.0 * normal_cdf(k) - 1.0) + 2.0 * k * normal_pdf(k);
        assert!((g_closed(0.5, k, 1).unwrap() - g1).abs() < 1e-15);
        assert!((g_closed(0.5, k, 2).unwrap() - g2).abs() < 1e-15);
    }

    #[test]
    fn pointwise_scores() {
        let s = PosteriorSummary::from_moments(vec![2.0, 1.0, 0.0, 1.0], &[0.0, 0.25, 0.25, 0.25], 1.0).unwrap();
        let rb = j_rb(&s, 2.0, 1).unwrap();
        assert_eq!(rb[0], 0.0);
        assert!(rb[1] > rb[2]);
        let ech = j_ech(&s);
        assert_eq!(ech[1], 0.5);
        assert_eq!(ech[0], 0.0);
        let direct = 1.0 - normal_cdf((1.0f64 - 0.0).abs() / 0.5);
        assert!((ech[2] - direct).abs() < 1e-15);
    }
}
