//! Matérn correlation and the anisotropic Matérn covariance.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::special::bessel_k_scaled;

/// Scaled distances beyond which the correlation underflows to zero.
const UNDERFLOW_ARGUMENT: f64 = 740.0;

/// Matérn correlation `κ_ν(h)` in the parameterization where
/// `κ_ν(h) = (2√ν h)^ν K_ν(2√ν h) / (2^{ν−1} Γ(ν))`.
pub fn matern_correlation(h: f64, smoothness: f64) -> Result<f64> {
    if !h.is_finite() || !smoothness.is_finite() {
        return Err(Error::NonFinite("matern_correlation"));
    }
    if h < 0.0 {
        return Err(Error::InvalidArgument(format!("negative distance {h}")));
    }
    if smoothness <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "smoothness must be positive, got {smoothness}"
        )));
    }
    Ok(Matern::new(smoothness).correlation(h))
}

/// Matérn correlation with the normalizing constant precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matern {
    nu: f64,
    scale: f64,
    log_norm: f64,
}

impl Matern {
    pub fn new(nu: f64) -> Self {
        Self {
            nu,
            scale: 2.0 * nu.sqrt(),
            log_norm: (nu - 1.0) * std::f64::consts::LN_2 + ln_gamma(nu),
        }
    }

    pub fn smoothness(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn correlation(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 1.0;
        }
        let x = self.scale * h;
        if x > UNDERFLOW_ARGUMENT {
            return 0.0;
        }
        let log_k = bessel_k_scaled(self.nu, x).ln() - x;
        (self.nu * x.ln() + log_k - self.log_norm).exp().min(1.0)
    }
}

/// Parameters of the anisotropic Matérn covariance
/// `k(x, y) = σ² κ_ν(√Σ (x_i − y_i)² / ρ_i²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovarianceSpec", into = "RawCovarianceSpec")]
pub struct CovarianceSpec {
    variance: f64,
    ranges: Vec<f64>,
    matern: Matern,
}

#[derive(Serialize, Deserialize)]
struct RawCovarianceSpec {
    variance: f64,
    smoothness: f64,
    ranges: Vec<f64>,
}

impl TryFrom<RawCovarianceSpec> for CovarianceSpec {
    type Error = Error;

    fn try_from(raw: RawCovarianceSpec) -> Result<Self> {
        CovarianceSpec::new(raw.variance, raw.smoothness, raw.ranges)
    }
}

impl From<CovarianceSpec> for RawCovarianceSpec {
    fn from(spec: CovarianceSpec) -> Self {
        RawCovarianceSpec {
            variance: spec.variance,
            smoothness: spec.smoothness(),
            ranges: spec.ranges,
        }
    }
}

impl CovarianceSpec {
    pub fn new(variance: f64, smoothness: f64, ranges: Vec<f64>) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(variance) {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {variance}")));
        }
        if !positive(smoothness) {
            return Err(Error::InvalidArgument(format!(
                "smoothness must be positive, got {smoothness}"
            )));
        }
        if ranges.is_empty() {
            return Err(Error::InvalidArgument("at least one range is required".into()));
        }
        if let Some(bad) = ranges.iter().find(|&&r| !positive(r)) {
            return Err(Error::InvalidArgument(format!("ranges must be positive, got {bad}")));
        }
        Ok(Self {
            variance,
            ranges,
            matern: Matern::new(smoothness),
        })
    }

    pub fn isotropic(variance: f64, smoothness: f64, range: f64, dim: usize) -> Result<Self> {
        Self::new(variance, smoothness, vec![range; dim])
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn smoothness(&self) -> f64 {
        self.matern.smoothness()
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn matern(&self) -> &Matern {
        &self.matern
    }

    pub fn with_variance(&self, variance: f64) -> Result<Self> {
        Self::new(variance, self.smoothness(), self.ranges.clone())
    }

    /// `θ = (log σ², log ν, −log ρ_1, …, −log ρ_d)`.
    pub fn to_theta(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.dim() + 2);
        theta.push(self.variance.ln());
        theta.push(self.smoothness().ln());
        theta.extend(self.ranges.iter().map(|r| -r.ln()));
        theta
    }

    pub fn from_theta(theta: &[f64]) -> Result<Self> {
        if theta.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "theta needs at least 3 entries, got {}",
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("theta"));
        }
        Self::new(
            theta[0].exp(),
            theta[1].exp(),
            theta[2..].iter().map(|t| (-t).exp()).collect(),
        )
    }

    /// Scaled Euclidean distance between two points.
    #[inline]
    pub fn scaled_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.ranges)
            .map(|((a, b), r)| {
                let t = (a - b) / r;
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Covariance without dimension checks; hot path of every kriging routine.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.variance * self.matern.correlation(self.scaled_distance(x, y))
    }

    pub fn covariance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("covariance argument"));
            }
        }
        Ok(self.eval(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // (ν, h, κ_ν(h)) at 50-digit precision.
    const MATERN: &[(f64, f64, f64)] = &[
        (0.3, 0.001, 0.98402658580902636608),
        (0.3, 0.1, 0.75053659345729194974),
        (0.3, 1.0, 0.21171026561634847633),
        (0.3, 20.0, 1.1176123724754432479e-10),
        (0.5, 0.01, 0.98595739463371196864),
        (0.5, 0.5, 0.49306869139523978785),
        (0.5, 5.0, 0.00084932570471916970069),
        (1.0, 0.1, 0.95519450864409444975),
        (1.0, 2.0, 0.049933995549073725882),
        (1.5, 0.5, 0.65370269421211243497),
        (1.5, 20.0, 2.6477914725236696177e-20),
        (2.0, 0.001, 0.99999800002693588383),
        (2.0, 0.01, 0.99980017726883239073),
        (2.0, 0.1, 0.9808589940687996027),
        (2.0, 0.5, 0.6834847343583171968),
        (2.0, 1.0, 0.30923457000889912594),
        (2.0, 2.0, 0.039929602697015961856),
        (2.0, 5.0, 0.000027324481311659172783),
        (2.5, 1.0, 0.31728336395404380402),
        (3.7, 0.5, 0.7279669373808186232),
        (3.7, 5.0, 3.6978871626824502627e-6),
        (7.0, 0.1, 0.98841452637081129266),
        (7.0, 20.0, 5.4028442150795602428e-38),
    ];

    #[test]
    fn correlation_matches_high_precision_values() {
        for &(nu, h, expected) in MATERN {
            let got = matern_correlation(h, nu).unwrap();
            let rel = ((got - expected) / expected).abs();
            assert!(rel < 1e-12, "κ_{nu}({h}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn half_smoothness_is_exponential() {
        // κ_{1/2}(h) = exp(−√2 h) in this parameterization.
        for &h in &[0.0, 0.1, 0.5, 1.3, 4.0] {
            let got = matern_correlation(h, 0.5).unwrap();
            assert!((got - (-(2f64).sqrt() * h).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn correlation_limits_and_errors() {
        assert_eq!(matern_correlation(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(matern_correlation(1e6, 2.0).unwrap(), 0.0);
        assert!(matern_correlation(f64::NAN, 2.0).is_err());
        assert!(matern_correlation(1.0, f64::INFINITY).is_err());
        assert!(matern_correlation(-1.0, 2.0).is_err());
        assert!(matern_correlation(1.0, 0.0).is_err());
    }

    #[test]
    fn correlation_decreases_on_grid() {
        for &nu in &[0.3, 0.5, 1.0, 2.0, 4.5] {
            let mut prev = 1.0;
            for i in 1..400 {
                let v = matern_correlation(i as f64 * 0.01, nu).unwrap();
                assert!(v > 0.0 && v < prev, "ν = {nu}, step {i}");
                prev = v;
            }
        }
    }

    #[test]
    fn covariance_basic_properties() {
        let spec = CovarianceSpec::new(2.5, 2.0, vec![1.0, 2.0]).unwrap();
        let x = [0.3, -1.0];
        assert_eq!(spec.covariance(&x, &x).unwrap(), 2.5);
        let a = spec.covariance(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let b = spec.covariance(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            spec.covariance(&[0.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(CovarianceSpec::new(0.0, 2.0, vec![1.0]).is_err());
        assert!(CovarianceSpec::new(1.0, -2.0, vec![1.0]).is_err());
        assert!(CovarianceSpec::new(1.0, 2.0, vec![1.0, 0.0]).is_err());
        assert!(CovarianceSpec::new(1.0, 2.0, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn theta_round_trip(
            log_var in -10.0..10.0f64,
            log_nu in -2.0..2.5f64,
            log_ranges in proptest::collection::vec(-6.0..6.0f64, 1..4),
        ) {
            let spec = CovarianceSpec::new(
                log_var.exp(), log_nu.exp(), log_ranges.iter().map(|r| r.exp()).collect(),
            ).unwrap();
            let back = CovarianceSpec::from_theta(&spec.to_theta()).unwrap();
            prop_assert!((back.variance() / spec.variance() - 1.0).abs() < 1e-14);
            prop_assert!((back.smoothness() / spec.smoothness() - 1.0).abs() < 1e-14);
            for (a, b) in back.ranges().iter().zip(spec.ranges()) {
                prop_assert!((a / b - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn covariance_is_symmetric(
            x in proptest::collection::vec(-3.0..3.0f64, 2),
            y in proptest::collection::vec(-3.0..3.0f64, 2),
        ) {
            let spec = CovarianceSpec::new(1.7, 1.3, vec![0.4, 2.2]).unwrap();
            prop_assert_eq!(spec.eval(&x, &y), spec.eval(&y, &x));
        }
    }
}
