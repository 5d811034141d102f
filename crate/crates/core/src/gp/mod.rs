//! Gaussian process machinery: Matérn covariance, universal kriging,
//! covariance parameter estimation and unconditional path simulation.

pub mod batch;
pub mod covariance;
pub mod design;
pub mod estimation;
pub mod kriging;
pub mod simulate;
pub mod trend;

pub use batch::BatchPredictor;
pub use covariance::{matern_correlation, CovarianceSpec, Matern};
pub use design::{euclidean, Design, Points, SEPARATION_TOLERANCE};
pub use estimation::{estimate_params, log_likelihood, EstimationOptions, EstimationOutcome, LikelihoodMode};
pub use kriging::{AugmentedPredictor, AugmentedWeights, FitOptions, KrigingModel, Prediction};
pub use simulate::{simulate_paths, GpPathSet};
pub use trend::{Basis, TrendKind, TrendSpec};
