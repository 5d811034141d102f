//! Sampling criteria and the discrete point-selection step.

mod config;
pub mod marginal;
pub mod quadrature;
pub mod select;
pub mod sur;

pub use config::{Criterion, PruneMode, PruneSize, DEFAULT_NODES, DEFAULT_PRUNE};
pub use marginal::{g_closed, j_ech, j_rb};
pub use quadrature::{gauss_hermite, QuadratureRule};
pub use select::{maximin_next, prune, prune_among, select_next, SelectionResult};
pub use sur::{sur_scores, timse_scores, SurScores};
