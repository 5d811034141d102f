use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("points {first} and {second} are closer than the separation tolerance {tolerance:e}")]
    CoincidentPoints {
        first: usize,
        second: usize,
        tolerance: f64,
    },

    #[error(
        "kriging system is singular for {n} design points (largest nugget tried: {nugget:e}); \
         design bounding box: {bbox}"
    )]
    Conditioning { n: usize, nugget: f64, bbox: String },

    #[error("trend basis is rank deficient on the design ({n} points, {l} basis functions)")]
    RankDeficientTrend { n: usize, l: usize },

    #[error("no admissible candidate left for selection")]
    EmptyCandidateSet,

    #[error("objective returned {value} at step {step} (point {point:?})")]
    ObjectiveFailure {
        step: usize,
        point: Vec<f64>,
        value: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Conditioning { .. }
                | Error::RankDeficientTrend { .. }
                | Error::NonFinite(_)
                | Error::ObjectiveFailure { .. }
                | Error::EmptyCandidateSet
        )
    }
}
