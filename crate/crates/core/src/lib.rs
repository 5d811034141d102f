pub mod benchmarks;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod estimators;
pub mod gp;
pub mod sequencer;
pub mod special;

pub use error::{Error, Result};
