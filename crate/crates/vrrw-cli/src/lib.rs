//! Experiment harness over the `vrrw` library: config files, mode runners,
//! Monte Carlo aggregation, and the file formats (JSON reports and
//! summaries, CSV trajectories).

use thiserror::Error;

pub mod config;
pub mod output;
pub mod runner;
pub mod stats;

/// Exit codes: 2 rejects the input, 3 flags an internal consistency check
/// tripping mid-run (for CI), 1 is any other failure.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn invalid(e: impl std::fmt::Display) -> Self {
        HarnessError::Invalid(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Invalid(_) => 2,
            HarnessError::Consistency(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }
}

impl From<vrrw::model::ModelError> for HarnessError {
    fn from(e: vrrw::model::ModelError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}

impl From<vrrw::walk::WalkError> for HarnessError {
    fn from(e: vrrw::walk::WalkError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}
