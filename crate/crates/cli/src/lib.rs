//! Library behind the `relsynth` command: configuration, run plumbing,
//! artifact writers and the experiment drivers.

pub mod artifacts;
pub mod config;
pub mod experiments;
pub mod run;

use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("abstraction files do not match the configuration: {0}")]
    Mismatch(String),
    #[error("unknown experiment `{0}` (expected basin_vs_samples, decomp_vs_mono or greedy_cap)")]
    UnknownExperiment(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Interface(#[from] relsynth::interface::InterfaceError),
    #[error(transparent)]
    Game(#[from] relsynth::games::GameError),
    #[error(transparent)]
    Abstraction(#[from] relsynth::abstraction::AbstractionError),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Mismatch(_) | CliError::UnknownExperiment(_) => 2,
            _ => 1,
        }
    }
}

/// Exit status when a run stopped at the node cap.
pub const EXIT_RESOURCE_CAP: i32 = 3;
