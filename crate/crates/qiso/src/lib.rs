//! Experiment runner for quantum-circuit isometric tensor networks: TOML
//! configuration, the exact-diagonalization cache, and CSV/JSON/gnuplot
//! result files for every experiment.

pub mod config;
pub mod ed;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    /// Process exit status: 1 for configuration errors, 2 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}
