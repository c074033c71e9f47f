//! Sweep driver behind the `pinscan` binary.

pub mod config;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config::{ConfigBuilder, GridPoint, SweepConfig};
pub use output::emit_outputs;
pub use sweep::{run_sweep, ResultRow, SweepOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("results line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] pinscan::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
