//! Command-line experiments for zero-error coding over a dual-rail
//! spin-chain link: configuration, the four experiments, sweeps and
//! record output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod records;
pub mod sweep;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind, Format};
pub use error::CliError;
pub use experiments::{run_experiment, Outcome};
pub use records::{render, write_atomic, Metadata, Record};
