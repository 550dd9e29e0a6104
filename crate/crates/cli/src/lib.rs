//! Batch front-end: configuration, grid evaluation and validation runs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Outcome, Status, ValidationReport};
pub use config::{CoefficientSpec, Datum, Format, Problem, RunConfig};
pub use error::{CliError, CliResult};
pub use parametrix::bounds::{BoundsConfig, Calibration};
pub use parametrix::validation::{GridSpec, InvariantEntry, OracleConfig, SuiteConfig};
