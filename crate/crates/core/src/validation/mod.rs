//! Independent oracles and the invariant suite.

pub mod fd;
pub mod grid;
pub mod mc;
pub mod suite;

pub use fd::{fd_reference_density, fd_reference_many, fd_solve, FDConfig, FdReference};
pub use grid::{Axis, GridSpec};
pub use mc::{mc_density_many, MCConfig, McEstimate, McReport};
pub use suite::{run_invariant_suite, InvariantEntry, InvariantReport, OracleConfig, SuiteConfig};
