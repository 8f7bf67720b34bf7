//! Batch driver for the extrinsic-ball toolkit: configuration, sweeps,
//! reports and exit codes.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_defect, cmd_mesh, cmd_sweep, cmd_verify, CommandError, Exit, Outcome};
pub use config::RunConfig;
