//! Host-side companion to `sextic-pinn-core`: checkpoint files, CSV reports,
//! run configuration files, a thread-pool point executor and the
//! command-line driver.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;

pub use sextic_pinn_core as core;

pub use checkpoint::Checkpoint;
pub use config::{CliConfigFile, RunConfig};
pub use error::{Error, Result};
