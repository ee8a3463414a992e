//! Monte Carlo sweeps, file formats, oracles and the command line for the
//! CP-DSSS capacity model in `cpdsss-core`.

pub mod cli;
pub mod config;
mod error;
pub mod experiments;
pub mod io;
pub mod oracle;

pub use config::{ConfigFile, ExperimentConfig, SweepKind};
pub use error::{Error, Result};
pub use experiments::{SweepPoint, SweepRecord, TrialTable};
