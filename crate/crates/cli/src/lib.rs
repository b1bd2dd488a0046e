//! Command-line driver for `nonlocal-core`: run configuration, snapshot and
//! table files, single runs, EOC studies and singular-limit studies.

pub mod config;
pub mod driver;
pub mod error;
pub mod snapshot;
pub mod studies;
pub mod table;

pub use config::{EocConfig, LimitConfig, Options, RunConfig};
pub use error::{CliError, Result};
