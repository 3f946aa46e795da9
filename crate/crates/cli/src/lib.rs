//! Configuration-driven front end for the `noisy_rf` library: single
//! spectra, intensity and line summaries, parameter sweeps and Monte Carlo
//! cross-checks, written as CSV and JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Mode, RunConfig};
pub use error::CliError;
pub use run::{run, RunOptions, RunOutput};
