//! Manufactured-solution studies: configuration, single runs and sweeps
//! with CSV and gnuplot output.

pub mod config;
pub mod run;
pub mod sweep;

pub use config::{parse_config, CaseConfig, Mode, RunConfig};
pub use run::{run_case, simulate, RunOutput, StepRecord};
pub use sweep::{rate_table, run_sweep, RateRow};
