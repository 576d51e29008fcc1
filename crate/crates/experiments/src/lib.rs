//! Benchmark sweeps, reports and the `recover` command line for
//! eigenmatrix sparse recovery.

pub mod cli;
pub mod config;
pub mod error;
pub mod record;
pub mod report;
pub mod sweep;

pub use config::{ConfigFile, Overrides};
pub use error::{ExperimentError, Result};
pub use record::RunRecord;
pub use report::{emit_report, Format};
pub use sweep::{run_sweep, run_sweep_with, summarize, SweepOptions};
