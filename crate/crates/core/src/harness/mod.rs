//! Experiment driver: configuration, coupled and limit runs, ε-sweeps with
//! rate fits, and the CSV / JSON / snapshot outputs they produce.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{ExperimentConfig, GridConfig, Mode, OutputConfig, PhysicsConfig, TimeConfig};
pub use output::{
    check_tolerances, epns_csv, read_summary, vpns_csv, write_epns_outputs, write_summary, write_vpns_outputs, EPNS_COLUMNS,
};
pub use run::{diagnose_snapshots, run_epns, run_vpns, EpnsRow, EpnsRun, VpnsRun};
pub use sweep::{fit_rate, refit_summary, run_sweep, write_sweep_outputs, RateFit, SweepMember, SweepSummary};

use crate::diagnostics::DiagnosticsError;
use crate::initdata::InitDataError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver aborted at step {step} (t = {t}): {message}")]
    Solver { step: usize, t: f64, message: String },
    #[error("diagnostics failed: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("acceptance check failed: {}", .0.join("; "))]
    Check(Vec<String>),
}

impl From<InitDataError> for HarnessError {
    fn from(e: InitDataError) -> Self {
        match e {
            InitDataError::Config(m) => HarnessError::Config(m),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<crate::spectral::SnapshotError> for HarnessError {
    fn from(e: crate::spectral::SnapshotError) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl HarnessError {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Solver { .. } | HarnessError::Diagnostics(_) => 3,
            HarnessError::Check(_) => 4,
            HarnessError::Io(_) => 1,
        }
    }
}
