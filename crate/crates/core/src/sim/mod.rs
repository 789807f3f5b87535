//! Scenarios, the guidance cycle loop, run reports and batch runs.

pub mod batch;
pub mod report;
pub mod runner;
pub mod scenario;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::apf::ApfError;
use crate::net::NetError;

pub use batch::{batch, scenario_files, BatchSummary};
pub use report::{
    export, read_trajectory_csv, ChaserResult, ExportFormat, Metrics, Outcome, RunReport, TrajectorySample,
};
pub use runner::{run, run_with, RunOptions};
pub use scenario::{ArenaConfig, ChaserSpec, Placement, Scenario, VisionSettings};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error{}: {message}", path.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default())]
    Parse { path: Option<PathBuf>, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("no scenario files in {}", .0.display())]
    NoScenarios(PathBuf),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Guidance(#[from] ApfError),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
