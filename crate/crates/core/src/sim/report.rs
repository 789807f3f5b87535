//! Run results and their CSV/JSON exports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::apf::ChaserStatus;
use crate::fleet::FailureReason;
use crate::net::NetStats;

/// Final classification of one chaser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Docked,
    InspectionOrbit,
    Failed,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Docked => "Docked",
            Outcome::InspectionOrbit => "Inspection Orbit",
            Outcome::Failed => "Failed",
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, Outcome::Docked | Outcome::InspectionOrbit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaserResult {
    pub id: String,
    pub outcome: Outcome,
    pub failure_reason: Option<FailureReason>,
    /// Sim time at which the chaser was classified docked, s.
    pub time_to_dock: Option<f64>,
    pub final_position: [f64; 3],
    pub commands_sent: u64,
    pub commands_rejected: u64,
}

impl ChaserResult {
    /// Table-style cell, e.g. `Failed - IMU failed`.
    pub fn cell(&self) -> String {
        match (self.outcome, self.failure_reason) {
            (Outcome::Failed, Some(r)) => format!("Failed - {}", r.label()),
            (o, _) => o.label().to_string(),
        }
    }
}

/// One trajectory row. Positions in the guidance frame, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub chaser_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub status: ChaserStatus,
    /// Position guidance believed, from the tracker feed.
    pub reported_x: f64,
    pub reported_y: f64,
    pub reported_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Smallest true distance between two airborne chasers, m. `None` when
    /// no two chasers were ever airborne together.
    pub min_inter_chaser_distance: Option<f64>,
    /// Smallest true distance from a drone's hull to a panel, m. Zero or
    /// below is a penetration.
    pub min_panel_clearance: Option<f64>,
    /// Collision-check substeps at which some drone was inside a panel.
    pub keepout_penetrations: u64,
    /// Sim time when the run stopped, s.
    pub duration: f64,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub placement: String,
    pub yaw_rate: f64,
    pub pitch_rate: f64,
    pub roll_rate: f64,
    pub chasers: Vec<ChaserResult>,
    pub metrics: Metrics,
    pub net: NetStats,
    pub trajectory: Vec<TrajectorySample>,
}

impl RunReport {
    pub fn count(&self, o: Outcome) -> usize {
        self.chasers.iter().filter(|c| c.outcome == o).count()
    }

    pub fn successes(&self) -> usize {
        self.chasers.iter().filter(|c| c.outcome.is_success()).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RunReport, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Parse {
            path: None,
            message: e.to_string(),
        })
    }

    pub fn load_json(path: &Path) -> Result<RunReport, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        RunReport::from_json(&text).map_err(|e| match e {
            SimError::Parse { message, .. } => SimError::Parse {
                path: Some(path.to_path_buf()),
                message,
            },
            other => other,
        })
    }

    /// Trajectory as CSV: `t,chaser_id,x,y,z,status,reported_x,reported_y,reported_z`.
    pub fn trajectory_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.trajectory {
            w.serialize(s).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

pub fn read_trajectory_csv(text: &str) -> Result<Vec<TrajectorySample>, SimError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<TrajectorySample>, _>>()
        .map_err(|e| SimError::Parse {
            path: None,
            message: e.to_string(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }

    pub fn render(self, report: &RunReport) -> String {
        match self {
            ExportFormat::Csv => report.trajectory_csv(),
            ExportFormat::Json => report.to_json(),
        }
    }
}

/// Writes `report` to `dir/<scenario>.<ext>` and returns the path.
pub fn export(report: &RunReport, format: ExportFormat, dir: &Path) -> Result<std::path::PathBuf, SimError> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let path = dir.join(format!("{}.{}", report.scenario, format.extension()));
    std::fs::write(&path, format.render(report)).map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}
