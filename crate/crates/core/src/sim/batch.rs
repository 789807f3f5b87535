//! Runs every scenario in a directory and tabulates the outcomes.

use std::path::{Path, PathBuf};

use super::report::RunReport;
use super::runner::{run_with, RunOptions};
use super::scenario::Scenario;
use super::SimError;

/// Scenario files in `dir` (`*.toml`), sorted by file name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    let entries = std::fs::read_dir(dir).map_err(|e| SimError::io(dir, e))?;
    let mut files = Vec::new();
    for e in entries {
        let path = e.map_err(|e| SimError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "toml") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(SimError::NoScenarios(dir.to_path_buf()));
    }
    Ok(files)
}

#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub reports: Vec<RunReport>,
}

impl BatchSummary {
    fn max_chasers(&self) -> usize {
        self.reports.iter().map(|r| r.chasers.len()).max().unwrap_or(0)
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let n = self.max_chasers();
        self.reports
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.scenario.clone(),
                    r.placement.clone(),
                    format!("{}", r.yaw_rate),
                    format!("{}", r.pitch_rate),
                    format!("{}", r.roll_rate),
                ];
                for i in 0..n {
                    row.push(r.chasers.get(i).map(|c| c.cell()).unwrap_or_default());
                }
                row
            })
            .collect()
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["test", "placement", "yaw_deg_s", "pitch_deg_s", "roll_deg_s"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((1..=self.max_chasers()).map(|i| format!("chaser_{i}")));
        h
    }

    /// Runs with at least two chasers docked or in inspection orbit.
    pub fn successful_runs(&self) -> usize {
        self.reports.iter().filter(|r| r.successes() >= 2).count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory csv write");
        for row in self.rows() {
            w.write_record(row).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    /// Fixed-width text table.
    pub fn to_text(&self) -> String {
        let header = self.header();
        let rows = self.rows();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                rows.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&header);
        out += &line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for r in &rows {
            out += &line(r);
        }
        out += &format!(
            "{}/{} runs with at least two chasers docked or in inspection orbit\n",
            self.successful_runs(),
            self.reports.len()
        );
        out
    }
}

pub fn batch(dir: &Path, opts: &RunOptions) -> Result<BatchSummary, SimError> {
    let mut reports = Vec::new();
    for path in scenario_files(dir)? {
        let sc = Scenario::load(&path)?;
        reports.push(run_with(&sc, opts)?);
    }
    Ok(BatchSummary { reports })
}
