//! Potential-field guidance: node field, chaser-chaser repulsion, Hill terms
//! and the mission status machine.

mod field;
mod status;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::Vec3;

pub use field::{
    chaser_chaser_acceleration, field_acceleration, hill_acceleration, node_acceleration, propagate, total_acceleration,
};
pub use status::{update_status, update_status_each};

/// Distances below this are treated as coincident.
pub const COINCIDENCE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApfError {
    #[error("node set is empty")]
    EmptyNodeSet,
    #[error("chaser {0} is not active")]
    NotActive(String),
    #[error("invalid guidance config: {0}")]
    InvalidConfig(String),
}

/// How the velocity damping term projects the chaser velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingMode {
    /// `c (v . rho)`: grows with distance to the node.
    #[default]
    FullVector,
    /// `c (v . rho_hat)`: distance independent.
    UnitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApfConfig {
    /// Attractive node gain, 1/s².
    pub mu_a: f64,
    /// Repulsive node gain, 1/s². Negative.
    pub mu_r: f64,
    /// Out-of-bounds radius at which repulsive terms change sign, m.
    pub r_d: f64,
    /// Velocity damping scalar.
    pub c: f64,
    pub damping_mode: DampingMode,
    /// Chaser-chaser gain, m/s². Negative.
    pub mu_c: f64,
    /// Chaser-chaser repulsion only acts inside this distance, m.
    pub chaser_avoid_radius: f64,
    pub dock_range: f64,
    pub dock_cycles: u32,
    /// Guidance cycle period, s.
    pub cycle_period: f64,
    pub hill_enabled: bool,
    /// Target orbital rate, rad/s.
    pub omega: f64,
    /// Target orbital rate derivative, rad/s².
    pub omega_dot: f64,
    /// Consecutive held cycles before the integration step is doubled.
    pub stall_threshold: u32,
    /// Consecutive held cycles before a chaser is parked in inspection orbit.
    pub stall_limit: u32,
}

impl Default for ApfConfig {
    fn default() -> Self {
        ApfConfig {
            mu_a: 0.1,
            mu_r: -0.015,
            r_d: 2.0,
            c: 0.08,
            damping_mode: DampingMode::FullVector,
            mu_c: -2.5,
            chaser_avoid_radius: 1.0,
            dock_range: 0.5,
            dock_cycles: 2,
            cycle_period: 0.25,
            hill_enabled: false,
            omega: 0.0,
            omega_dot: 0.0,
            stall_threshold: 4,
            stall_limit: 40,
        }
    }
}

impl ApfConfig {
    pub fn validate(&self) -> Result<(), ApfError> {
        let bad = |m: &str| Err(ApfError::InvalidConfig(m.to_string()));
        let finite = [
            self.mu_a,
            self.mu_r,
            self.r_d,
            self.c,
            self.mu_c,
            self.chaser_avoid_radius,
            self.dock_range,
            self.cycle_period,
            self.omega,
            self.omega_dot,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all gains and radii must be finite");
        }
        if self.mu_a <= 0.0 {
            return bad("mu_a must be positive");
        }
        if self.mu_r >= 0.0 {
            return bad("mu_r must be negative");
        }
        if self.mu_c >= 0.0 {
            return bad("mu_c must be negative");
        }
        if self.r_d <= 0.0 {
            return bad("r_d must be positive");
        }
        if self.dock_range <= 0.0 {
            return bad("dock_range must be positive");
        }
        if self.dock_cycles < 1 {
            return bad("dock_cycles must be at least 1");
        }
        if self.cycle_period <= 0.0 {
            return bad("cycle_period must be positive");
        }
        if self.chaser_avoid_radius < 0.0 {
            return bad("chaser_avoid_radius must be non-negative");
        }
        if self.stall_threshold > self.stall_limit {
            return bad("stall_threshold must not exceed stall_limit");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaserStatus {
    Active,
    /// Held in place while another chaser completes docking.
    Frozen,
    Docked,
    InspectionOrbit,
    Failed,
}

impl ChaserStatus {
    pub const ALL: [ChaserStatus; 5] = [
        ChaserStatus::Active,
        ChaserStatus::Frozen,
        ChaserStatus::Docked,
        ChaserStatus::InspectionOrbit,
        ChaserStatus::Failed,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            ChaserStatus::Docked | ChaserStatus::InspectionOrbit | ChaserStatus::Failed
        )
    }

    /// Docked and failed chasers have landed and no longer take part in the field.
    pub fn is_landed(self) -> bool {
        matches!(self, ChaserStatus::Docked | ChaserStatus::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChaserStatus::Active => "active",
            ChaserStatus::Frozen => "frozen",
            ChaserStatus::Docked => "docked",
            ChaserStatus::InspectionOrbit => "inspection_orbit",
            ChaserStatus::Failed => "failed",
        }
    }
}

/// Guidance-side view of one chaser, in the guidance frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaserState {
    pub id: String,
    pub position: Vec3,
    pub velocity: Vec3,
    pub status: ChaserStatus,
    pub dock_counter: u32,
    pub stall_counter: u32,
    /// Whether the last computed command was a hold (below minimum movement).
    pub last_held: bool,
    /// Direction used when the chaser sits on top of a node.
    pub fallback_dir: Vec3,
}

impl ChaserState {
    pub fn new(id: impl Into<String>, position: Vec3) -> Self {
        ChaserState {
            id: id.into(),
            position,
            velocity: Vec3::ZERO,
            status: ChaserStatus::Active,
            dock_counter: 0,
            stall_counter: 0,
            last_held: false,
            fallback_dir: Vec3::X,
        }
    }

    /// Stalled long enough that the next command uses a doubled time step.
    pub fn boosted(&self, cfg: &ApfConfig) -> bool {
        self.stall_counter >= cfg.stall_threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_table_values() {
        let c = ApfConfig::default();
        assert_eq!((c.mu_a, c.mu_r, c.r_d, c.c, c.mu_c), (0.1, -0.015, 2.0, 0.08, -2.5));
        assert_eq!((c.dock_range, c.dock_cycles, c.cycle_period), (0.5, 2, 0.25));
        assert!(!c.hill_enabled);
        c.validate().unwrap();
    }

    #[test]
    fn sign_invariants_enforced() {
        let d = ApfConfig::default;
        for bad in [
            ApfConfig { mu_c: 2.5, ..d() },
            ApfConfig { mu_r: 0.015, ..d() },
            ApfConfig { dock_cycles: 0, ..d() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
