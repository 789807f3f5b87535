//! Scenario files: one TOML document per experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::apf::ApfConfig;
use crate::fleet::{FaultSpec, MotionConfig, QuantizeConfig};
use crate::frames::{Pose, Vec3};
use crate::net::TransportConfig;
use crate::vision::detect::DEFAULT_FRAME_PERIOD;
use crate::vision::{CameraConfig, NoiseSpec, RebuildConfig, TargetMockup};

/// Named starting formations. Coordinates always come from the scenario
/// file; the label records which formation they describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Scattered,
    RBar,
    VBar,
    Extreme,
}

impl Placement {
    pub fn label(self) -> &'static str {
        match self {
            Placement::Scattered => "Scattered",
            Placement::RBar => "R-bar",
            Placement::VBar => "V-bar",
            Placement::Extreme => "Extreme",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaserSpec {
    pub id: String,
    /// Start position, guidance frame, m.
    pub position: Vec3,
    /// Formation this chaser's start belongs to.
    pub placement: Placement,
    #[serde(default)]
    pub faults: FaultSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisionSettings {
    pub noise_sigma: f64,
    /// Seconds between camera frames.
    pub frame_period: f64,
    pub safety_scale: f64,
    /// Distance from the mean of the visible body points to the centroid
    /// along the optical axis. Unset: the body half-extent along that axis.
    pub centroid_depth_offset: Option<f64>,
}

impl Default for VisionSettings {
    fn default() -> Self {
        VisionSettings {
            noise_sigma: 0.0,
            frame_period: DEFAULT_FRAME_PERIOD,
            safety_scale: crate::vision::rebuild::DEFAULT_SAFETY_SCALE,
            centroid_depth_offset: None,
        }
    }
}

/// Hard limits of the flight volume and the crash model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArenaConfig {
    pub min: Vec3,
    pub max: Vec3,
    /// Half-size of a drone; panel contact happens at this distance.
    pub drone_radius: f64,
    /// Chasers closer than this have collided.
    pub collision_floor: f64,
    /// Collision checks per guidance cycle.
    pub substeps: u32,
    /// How far beyond the dock range a declared dock may truly be and still
    /// count, m.
    pub dock_tolerance: f64,
}

impl Default for ArenaConfig {
    /// 4 m x 4 m x 2.5 m around the target.
    fn default() -> Self {
        ArenaConfig {
            min: Vec3::new(-2.0, -2.0, -1.5),
            max: Vec3::new(2.0, 2.0, 1.0),
            drone_radius: 0.09,
            collision_floor: 0.15,
            substeps: 10,
            dock_tolerance: 0.1,
        }
    }
}

impl ArenaConfig {
    pub fn contains(&self, p: Vec3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }
}

fn default_max_duration() -> f64 {
    crate::fleet::vehicle::BATTERY_LIMIT_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    #[serde(default = "default_max_duration")]
    pub max_duration: f64,
    #[serde(default)]
    pub target: TargetMockup,
    #[serde(default)]
    pub camera: CameraConfig,
    /// Tracker frame pose in the guidance frame.
    #[serde(default)]
    pub tracker_pose: Pose,
    #[serde(default)]
    pub vision: VisionSettings,
    #[serde(default)]
    pub apf: ApfConfig,
    #[serde(default)]
    pub quantize: QuantizeConfig,
    #[serde(default)]
    pub motion: MotionConfig,
    #[serde(default)]
    pub arena: ArenaConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    pub chasers: Vec<ChaserSpec>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario, SimError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| SimError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Scenario::from_toml_str(&text).map_err(|e| match e {
            SimError::Parse { message, .. } => SimError::Parse {
                path: Some(path.to_path_buf()),
                message,
            },
            SimError::Invalid(m) => SimError::Invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    /// Distinct placements in chaser order, e.g. `["Extreme", "Scattered"]`.
    pub fn placements(&self) -> Vec<Placement> {
        let mut out: Vec<Placement> = Vec::new();
        for c in &self.chasers {
            if !out.contains(&c.placement) {
                out.push(c.placement);
            }
        }
        out
    }

    pub fn placement_label(&self) -> String {
        self.placements()
            .iter()
            .map(|p| p.label())
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn rebuild_config(&self) -> RebuildConfig {
        let offset = self.vision.centroid_depth_offset.unwrap_or_else(|| {
            // half-extent of the initial body along the optical axis
            let axis = self.camera.pose.orientation.rotate(Vec3::Z);
            let body_axis = self.target.pose.orientation.conjugate().rotate(axis);
            body_axis.abs().dot(self.target.body_half_extents)
        });
        RebuildConfig {
            safety_scale: self.vision.safety_scale,
            body_half_extents: self.target.body_half_extents,
            centroid_depth_offset: offset,
            mu_attractive: self.apf.mu_a,
            mu_repulsive: self.apf.mu_r,
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            sigma: self.vision.noise_sigma,
            multiplier: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.chasers.is_empty() {
            return bad("at least one chaser is required".into());
        }
        if !(self.max_duration > 0.0 && self.max_duration.is_finite()) {
            return bad("max_duration must be positive".into());
        }
        let mut ids: Vec<&str> = self.chasers.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("chaser ids must be unique".into());
        }
        for c in &self.chasers {
            if c.id.is_empty() {
                return bad("chaser id must not be empty".into());
            }
            if !c.position.is_finite() {
                return bad(format!("chaser {}: position must be finite", c.id));
            }
            if !self.arena.contains(c.position) {
                return bad(format!("chaser {}: starts outside the arena", c.id));
            }
            c.faults
                .validate()
                .map_err(|m| SimError::Invalid(format!("chaser {}: {m}", c.id)))?;
        }
        self.target
            .validate()
            .map_err(|m| SimError::Invalid(format!("target: {m}")))?;
        self.camera
            .pose
            .validate()
            .map_err(|e| SimError::Invalid(format!("camera: {e}")))?;
        if !self.camera.intrinsics.is_valid() {
            return bad("camera intrinsics are invalid".into());
        }
        self.tracker_pose
            .validate()
            .map_err(|e| SimError::Invalid(format!("tracker_pose: {e}")))?;
        self.apf.validate().map_err(|e| SimError::Invalid(e.to_string()))?;
        self.quantize.validate().map_err(SimError::Invalid)?;
        self.motion.validate().map_err(SimError::Invalid)?;
        self.transport.validate().map_err(SimError::Invalid)?;
        let v = &self.vision;
        if !(v.noise_sigma >= 0.0 && v.noise_sigma.is_finite()) {
            return bad("vision.noise_sigma must be non-negative".into());
        }
        if !(v.frame_period > 0.0 && v.frame_period.is_finite()) {
            return bad("vision.frame_period must be positive".into());
        }
        self.rebuild_config()
            .validate()
            .map_err(|e| SimError::Invalid(e.to_string()))?;
        let a = &self.arena;
        if !(a.min.x < a.max.x && a.min.y < a.max.y && a.min.z < a.max.z) {
            return bad("arena min must be below max on every axis".into());
        }
        if !(a.drone_radius >= 0.0 && a.collision_floor >= 0.0 && a.dock_tolerance >= 0.0) || a.substeps == 0 {
            return bad("arena radii must be non-negative and substeps at least 1".into());
        }
        Ok(())
    }
}
