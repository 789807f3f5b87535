//! The hardware faults seen during the lab campaign: IMU drift after moves,
//! tracker confusing reflective foil for a chaser, and depth uncertainty in
//! the vision camera.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::vehicle::VehicleState;
use crate::frames::{Vec3, CM_PER_M};

/// Default scale on vision noise while a depth fault is active.
pub const DEFAULT_DEPTH_MULTIPLIER: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImuDrift {
    /// Per-axis standard deviation of the post-move drift, cm.
    pub sigma_cm: f64,
}

/// While the vehicle is inside the trigger sphere the tracker reports it at
/// `true position + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSpoof {
    pub center: Vec3,
    pub radius: f64,
    pub offset: Vec3,
}

impl TrackerSpoof {
    pub fn triggered(&self, position: Vec3) -> bool {
        position.distance(self.center) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    #[serde(default)]
    pub imu_drift: Option<ImuDrift>,
    #[serde(default)]
    pub tracker_spoof: Option<TrackerSpoof>,
    /// Scale applied to vision noise while this fault is present.
    #[serde(default)]
    pub depth_noise_multiplier: Option<f64>,
}

impl FaultSpec {
    pub fn is_off(&self) -> bool {
        self.imu_drift.is_none() && self.tracker_spoof.is_none() && self.depth_noise_multiplier.is_none()
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(d) = self.imu_drift {
            if !(d.sigma_cm >= 0.0 && d.sigma_cm.is_finite()) {
                return Err("imu_drift.sigma_cm must be non-negative".into());
            }
        }
        if let Some(s) = self.tracker_spoof {
            if s.radius.is_nan() || s.radius < 0.0 || !s.center.is_finite() || !s.offset.is_finite() {
                return Err("tracker_spoof needs a finite center/offset and non-negative radius".into());
            }
        }
        if let Some(m) = self.depth_noise_multiplier {
            if !(m >= 0.0 && m.is_finite()) {
                return Err("depth_noise_multiplier must be non-negative".into());
            }
        }
        Ok(())
    }
}

/// Reasons a chaser mission ends in failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    ImuFailed,
    TrackerError,
    DepthError,
    /// Crash with no active fault to blame.
    Collision,
    Timeout,
}

impl FailureReason {
    pub fn label(self) -> &'static str {
        match self {
            FailureReason::ImuFailed => "IMU failed",
            FailureReason::TrackerError => "Tracker error",
            FailureReason::DepthError => "Depth camera error",
            FailureReason::Collision => "Collision",
            FailureReason::Timeout => "Timeout",
        }
    }
}

/// Applies vehicle-side faults to `v`: IMU drift perturbs where the current
/// move ends up (once per move). Tracker and depth faults do not touch the
/// vehicle; see [`reported_position`] and the vision noise multiplier.
pub fn apply_faults<R: Rng + ?Sized>(v: &VehicleState, fault: &FaultSpec, rng: &mut R) -> VehicleState {
    let mut next = v.clone();
    if let (Some(drift), Some(m)) = (fault.imu_drift, next.motion.as_mut()) {
        if !m.drift_applied && drift.sigma_cm > 0.0 {
            let n = Normal::new(0.0, drift.sigma_cm / CM_PER_M).expect("finite sigma");
            m.drift = Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng));
            m.drift_applied = true;
        }
    }
    next
}

/// Position the external tracker reports for a vehicle truly at `truth`.
pub fn reported_position(truth: Vec3, fault: &FaultSpec) -> Vec3 {
    match fault.tracker_spoof {
        Some(s) if s.triggered(truth) => truth + s.offset,
        _ => truth,
    }
}
