//! Drone command envelope and acceleration-to-command quantization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{drone_from_apf, Apf, Framed, Vec3, CM_PER_M};

pub const MIN_MOVE_CM: i32 = 20;
pub const MAX_MOVE_CM: i32 = 500;
pub const MIN_SPEED_CM_S: i32 = 10;
pub const MAX_SPEED_CM_S: i32 = 100;

/// Relative move in the drone frame. Each axis is either 0 or within
/// `[20, 500]` cm in magnitude; speed within `[10, 100]` cm/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveCommand {
    pub dx: i32,
    pub dy: i32,
    pub dz: i32,
    pub speed: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejected {
    #[error("vehicle busy with a previous move")]
    Busy,
    #[error("command out of bounds")]
    OutOfBounds,
    #[error("vehicle has landed")]
    Landed,
}

impl MoveCommand {
    pub fn new(dx: i32, dy: i32, dz: i32, speed: i32) -> Self {
        MoveCommand { dx, dy, dz, speed }
    }

    pub fn axis_in_envelope(d: i32) -> bool {
        d == 0 || (MIN_MOVE_CM as u32..=MAX_MOVE_CM as u32).contains(&d.unsigned_abs())
    }

    pub fn check_envelope(&self) -> Result<(), Rejected> {
        let axes_ok = [self.dx, self.dy, self.dz].into_iter().all(Self::axis_in_envelope);
        let speed_ok = (MIN_SPEED_CM_S..=MAX_SPEED_CM_S).contains(&self.speed);
        if axes_ok && speed_ok {
            Ok(())
        } else {
            Err(Rejected::OutOfBounds)
        }
    }

    /// Displacement in meters, drone frame.
    pub fn displacement_m(&self) -> Vec3 {
        Vec3::new(self.dx as f64, self.dy as f64, self.dz as f64) / CM_PER_M
    }

    /// Seconds to fly the move at the commanded speed (longest axis governs).
    pub fn duration(&self) -> f64 {
        let longest = self
            .dx
            .unsigned_abs()
            .max(self.dy.unsigned_abs())
            .max(self.dz.unsigned_abs());
        longest as f64 / self.speed as f64
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0 && self.dy == 0 && self.dz == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizeConfig {
    /// Per-axis displacement below this (meters, before quantization) is held.
    pub deadband: f64,
    /// Largest per-axis step issued, cm. 20 issues only minimum moves.
    pub max_step_cm: i32,
    pub speed_cm_s: i32,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        QuantizeConfig {
            deadband: 0.01,
            max_step_cm: MIN_MOVE_CM,
            speed_cm_s: MAX_SPEED_CM_S,
        }
    }
}

impl QuantizeConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.deadband >= 0.0 && self.deadband.is_finite()) {
            return Err("deadband must be a non-negative number".into());
        }
        if !(MIN_MOVE_CM..=MAX_MOVE_CM).contains(&self.max_step_cm) {
            return Err(format!("max_step_cm must be within [{MIN_MOVE_CM}, {MAX_MOVE_CM}]"));
        }
        if !(MIN_SPEED_CM_S..=MAX_SPEED_CM_S).contains(&self.speed_cm_s) {
            return Err(format!(
                "speed_cm_s must be within [{MIN_SPEED_CM_S}, {MAX_SPEED_CM_S}]"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantized {
    Move(MoveCommand),
    Hold,
}

/// Integrates a guidance acceleration over `dt` into a drone move.
///
/// Displacement is `v dt + a dt² / 2`, taken into the drone frame. Each axis
/// whose displacement clears the deadband becomes a step of at least the
/// minimum move, in its sign, capped at `max_step_cm`.
pub fn quantize(accel: Vec3, velocity: Vec3, dt: f64, cfg: &QuantizeConfig) -> Quantized {
    let disp = velocity * dt + accel * (0.5 * dt * dt);
    let d = drone_from_apf(Framed::<Apf>::new(disp)).vec();
    let step = |m: f64| -> i32 {
        if !m.is_finite() || m.abs() < cfg.deadband || m == 0.0 {
            return 0;
        }
        let cm = (m.abs() * CM_PER_M).floor() as i64;
        let mag = cm.clamp(MIN_MOVE_CM as i64, cfg.max_step_cm as i64) as i32;
        mag * m.signum() as i32
    };
    let cmd = MoveCommand::new(step(d.x), step(d.y), step(d.z), cfg.speed_cm_s);
    if cmd.is_zero() {
        Quantized::Hold
    } else {
        Quantized::Move(cmd)
    }
}
