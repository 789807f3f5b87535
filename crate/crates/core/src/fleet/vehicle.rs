//! Kinematic drone model: constant-velocity point-to-point moves with an
//! overshoot-and-settle tail.

use serde::{Deserialize, Serialize};

use super::command::{MoveCommand, Rejected};
use crate::frames::{apf_from_drone, Drone, Framed, Vec3};

/// Seven minutes of flight.
pub const BATTERY_LIMIT_S: f64 = 420.0;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    /// Fraction of the commanded displacement flown past the target.
    pub overshoot_fraction: f64,
    /// Time to settle back from the overshoot point, s.
    pub settle_time: f64,
    pub battery_limit: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            overshoot_fraction: 0.1,
            settle_time: 0.3,
            battery_limit: BATTERY_LIMIT_S,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.overshoot_fraction >= 0.0 && self.overshoot_fraction.is_finite()) {
            return Err("overshoot_fraction must be non-negative".into());
        }
        if !(self.settle_time >= 0.0 && self.settle_time.is_finite()) {
            return Err("settle_time must be non-negative".into());
        }
        if self.battery_limit.is_nan() || self.battery_limit <= 0.0 {
            return Err("battery_limit must be positive".into());
        }
        Ok(())
    }
}

/// One move in progress, guidance frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub start: Vec3,
    pub target: Vec3,
    pub overshoot: Vec3,
    pub t0: f64,
    pub fly_time: f64,
    pub settle_time: f64,
    /// Extra displacement picked up while settling (IMU drift).
    pub drift: Vec3,
    pub drift_applied: bool,
}

impl Motion {
    pub fn end_time(&self) -> f64 {
        self.t0 + self.fly_time + self.settle_time
    }

    pub fn final_position(&self) -> Vec3 {
        self.target + self.drift
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        let s = t - self.t0;
        if s <= 0.0 {
            self.start
        } else if s < self.fly_time {
            self.start + (self.overshoot - self.start) * (s / self.fly_time)
        } else if s < self.fly_time + self.settle_time {
            let f = (s - self.fly_time) / self.settle_time;
            self.overshoot + (self.final_position() - self.overshoot) * f
        } else {
            self.final_position()
        }
    }

    pub fn velocity_at(&self, t: f64) -> Vec3 {
        let s = t - self.t0;
        if s < 0.0 || s >= self.fly_time + self.settle_time {
            Vec3::ZERO
        } else if s < self.fly_time {
            (self.overshoot - self.start) / self.fly_time
        } else {
            (self.final_position() - self.overshoot) / self.settle_time
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: String,
    /// Where the vehicle actually is (guidance frame) as of `time`.
    pub position: Vec3,
    /// Where the vehicle believes it is: the sum of its commanded moves.
    pub odometry: Vec3,
    pub time: f64,
    pub busy_until: f64,
    pub battery_elapsed: f64,
    pub landed: bool,
    pub motion: Option<Motion>,
    pub moves_completed: u32,
}

impl VehicleState {
    pub fn new(id: impl Into<String>, position: Vec3) -> Self {
        VehicleState {
            id: id.into(),
            position,
            odometry: position,
            time: 0.0,
            busy_until: 0.0,
            battery_elapsed: 0.0,
            landed: false,
            motion: None,
            moves_completed: 0,
        }
    }

    pub fn is_busy(&self, now: f64) -> bool {
        now + TIME_EPS < self.busy_until
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        match &self.motion {
            Some(m) if !self.landed => m.position_at(t),
            _ => self.position,
        }
    }

    pub fn velocity_at(&self, t: f64) -> Vec3 {
        match &self.motion {
            Some(m) if !self.landed => m.velocity_at(t),
            _ => Vec3::ZERO,
        }
    }

    pub fn battery_expired(&self, limit: f64) -> bool {
        self.battery_elapsed >= limit - TIME_EPS
    }

    /// Moves the clock forward to `t`, completing any finished move.
    pub fn advance_to(&mut self, t: f64) {
        if t <= self.time {
            return;
        }
        if !self.landed {
            self.battery_elapsed += t - self.time;
        }
        self.position = self.position_at(t);
        if let Some(m) = self.motion {
            if t + TIME_EPS >= m.end_time() {
                self.position = m.final_position();
                self.motion = None;
                self.moves_completed += 1;
            }
        }
        self.time = t;
    }

    pub fn land(&mut self) {
        self.position = self.position_at(self.time);
        self.motion = None;
        self.landed = true;
    }
}

/// Starts `cmd` at time `now`. A busy, landed or out-of-envelope vehicle
/// discards the command and keeps its state.
pub fn execute(v: &VehicleState, cmd: &MoveCommand, now: f64, cfg: &MotionConfig) -> Result<VehicleState, Rejected> {
    if v.landed {
        return Err(Rejected::Landed);
    }
    if v.is_busy(now) {
        return Err(Rejected::Busy);
    }
    cmd.check_envelope()?;
    let mut next = v.clone();
    next.advance_to(now);
    let delta = apf_from_drone(Framed::<Drone>::new(cmd.displacement_m())).vec();
    let start = next.position;
    let fly_time = cmd.duration();
    let settle_time = if cfg.overshoot_fraction > 0.0 {
        cfg.settle_time
    } else {
        0.0
    };
    let motion = Motion {
        start,
        target: start + delta,
        overshoot: start + delta * (1.0 + cfg.overshoot_fraction),
        t0: now,
        fly_time,
        settle_time,
        drift: Vec3::ZERO,
        drift_applied: false,
    };
    next.busy_until = motion.end_time();
    next.odometry += delta;
    next.motion = Some(motion);
    Ok(next)
}
