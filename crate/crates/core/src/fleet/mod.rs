//! Chaser vehicles: command envelope, motion, and injected hardware faults.

pub mod command;
pub mod faults;
pub mod vehicle;

pub use command::{quantize, MoveCommand, QuantizeConfig, Quantized, Rejected};
pub use faults::{apply_faults, reported_position, FailureReason, FaultSpec, ImuDrift, TrackerSpoof};
pub use vehicle::{execute, Motion, MotionConfig, VehicleState};
