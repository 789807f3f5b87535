//! Multi-chaser rendezvous with potential-field guidance.
//!
//! The crate is split along the data flow of one guidance cycle:
//!
//! - [`frames`]: coordinate frames and conversions.
//! - [`vision`]: synthetic detections of the target and node-set rebuild.
//! - [`apf`]: field accelerations and the per-chaser mission state machine.
//! - [`fleet`]: drone command envelope, motion execution and hardware faults.
//! - [`net`]: wire messages and datagram transports.
//! - [`sim`]: scenarios, the fixed-step cycle loop, reports and batch runs.

pub mod apf;
pub mod fleet;
pub mod frames;
pub mod net;
pub mod sim;
pub mod vision;

pub use frames::{Pose, Quat, Vec3};
