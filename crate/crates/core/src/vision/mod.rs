//! Synthetic target perception and node-set reconstruction.

pub mod camera;
pub mod detect;
pub mod mockup;
pub mod rebuild;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::FrameError;

pub use camera::Intrinsics;
pub use detect::{
    extract_five_points, render_detections, BBox, CameraConfig, DepthImage, DepthLookup, Detection, NoiseSpec,
    PlaneDepth, VisionSensor,
};
pub use mockup::{AttitudeRates, Panel, TargetMockup};
pub use rebuild::{rebuild_from_points, rebuild_nodes, FieldNode, NodeKind, NodeSet, RebuildConfig};

/// Component classes reported by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionClass {
    SolarPanel,
    Body,
}

impl DetectionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectionClass::SolarPanel => "solar_panel",
            DetectionClass::Body => "body",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisionError {
    #[error("detection dropped: {0}")]
    DetectionDropped(&'static str),
    #[error("no body detection to rebuild nodes from")]
    NodeRebuildFailed,
    #[error("invalid vision config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
