//! Turns one frame of detections into the guidance node set.
//!
//! Steps, in order:
//! 1. move every detected point into the guidance frame;
//! 2. estimate the target centroid from the body points;
//! 3. point-reflect every node through the centroid to stand in for the
//!    unseen far side;
//! 4. add two attractive dock nodes on the guidance x-axis at the configured
//!    body half-extent;
//! 5. inflate every node's offset from the centroid by the safety scale;
//! 6. panels become repulsive nodes, body points and dock nodes attractive.

use serde::{Deserialize, Serialize};

use super::detect::Detection;
use super::{DetectionClass, VisionError};
use crate::frames::{apf_from_camera, Camera, Framed, Pose, Vec3};

pub const DEFAULT_SAFETY_SCALE: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Attractive,
    Repulsive,
}

/// Point source of the guidance field, in the guidance frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldNode {
    pub position: Vec3,
    pub kind: NodeKind,
    /// 1/s². Positive for attractive nodes, negative for repulsive ones.
    pub gain: f64,
}

impl FieldNode {
    pub fn attractive(position: Vec3, gain: f64) -> Self {
        FieldNode {
            position,
            kind: NodeKind::Attractive,
            gain,
        }
    }

    pub fn repulsive(position: Vec3, gain: f64) -> Self {
        FieldNode {
            position,
            kind: NodeKind::Repulsive,
            gain,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.position.is_finite()
            && match self.kind {
                NodeKind::Attractive => self.gain > 0.0,
                NodeKind::Repulsive => self.gain < 0.0,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub nodes: Vec<FieldNode>,
    /// Indices of the two x-axis docking nodes.
    pub primary_dock_nodes: [usize; 2],
    pub centroid: Vec3,
}

impl NodeSet {
    pub fn dock_positions(&self) -> [Vec3; 2] {
        self.primary_dock_nodes.map(|i| self.nodes[i].position)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn validate(&self) -> bool {
        self.primary_dock_nodes.iter().all(|&i| i < self.nodes.len())
            && self.nodes.iter().all(FieldNode::is_consistent)
            && self.centroid.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RebuildConfig {
    #[serde(default = "default_scale")]
    pub safety_scale: f64,
    /// Configured body half-extents; the dock nodes sit at +-x of these.
    pub body_half_extents: Vec3,
    /// Distance from the mean of the visible body points to the centroid,
    /// along the camera optical axis. Zero uses the mean itself.
    #[serde(default)]
    pub centroid_depth_offset: f64,
    pub mu_attractive: f64,
    pub mu_repulsive: f64,
}

fn default_scale() -> f64 {
    DEFAULT_SAFETY_SCALE
}

impl RebuildConfig {
    pub fn validate(&self) -> Result<(), VisionError> {
        if !(self.safety_scale > 0.0 && self.safety_scale.is_finite()) {
            return Err(VisionError::InvalidConfig("safety_scale must be positive"));
        }
        if !self.body_half_extents.is_finite() || self.body_half_extents.x <= 0.0 {
            return Err(VisionError::InvalidConfig("body half-extent along x must be positive"));
        }
        if self.mu_attractive.is_nan()
            || self.mu_attractive <= 0.0
            || self.mu_repulsive.is_nan()
            || self.mu_repulsive >= 0.0
        {
            return Err(VisionError::InvalidConfig("gain signs: attractive > 0, repulsive < 0"));
        }
        if !self.centroid_depth_offset.is_finite() {
            return Err(VisionError::InvalidConfig("centroid_depth_offset must be finite"));
        }
        Ok(())
    }
}

pub fn rebuild_nodes(dets: &[Detection], camera_pose: &Pose, cfg: &RebuildConfig) -> Result<NodeSet, VisionError> {
    let parts: Vec<(DetectionClass, [Vec3; 5])> = dets.iter().map(|d| (d.class, d.points)).collect();
    rebuild_from_points(&parts, camera_pose, cfg)
}

/// Same as [`rebuild_nodes`] for bare (class, camera-frame points) pairs, as
/// carried on the wire.
pub fn rebuild_from_points(
    parts: &[(DetectionClass, [Vec3; 5])],
    camera_pose: &Pose,
    cfg: &RebuildConfig,
) -> Result<NodeSet, VisionError> {
    cfg.validate()?;
    let mut raw: Vec<(Vec3, DetectionClass)> = Vec::with_capacity(parts.len() * 5);
    for &(class, points) in parts {
        for p in points {
            let apf = apf_from_camera(Framed::<Camera>::new(p), camera_pose).map_err(VisionError::Frame)?;
            raw.push((apf.vec(), class));
        }
    }

    let body: Vec<Vec3> = raw
        .iter()
        .filter(|(_, c)| *c == DetectionClass::Body)
        .map(|(p, _)| *p)
        .collect();
    if body.is_empty() {
        return Err(VisionError::NodeRebuildFailed);
    }
    let mean = body.iter().copied().sum::<Vec3>() / body.len() as f64;
    let view_axis = camera_pose.orientation.rotate(Vec3::Z);
    let centroid = mean + view_axis * cfg.centroid_depth_offset;

    let inflate = |p: Vec3| centroid + (p - centroid) * cfg.safety_scale;
    let node = |p: Vec3, class: DetectionClass| match class {
        DetectionClass::Body => FieldNode::attractive(inflate(p), cfg.mu_attractive),
        DetectionClass::SolarPanel => FieldNode::repulsive(inflate(p), cfg.mu_repulsive),
    };

    let mut nodes = Vec::with_capacity(raw.len() * 2 + 2);
    for chunk in raw.chunks(5) {
        nodes.extend(chunk.iter().map(|&(p, c)| node(p, c)));
        nodes.extend(chunk.iter().map(|&(p, c)| node(centroid * 2.0 - p, c)));
    }
    let hx = cfg.body_half_extents.x;
    let first_dock = nodes.len();
    nodes.push(FieldNode::attractive(
        inflate(centroid - Vec3::X * hx),
        cfg.mu_attractive,
    ));
    nodes.push(FieldNode::attractive(
        inflate(centroid + Vec3::X * hx),
        cfg.mu_attractive,
    ));

    let set = NodeSet {
        nodes,
        primary_dock_nodes: [first_dock, first_dock + 1],
        centroid,
    };
    if !set.validate() {
        return Err(VisionError::NodeRebuildFailed);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vision::detect::BBox;

    fn cfg() -> RebuildConfig {
        RebuildConfig {
            safety_scale: 1.75,
            body_half_extents: Vec3::new(0.2, 0.2, 0.2),
            centroid_depth_offset: 0.0,
            mu_attractive: 0.1,
            mu_repulsive: -0.015,
        }
    }

    fn det(class: DetectionClass, points: [Vec3; 5]) -> Detection {
        Detection {
            class,
            bbox: BBox::new(0.0, 0.0, 1.0, 1.0),
            points,
        }
    }

    #[test]
    fn no_body_fails() {
        let d = det(DetectionClass::SolarPanel, [Vec3::X; 5]);
        assert_eq!(
            rebuild_nodes(&[d], &Pose::IDENTITY, &cfg()),
            Err(VisionError::NodeRebuildFailed)
        );
        assert_eq!(
            rebuild_nodes(&[], &Pose::IDENTITY, &cfg()),
            Err(VisionError::NodeRebuildFailed)
        );
    }

    #[test]
    fn panel_offset_reflects_and_scales() {
        // body points symmetric about the origin, so the centroid is the origin
        let s = 0.1;
        let body = det(
            DetectionClass::Body,
            [
                Vec3::ZERO,
                Vec3::new(-s, -s, 0.0),
                Vec3::new(s, -s, 0.0),
                Vec3::new(s, s, 0.0),
                Vec3::new(-s, s, 0.0),
            ],
        );
        let d = Vec3::new(0.1, 0.6, -0.05);
        let panel = det(DetectionClass::SolarPanel, [d; 5]);
        let set = rebuild_nodes(&[body, panel], &Pose::IDENTITY, &cfg()).unwrap();
        assert_eq!(set.centroid, Vec3::ZERO);
        let reps: Vec<_> = set.nodes.iter().filter(|n| n.kind == NodeKind::Repulsive).collect();
        assert_eq!(reps.len(), 10);
        assert!(reps[..5].iter().all(|n| (n.position - d * 1.75).norm() < 1e-12));
        assert!(reps[5..].iter().all(|n| (n.position + d * 1.75).norm() < 1e-12));
        assert!(reps.iter().all(|n| n.gain == -0.015));
        let [a, b] = set.dock_positions();
        assert!((a - Vec3::new(-0.35, 0.0, 0.0)).norm() < 1e-12);
        assert!((b - Vec3::new(0.35, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn depth_offset_moves_centroid_along_view_axis() {
        let body = det(DetectionClass::Body, [Vec3::new(0.0, 0.0, 2.8); 5]);
        let pose = Pose::translation(Vec3::new(0.0, 0.0, -3.0));
        let mut c = cfg();
        c.centroid_depth_offset = 0.2;
        let set = rebuild_nodes(&[body], &pose, &c).unwrap();
        assert!(set.centroid.norm() < 1e-12, "{}", set.centroid);
    }
}
