//! Parametric stand-in for the target satellite: a box body with flat panels.

use serde::{Deserialize, Serialize};

use super::DetectionClass;
use crate::frames::{Pose, Quat, Vec3};

/// Constant body-frame attitude rates in degrees per second.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeRates {
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub roll: f64,
}

/// Flat rectangular panel rooted on the body. All vectors in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Panel {
    /// Midpoint of the root edge.
    pub attachment: Vec3,
    /// Unit vector along the span, pointing away from the body.
    pub direction: Vec3,
    pub length: f64,
    pub width: f64,
    /// Unit normal of the panel face.
    pub normal: Vec3,
}

impl Panel {
    pub fn center(&self) -> Vec3 {
        self.attachment + self.direction * (self.length / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetMockup {
    pub body_half_extents: Vec3,
    #[serde(default)]
    pub panels: Vec<Panel>,
    /// Initial pose in the guidance frame.
    #[serde(default)]
    pub pose: Pose,
    #[serde(default)]
    pub rates: AttitudeRates,
}

impl Default for TargetMockup {
    /// 0.4 m cube with two 0.6 x 0.3 m panels along body +-y, lying in the
    /// body x-y plane.
    fn default() -> Self {
        let panel = |s: f64| Panel {
            attachment: Vec3::new(0.0, s * 0.25, 0.0),
            direction: Vec3::new(0.0, s, 0.0),
            length: 0.6,
            width: 0.3,
            normal: Vec3::Z,
        };
        TargetMockup {
            body_half_extents: Vec3::new(0.2, 0.2, 0.2),
            panels: vec![panel(1.0), panel(-1.0)],
            pose: Pose::IDENTITY,
            rates: AttitudeRates::default(),
        }
    }
}

/// One rectangular face of the mockup in the guidance frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub class: DetectionClass,
    pub center: Vec3,
    pub axis_u: Vec3,
    pub half_u: f64,
    pub axis_v: Vec3,
    pub half_v: f64,
    pub normal: Vec3,
    pub double_sided: bool,
}

impl Face {
    pub fn corners(&self) -> [Vec3; 4] {
        let (u, v) = (self.axis_u * self.half_u, self.axis_v * self.half_v);
        [
            self.center - u - v,
            self.center + u - v,
            self.center + u + v,
            self.center - u + v,
        ]
    }

    /// Euclidean distance from `p` to the closed rectangle.
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let d = p - self.center;
        let a = d.dot(self.axis_u).clamp(-self.half_u, self.half_u);
        let b = d.dot(self.axis_v).clamp(-self.half_v, self.half_v);
        p.distance(self.center + self.axis_u * a + self.axis_v * b)
    }
}

impl TargetMockup {
    pub fn validate(&self) -> Result<(), String> {
        let h = self.body_half_extents;
        if !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0) || !h.is_finite() {
            return Err(format!("body half-extents must be positive, got {h}"));
        }
        for (i, p) in self.panels.iter().enumerate() {
            if !(p.length > 0.0 && p.width > 0.0) {
                return Err(format!("panel {i}: spans must be positive"));
            }
            if (p.direction.norm() - 1.0).abs() > 1e-6 || (p.normal.norm() - 1.0).abs() > 1e-6 {
                return Err(format!("panel {i}: direction and normal must be unit vectors"));
            }
            if p.direction.dot(p.normal).abs() > 1e-6 {
                return Err(format!("panel {i}: direction must be perpendicular to normal"));
            }
            if !p.attachment.is_finite() {
                return Err(format!("panel {i}: attachment is not finite"));
            }
        }
        self.pose.validate().map_err(|e| e.to_string())?;
        let r = self.rates;
        if !(r.yaw.is_finite() && r.pitch.is_finite() && r.roll.is_finite()) {
            return Err("attitude rates must be finite".into());
        }
        Ok(())
    }

    pub fn attitude_at(&self, t: f64) -> Quat {
        let r = self.rates;
        let spin = Quat::from_yaw_pitch_roll(
            (r.yaw * t).to_radians(),
            (r.pitch * t).to_radians(),
            (r.roll * t).to_radians(),
        );
        (self.pose.orientation * spin).normalized()
    }

    pub fn pose_at(&self, t: f64) -> Pose {
        Pose::new(self.pose.position, self.attitude_at(t))
    }

    /// Body faces (outward normals) followed by panel faces.
    pub fn faces_at(&self, t: f64) -> Vec<Face> {
        let pose = self.pose_at(t);
        let q = pose.orientation;
        let h = self.body_half_extents;
        let axes = [(Vec3::X, h.x), (Vec3::Y, h.y), (Vec3::Z, h.z)];
        let mut faces = Vec::with_capacity(6 + self.panels.len());
        for i in 0..3 {
            let (n, hn) = axes[i];
            let (u, hu) = axes[(i + 1) % 3];
            let (v, hv) = axes[(i + 2) % 3];
            for s in [1.0, -1.0] {
                faces.push(Face {
                    class: DetectionClass::Body,
                    center: pose.transform(n * (s * hn)),
                    axis_u: q.rotate(u),
                    half_u: hu,
                    axis_v: q.rotate(v),
                    half_v: hv,
                    normal: q.rotate(n * s),
                    double_sided: false,
                });
            }
        }
        for p in &self.panels {
            faces.push(Face {
                class: DetectionClass::SolarPanel,
                center: pose.transform(p.center()),
                axis_u: q.rotate(p.direction),
                half_u: p.length / 2.0,
                axis_v: q.rotate(p.normal.cross(p.direction)),
                half_v: p.width / 2.0,
                normal: q.rotate(p.normal),
                double_sided: true,
            });
        }
        faces
    }

    /// Smallest distance from `p` to any panel at time `t`.
    pub fn panel_distance(&self, p: Vec3, t: f64) -> f64 {
        self.faces_at(t)
            .iter()
            .filter(|f| f.class == DetectionClass::SolarPanel)
            .map(|f| f.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}
