use serde::{Deserialize, Serialize};

use crate::frames::Vec3;

/// Pinhole intrinsics. Camera frame: z forward (optical axis), x right, y down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Intrinsics {
    /// Roughly a D435i color stream: 69 deg horizontal field of view at 848x480.
    fn default() -> Self {
        Intrinsics::from_hfov(69.0, 848, 480)
    }
}

impl Intrinsics {
    /// Square pixels, principal point at the image center.
    pub fn from_hfov(hfov_deg: f64, width: u32, height: u32) -> Self {
        let f = (width as f64 / 2.0) / (hfov_deg.to_radians() / 2.0).tan();
        Intrinsics {
            fx: f,
            fy: f,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.fx > 0.0
            && self.fy > 0.0
            && self.fx.is_finite()
            && self.fy.is_finite()
            && self.cx.is_finite()
            && self.cy.is_finite()
            && self.width > 0
            && self.height > 0
    }

    /// Pixel coordinates of a camera-frame point, `None` behind the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        if p.z <= 1e-9 {
            return None;
        }
        Some((self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Viewing ray through pixel `(u, v)`, scaled so its z component is 1.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Camera-frame point at pixel `(u, v)` with depth (z) `depth`.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        self.ray(u, v) * depth
    }
}
