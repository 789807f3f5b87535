//! Synthetic detector: projects mockup faces through a pinhole camera and
//! reports each visible component as a bounding box with five 3D points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::camera::Intrinsics;
use super::mockup::{Face, TargetMockup};
use super::{DetectionClass, VisionError};
use crate::frames::{Pose, Vec3};

/// Fraction of the box width/height by which P2..P5 sit inside the corners.
pub const CORNER_INSET: f64 = 0.1;

/// Faces closer than this to edge-on (cosine of the view angle) are culled.
const MIN_VIEW_COSINE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl BBox {
    pub fn new(u_min: f64, v_min: f64, u_max: f64, v_max: f64) -> Self {
        Self {
            u_min,
            v_min,
            u_max,
            v_max,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        let vals = [self.u_min, self.v_min, self.u_max, self.v_max];
        vals.iter().any(|v| !v.is_finite()) || self.u_max <= self.u_min || self.v_max <= self.v_min
    }

    pub fn width(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn height(&self) -> f64 {
        self.v_max - self.v_min
    }

    /// P1 (centroid) then P2..P5 inset from the top-left, top-right,
    /// bottom-right and bottom-left corners.
    pub fn sample_pixels(&self) -> [(f64, f64); 5] {
        let (du, dv) = (CORNER_INSET * self.width(), CORNER_INSET * self.height());
        [
            ((self.u_min + self.u_max) / 2.0, (self.v_min + self.v_max) / 2.0),
            (self.u_min + du, self.v_min + dv),
            (self.u_max - du, self.v_min + dv),
            (self.u_max - du, self.v_max - dv),
            (self.u_min + du, self.v_max - dv),
        ]
    }
}

/// One classified component. `points` are in the camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: DetectionClass,
    pub bbox: BBox,
    pub points: [Vec3; 5],
}

/// Depth (camera z, meters) at a pixel; `None` where the sensor has no return.
pub trait DepthLookup {
    fn depth(&self, u: f64, v: f64) -> Option<f64>;
}

/// Dense depth image; non-finite or non-positive entries are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn filled(width: u32, height: u32, depth: f64) -> Self {
        DepthImage {
            width,
            height,
            data: vec![depth; width as usize * height as usize],
        }
    }

    pub fn set(&mut self, col: u32, row: u32, depth: f64) {
        let i = row as usize * self.width as usize + col as usize;
        self.data[i] = depth;
    }
}

impl DepthLookup for DepthImage {
    fn depth(&self, u: f64, v: f64) -> Option<f64> {
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let (c, r) = (u.floor() as u64, v.floor() as u64);
        if c >= self.width as u64 || r >= self.height as u64 {
            return None;
        }
        let d = self.data[r as usize * self.width as usize + c as usize];
        (d.is_finite() && d > 0.0).then_some(d)
    }
}

/// Depth of an infinite plane seen through the pinhole model.
#[derive(Debug, Clone, Copy)]
pub struct PlaneDepth {
    pub intrinsics: Intrinsics,
    /// Point on the plane, camera frame.
    pub origin: Vec3,
    /// Plane normal, camera frame.
    pub normal: Vec3,
}

impl DepthLookup for PlaneDepth {
    fn depth(&self, u: f64, v: f64) -> Option<f64> {
        let ray = self.intrinsics.ray(u, v);
        let denom = self.normal.dot(ray);
        if denom.abs() < 1e-12 {
            return None;
        }
        let z = self.normal.dot(self.origin) / denom;
        (z.is_finite() && z > 0.0).then_some(z)
    }
}

/// Nearest valid depth (by pixel-center distance) among pixels inside `bbox`.
fn nearest_valid_depth(bbox: &BBox, depth: &dyn DepthLookup, u: f64, v: f64) -> Option<f64> {
    let c0 = bbox.u_min.floor().max(0.0) as i64;
    let c1 = bbox.u_max.ceil() as i64;
    let r0 = bbox.v_min.floor().max(0.0) as i64;
    let r1 = bbox.v_max.ceil() as i64;
    let mut best: Option<(f64, f64)> = None;
    for r in r0..r1 {
        let pv = r as f64 + 0.5;
        if pv < bbox.v_min || pv > bbox.v_max {
            continue;
        }
        for c in c0..c1 {
            let pu = c as f64 + 0.5;
            if pu < bbox.u_min || pu > bbox.u_max {
                continue;
            }
            let d2 = (pu - u).powi(2) + (pv - v).powi(2);
            if best.is_some_and(|(bd, _)| bd <= d2) {
                continue;
            }
            if let Some(z) = depth.depth(pu, pv) {
                best = Some((d2, z));
            }
        }
    }
    best.map(|(_, z)| z)
}

/// Back-projects the centroid and four inset corners of `bbox`.
///
/// A sample without a depth return borrows the nearest valid depth inside the
/// box; a box with no valid depth at all is dropped.
pub fn extract_five_points(
    bbox: &BBox,
    depth: &dyn DepthLookup,
    intrinsics: &Intrinsics,
) -> Result<[Vec3; 5], VisionError> {
    if bbox.is_degenerate() {
        return Err(VisionError::DetectionDropped("degenerate bounding box"));
    }
    let mut out = [Vec3::ZERO; 5];
    for (slot, (u, v)) in out.iter_mut().zip(bbox.sample_pixels()) {
        let z = match depth.depth(u, v) {
            Some(z) => z,
            None => nearest_valid_depth(bbox, depth, u, v)
                .ok_or(VisionError::DetectionDropped("no valid depth inside bounding box"))?,
        };
        *slot = intrinsics.back_project(u, v, z);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    /// Camera pose in the guidance frame.
    pub pose: Pose,
    #[serde(default)]
    pub intrinsics: Intrinsics,
    /// Detections farther than this are dropped.
    #[serde(default = "default_max_range")]
    pub max_range: f64,
}

fn default_max_range() -> f64 {
    5.0
}

impl Default for CameraConfig {
    /// Three meters above the target (guidance -z) looking down along +z.
    fn default() -> Self {
        CameraConfig {
            pose: Pose::translation(Vec3::new(0.0, 0.0, -3.0)),
            intrinsics: Intrinsics::default(),
            max_range: default_max_range(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Per-axis standard deviation of point noise, meters.
    #[serde(default)]
    pub sigma: f64,
    /// Scale on `sigma` while a depth fault is active; 1 otherwise.
    #[serde(default = "one")]
    pub multiplier: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma: 0.0,
            multiplier: 1.0,
        }
    }
}

impl NoiseSpec {
    pub fn effective_sigma(&self) -> f64 {
        self.sigma * self.multiplier
    }
}

fn face_detection(face: &Face, camera: &CameraConfig) -> Option<Result<Detection, VisionError>> {
    let k = &camera.intrinsics;
    let corners = face.corners().map(|c| camera.pose.inverse_transform(c));
    let mut bbox = BBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let (u, v) = k.project(c)?;
        bbox.u_min = bbox.u_min.min(u);
        bbox.v_min = bbox.v_min.min(v);
        bbox.u_max = bbox.u_max.max(u);
        bbox.v_max = bbox.v_max.max(v);
    }
    bbox.u_min = bbox.u_min.max(0.0);
    bbox.v_min = bbox.v_min.max(0.0);
    bbox.u_max = bbox.u_max.min(k.width as f64);
    bbox.v_max = bbox.v_max.min(k.height as f64);
    if bbox.is_degenerate() {
        return None;
    }
    let plane = PlaneDepth {
        intrinsics: *k,
        origin: camera.pose.inverse_transform(face.center),
        normal: camera.pose.orientation.conjugate().rotate(face.normal),
    };
    Some(extract_five_points(&bbox, &plane, k).map(|points| Detection {
        class: face.class,
        bbox,
        points,
    }))
}

/// Cosine between a face's outward normal and the direction to the camera;
/// double-sided faces use whichever side faces the camera.
fn view_cosine(face: &Face, camera_position: Vec3) -> Option<f64> {
    let to_cam = (camera_position - face.center).try_normalize(1e-12)?;
    let c = face.normal.dot(to_cam);
    Some(if face.double_sided { c.abs() } else { c })
}

/// Detections of every component facing the camera at time `t`.
///
/// The body yields at most one detection, from its most camera-facing face.
/// Each returned point carries independent zero-mean Gaussian noise per axis
/// with standard deviation `noise.effective_sigma()`.
pub fn render_detections<R: Rng + ?Sized>(
    mock: &TargetMockup,
    camera: &CameraConfig,
    t: f64,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Vec<Detection> {
    let cam_pos = camera.pose.position;
    let faces = mock.faces_at(t);
    let visible = |f: &&Face| {
        view_cosine(f, cam_pos).is_some_and(|c| c > MIN_VIEW_COSINE) && f.center.distance(cam_pos) <= camera.max_range
    };
    let body = faces
        .iter()
        .filter(|f| f.class == DetectionClass::Body)
        .filter(visible)
        .max_by(|a, b| {
            let ca = view_cosine(a, cam_pos).unwrap_or(-1.0);
            let cb = view_cosine(b, cam_pos).unwrap_or(-1.0);
            ca.total_cmp(&cb)
        });
    let panels = faces
        .iter()
        .filter(|f| f.class == DetectionClass::SolarPanel)
        .filter(visible);

    let sigma = noise.effective_sigma();
    let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
    body.into_iter()
        .chain(panels)
        .filter_map(|f| face_detection(f, camera)?.ok())
        .map(|mut det| {
            if let Some(n) = &normal {
                for p in det.points.iter_mut() {
                    *p += Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng));
                }
            }
            det
        })
        .collect()
}

/// Frame-rate gate around [`render_detections`]: a fresh set is produced at
/// most once per `period` seconds of sim time; in between, the last set is
/// held.
#[derive(Debug, Clone)]
pub struct VisionSensor {
    pub camera: CameraConfig,
    pub noise: NoiseSpec,
    pub period: f64,
    rng: ChaCha8Rng,
    last: Option<(f64, Vec<Detection>)>,
}

/// 2 frames per second.
pub const DEFAULT_FRAME_PERIOD: f64 = 0.5;

impl VisionSensor {
    pub fn new(camera: CameraConfig, noise: NoiseSpec, seed: u64) -> Self {
        VisionSensor {
            camera,
            noise,
            period: DEFAULT_FRAME_PERIOD,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: None,
        }
    }

    /// Returns whether a new frame was produced, and the current detections.
    pub fn poll(&mut self, mock: &TargetMockup, t: f64) -> (bool, &[Detection]) {
        let due = match &self.last {
            None => true,
            Some((t0, _)) => t - t0 >= self.period - 1e-9,
        };
        if due {
            let dets = render_detections(mock, &self.camera, t, &self.noise, &mut self.rng);
            self.last = Some((t, dets));
        }
        (due, self.last.as_ref().map(|(_, d)| d.as_slice()).unwrap_or(&[]))
    }
}
