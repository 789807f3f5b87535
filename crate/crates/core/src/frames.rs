//! Coordinate frames and the rigid conversions between them.
//!
//! The guidance frame (`Apf`) is LVLH-aligned and centered on the target
//! centroid captured at scenario start: x along the target velocity, z toward
//! nadir, y completing the right-handed triad. It does not rotate with the
//! target. Everything internal is in meters; centimeters appear only at the
//! drone-command boundary.
//!
//! Quaternions are scalar-last `(x, y, z, w)`, right-handed, and describe
//! active rotations.

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FrameError {
    #[error("point is not finite: {0}")]
    InvalidPoint(Vec3),
    #[error("pose is invalid: {0}")]
    InvalidPose(&'static str),
}

/// Three-component vector. Meters, m/s or m/s² depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` when the length is below `eps`.
    pub fn try_normalize(self, eps: f64) -> Option<Vec3> {
        let n = self.norm();
        if n < eps || !n.is_finite() {
            None
        } else {
            Some(self / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    pub fn component_mul(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl std::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, Add::add)
    }
}

/// Rotation quaternion, scalar-last.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 1.0,
    };

    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self { x, y, z, w }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis.try_normalize(1e-15).unwrap_or(Vec3::Z);
        let (s, c) = (angle * 0.5).sin_cos();
        Quat::new(a.x * s, a.y * s, a.z * s, c)
    }

    /// Yaw, pitch and roll about the frame's z, y and x axes, applied in that
    /// order (z-y-x intrinsic).
    pub fn from_yaw_pitch_roll(yaw: f64, pitch: f64, roll: f64) -> Self {
        Quat::from_axis_angle(Vec3::Z, yaw)
            * Quat::from_axis_angle(Vec3::Y, pitch)
            * Quat::from_axis_angle(Vec3::X, roll)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        Quat::new(self.x / n, self.y / n, self.z / n, self.w / n)
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(-self.x, -self.y, -self.z, self.w)
    }

    fn vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Active rotation of `v`.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let q = self.vector();
        let t = 2.0 * q.cross(v);
        v + self.w * t + q.cross(t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.w.is_finite()
    }
}

impl Mul for Quat {
    type Output = Quat;
    /// Hamilton product; `(a * b).rotate(v) == a.rotate(b.rotate(v))`.
    fn mul(self, o: Quat) -> Quat {
        let (a, b) = (self.vector(), o.vector());
        let v = self.w * b + o.w * a + a.cross(b);
        Quat::new(v.x, v.y, v.z, self.w * o.w - a.dot(b))
    }
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        [q.x, q.y, q.z, q.w]
    }
}

/// Position and orientation of a child frame expressed in a parent frame.
/// `parent = orientation.rotate(child) + position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::ZERO,
        orientation: Quat::IDENTITY,
    };

    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self { position, orientation }
    }

    pub fn translation(position: Vec3) -> Self {
        Self::new(position, Quat::IDENTITY)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if !self.position.is_finite() || !self.orientation.is_finite() {
            return Err(FrameError::InvalidPose("non-finite component"));
        }
        if (self.orientation.norm() - 1.0).abs() > 1e-9 {
            return Err(FrameError::InvalidPose("orientation is not a unit quaternion"));
        }
        Ok(())
    }

    pub fn transform(&self, v: Vec3) -> Vec3 {
        self.orientation.rotate(v) + self.position
    }

    pub fn inverse_transform(&self, v: Vec3) -> Vec3 {
        self.orientation.conjugate().rotate(v - self.position)
    }
}

/// Runtime tag naming the frame a vector is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameTag {
    Apf,
    Camera,
    Tracker,
    Drone,
}

pub trait Frame: Copy + fmt::Debug + Default {
    const TAG: FrameTag;
}

macro_rules! frame_marker {
    ($($name:ident => $tag:ident),* $(,)?) => {
        $(
            #[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
            pub struct $name;
            impl Frame for $name {
                const TAG: FrameTag = FrameTag::$tag;
            }
        )*
    };
}

frame_marker!(Apf => Apf, Camera => Camera, Tracker => Tracker, Drone => Drone);

/// A vector statically tagged with the frame it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Framed<F: Frame> {
    v: Vec3,
    _frame: PhantomData<F>,
}

impl<F: Frame> Framed<F> {
    pub const fn new(v: Vec3) -> Self {
        Self { v, _frame: PhantomData }
    }

    pub fn vec(self) -> Vec3 {
        self.v
    }

    pub fn tag(self) -> FrameTag {
        F::TAG
    }
}

impl<F: Frame> From<Vec3> for Framed<F> {
    fn from(v: Vec3) -> Self {
        Framed::new(v)
    }
}

fn check_point(v: Vec3) -> Result<(), FrameError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FrameError::InvalidPoint(v))
    }
}

/// Camera-frame point to guidance frame, given the camera pose in the guidance
/// frame.
pub fn apf_from_camera(point: Framed<Camera>, camera_pose: &Pose) -> Result<Framed<Apf>, FrameError> {
    check_point(point.vec())?;
    camera_pose.validate()?;
    Ok(Framed::new(camera_pose.transform(point.vec())))
}

pub fn camera_from_apf(point: Framed<Apf>, camera_pose: &Pose) -> Result<Framed<Camera>, FrameError> {
    check_point(point.vec())?;
    camera_pose.validate()?;
    Ok(Framed::new(camera_pose.inverse_transform(point.vec())))
}

/// Tracker-frame point to guidance frame, given the tracker origin pose in the
/// guidance frame.
pub fn apf_from_tracker(point: Framed<Tracker>, tracker_pose: &Pose) -> Result<Framed<Apf>, FrameError> {
    check_point(point.vec())?;
    tracker_pose.validate()?;
    Ok(Framed::new(tracker_pose.transform(point.vec())))
}

pub fn tracker_from_apf(point: Framed<Apf>, tracker_pose: &Pose) -> Result<Framed<Tracker>, FrameError> {
    check_point(point.vec())?;
    tracker_pose.validate()?;
    Ok(Framed::new(tracker_pose.inverse_transform(point.vec())))
}

/// The drones fly with Y and Z opposite to the guidance frame.
pub fn drone_from_apf(v: Framed<Apf>) -> Framed<Drone> {
    let v = v.vec();
    Framed::new(Vec3::new(v.x, -v.y, -v.z))
}

pub fn apf_from_drone(v: Framed<Drone>) -> Framed<Apf> {
    let v = v.vec();
    Framed::new(Vec3::new(v.x, -v.y, -v.z))
}

pub const CM_PER_M: f64 = 100.0;
