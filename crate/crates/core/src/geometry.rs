//! Vectors, unit quaternions, controller poses and the controller frame.
//!
//! Frame convention: the controller's local `+X` is its *side* axis, `+Y` its
//! *up* axis and `+Z` its *forward* axis. The frame is right-handed
//! (`side × up = forward`) and world up is `+Y`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| |q| - 1 |` for an orientation to count as a unit quaternion.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
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

    /// Unit vector in the same direction, or `None` when the norm is below `eps`.
    pub fn try_normalize(self, eps: f64) -> Option<Vec3> {
        let n = self.norm();
        (n > eps && n.is_finite()).then(|| self / n)
    }

    /// Normalizes without checking; callers guarantee a nonzero vector.
    pub fn normalize(self) -> Vec3 {
        self / self.norm()
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = if self.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        self.cross(a).normalize()
    }

    /// Angle in `[0, π]` between two nonzero vectors.
    pub fn angle_to(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
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

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Rotation stored as a unit quaternion `(w, x, y, z)`.
///
/// Construction through [`UnitQuat::new`] validates the norm; the arithmetic
/// helpers keep results normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuat {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl TryFrom<[f64; 4]> for UnitQuat {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        UnitQuat::new(a[0], a[1], a[2], a[3])
    }
}

impl From<UnitQuat> for [f64; 4] {
    fn from(q: UnitQuat) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Default for UnitQuat {
    fn default() -> Self {
        UnitQuat::IDENTITY
    }
}

impl UnitQuat {
    pub const IDENTITY: UnitQuat = UnitQuat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Validating constructor: the norm must be within [`UNIT_TOLERANCE`] of 1.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidPose(format!(
                "quaternion ({w}, {x}, {y}, {z}) has norm {n}"
            )));
        }
        Ok(UnitQuat { w, x, y, z })
    }

    /// Normalizes an arbitrary nonzero quaternion.
    pub fn normalized(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidPose("zero or non-finite quaternion".into()));
        }
        Ok(UnitQuat { w: w / n, x: x / n, y: y / n, z: z / n })
    }

    fn renorm(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        UnitQuat { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    /// Rotation of `angle` radians about `axis` (any nonzero vector).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = match axis.try_normalize(1e-300) {
            Some(a) => a,
            None => return UnitQuat::IDENTITY,
        };
        let (s, c) = (0.5 * angle).sin_cos();
        UnitQuat::renorm(c, a.x * s, a.y * s, a.z * s)
    }

    /// Rotation by the rotation vector `v` (axis · angle).
    pub fn from_rotation_vector(v: Vec3) -> Self {
        let angle = v.norm();
        if angle == 0.0 {
            UnitQuat::IDENTITY
        } else {
            UnitQuat::from_axis_angle(v, angle)
        }
    }

    /// Rotation whose matrix has the given columns (an orthonormal, right-handed basis).
    pub fn from_basis(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        let (m00, m01, m02) = (c0.x, c1.x, c2.x);
        let (m10, m11, m12) = (c0.y, c1.y, c2.y);
        let (m20, m21, m22) = (c0.z, c1.z, c2.z);
        let trace = m00 + m11 + m22;
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            [0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s]
        } else if m00 > m11 && m00 > m22 {
            let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
            [(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s]
        } else if m11 > m22 {
            let s = (1.0 + m11 - m00 - m22).sqrt() * 2.0;
            [(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s]
        } else {
            let s = (1.0 + m22 - m00 - m11).sqrt() * 2.0;
            [(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s]
        };
        UnitQuat::renorm(q[0], q[1], q[2], q[3]).canonical()
    }

    /// Smallest rotation taking unit vector `from` onto unit vector `to`.
    pub fn rotation_arc(from: Vec3, to: Vec3) -> Self {
        let c = from.dot(to);
        if c < -1.0 + 1e-15 {
            return UnitQuat::from_axis_angle(from.any_orthogonal(), std::f64::consts::PI);
        }
        let axis = from.cross(to);
        UnitQuat::renorm(1.0 + c, axis.x, axis.y, axis.z)
    }

    pub fn w(self) -> f64 {
        self.w
    }
    pub fn x(self) -> f64 {
        self.x
    }
    pub fn y(self) -> f64 {
        self.y
    }
    pub fn z(self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Representative of the double cover with `w ≥ 0`.
    pub fn canonical(self) -> Self {
        if self.w < 0.0 {
            UnitQuat { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
        } else {
            self
        }
    }

    pub fn conjugate(self) -> Self {
        UnitQuat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Rotates a vector.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = 2.0 * u.cross(v);
        v + self.w * t + u.cross(t)
    }

    /// Angle of the rotation that takes `self` onto `other`, in `[0, π]`.
    pub fn angle_to(self, other: UnitQuat) -> f64 {
        rotation_between(self, other).1
    }
}

impl Mul for UnitQuat {
    type Output = UnitQuat;
    /// Hamilton product: `(a * b).rotate(v) == a.rotate(b.rotate(v))`.
    fn mul(self, b: UnitQuat) -> UnitQuat {
        let a = self;
        UnitQuat::renorm(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

/// One timestamped 6-DOF controller sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Seconds.
    #[serde(rename = "t")]
    pub timestamp: f64,
    /// Controller tip, meters.
    #[serde(rename = "p")]
    pub position: Vec3,
    #[serde(rename = "q")]
    pub orientation: UnitQuat,
    #[serde(rename = "trig")]
    pub trigger: bool,
}

impl Pose {
    pub fn new(timestamp: f64, position: Vec3, orientation: UnitQuat, trigger: bool) -> Self {
        Pose { timestamp, position, orientation, trigger }
    }

    pub fn frame(&self) -> ControllerFrame {
        ControllerFrame::from_orientation(self.orientation)
    }

    /// Checks finiteness and the unit-norm tolerance of the orientation.
    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || !self.timestamp.is_finite() || self.timestamp < 0.0 {
            return Err(Error::InvalidPose(format!(
                "non-finite position or bad timestamp at t={}",
                self.timestamp
            )));
        }
        let q = self.orientation;
        UnitQuat::new(q.w, q.x, q.y, q.z).map(|_| ())
    }
}

/// Checks that timestamps are strictly increasing and every pose is valid.
pub fn validate_stream(poses: &[Pose]) -> Result<()> {
    for (i, p) in poses.iter().enumerate() {
        p.validate()?;
        if i > 0 && p.timestamp <= poses[i - 1].timestamp {
            return Err(Error::InvalidPose(format!(
                "timestamps not strictly increasing at sample {i}"
            )));
        }
    }
    Ok(())
}

/// The controller's local axes expressed in world space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerFrame {
    pub side: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
}

impl ControllerFrame {
    pub fn from_orientation(q: UnitQuat) -> Self {
        ControllerFrame {
            side: q.rotate(Vec3::X),
            up: q.rotate(Vec3::Y),
            forward: q.rotate(Vec3::Z),
        }
    }

    /// Components of a world vector along (side, up, forward).
    pub fn local_components(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.side), v.dot(self.up), v.dot(self.forward))
    }
}

/// World-space controller frame of a pose; rejects non-unit orientations.
pub fn frame_of(pose: &Pose) -> Result<ControllerFrame> {
    pose.validate()?;
    Ok(pose.frame())
}

/// Minimal rotation taking orientation `a` to orientation `b`, as a world
/// axis and an angle in `[0, π]`, so that `from_axis_angle(axis, angle) * a == b`.
///
/// For identical orientations the angle is 0 and the axis is `+X`.
pub fn rotation_between(a: UnitQuat, b: UnitQuat) -> (Vec3, f64) {
    let r = (b * a.conjugate()).canonical();
    let v = Vec3::new(r.x, r.y, r.z);
    let s = v.norm();
    if s < 1e-300 {
        return (Vec3::X, 0.0);
    }
    let angle = 2.0 * s.atan2(r.w);
    (v / s, angle)
}

/// Rotation vector (axis · angle) of [`rotation_between`].
pub fn rotation_vector_between(a: UnitQuat, b: UnitQuat) -> Vec3 {
    let (axis, angle) = rotation_between(a, b);
    axis * angle
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn pose(q: UnitQuat) -> Pose {
        Pose::new(0.0, Vec3::ZERO, q, true)
    }

    #[test]
    fn identity_frame() {
        let f = frame_of(&pose(UnitQuat::IDENTITY)).unwrap();
        assert_eq!(f.side, Vec3::X);
        assert_eq!(f.up, Vec3::Y);
        assert_eq!(f.forward, Vec3::Z);
    }

    #[test]
    fn quarter_turn_about_world_y() {
        let q = UnitQuat::from_axis_angle(Vec3::Y, FRAC_PI_2);
        let f = frame_of(&pose(q)).unwrap();
        assert!(close(f.side, Vec3::new(0.0, 0.0, -1.0), 1e-12));
        assert!(close(f.up, Vec3::Y, 1e-12));
        assert!(close(f.forward, Vec3::X, 1e-12));
    }

    #[test]
    fn frame_matches_rotation_matrix_columns() {
        // Columns of the rotation matrix for q = (1/2)(1, 1, 1, 1), written out from
        // R = [[1-2(y²+z²), 2(xy-wz), 2(xz+wy)], [2(xy+wz), 1-2(x²+z²), 2(yz-wx)], [2(xz-wy), 2(yz+wx), 1-2(x²+y²)]].
        let q = UnitQuat::new(0.5, 0.5, 0.5, 0.5).unwrap();
        let f = frame_of(&pose(q)).unwrap();
        assert!(close(f.side, Vec3::new(0.0, 1.0, 0.0), 1e-12));
        assert!(close(f.up, Vec3::new(0.0, 0.0, 1.0), 1e-12));
        assert!(close(f.forward, Vec3::new(1.0, 0.0, 0.0), 1e-12));
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(matches!(UnitQuat::new(1.0, 0.1, 0.0, 0.0), Err(Error::InvalidPose(_))));
        let bad = Pose { orientation: UnitQuat { w: 2.0, x: 0.0, y: 0.0, z: 0.0 }, ..pose(UnitQuat::IDENTITY) };
        assert!(frame_of(&bad).is_err());
    }

    #[test]
    fn rotation_between_cases() {
        let a = UnitQuat::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7);
        let (_, angle) = rotation_between(a, a);
        assert!(angle.abs() < 1e-12);

        let b = UnitQuat::from_axis_angle(Vec3::Z, FRAC_PI_2) * a;
        let (axis, angle) = rotation_between(a, b);
        assert!((angle - FRAC_PI_2).abs() < 1e-12);
        assert!(close(axis, Vec3::Z, 1e-12));
    }

    #[test]
    fn from_basis_round_trips() {
        let q = UnitQuat::from_axis_angle(Vec3::new(-0.3, 0.9, 0.2), 2.9);
        let f = q.frame_only();
        let r = UnitQuat::from_basis(f.side, f.up, f.forward);
        assert!(q.canonical().angle_to(r) < 1e-12);
    }

    #[test]
    fn rotation_arc_maps_vectors() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(0.0, FRAC_PI_4.cos(), FRAC_PI_4.sin());
        assert!(close(UnitQuat::rotation_arc(a, b).rotate(a), b, 1e-12));
        assert!(close(UnitQuat::rotation_arc(a, -a).rotate(a), -a, 1e-12));
    }

    #[test]
    fn pose_json_shape() {
        let p = Pose::new(0.5, Vec3::new(1.0, 2.0, 3.0), UnitQuat::IDENTITY, true);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"t":0.5,"p":[1.0,2.0,3.0],"q":[1.0,0.0,0.0,0.0],"trig":true}"#);
        let back: Pose = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Pose>(r#"{"t":0,"p":[0,0,0],"q":[2,0,0,0],"trig":true}"#).is_err());
    }

    impl UnitQuat {
        fn frame_only(self) -> ControllerFrame {
            ControllerFrame::from_orientation(self)
        }
    }
}
