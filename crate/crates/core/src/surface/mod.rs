//! Analytic reference surfaces.
//!
//! Every shape is a parametric patch `S(u, v)` in a local frame, mapped to
//! world space by a rigid [`Placement`]. Normals are outward (for the open
//! planar shapes and the saddle: `+Z` in the local frame), and curvature is
//! signed so that convex closed shapes have positive principal curvatures.

mod project;
mod registry;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{UnitQuat, Vec3};

pub use project::Projection;
pub use registry::{parse_key_values, SurfaceConfig};

/// Below this `|k|` (1/m) a principal curvature counts as zero.
pub const TOL_PLANAR: f64 = 1e-6;
/// Relative spread `|k_max − k_min| / max|k|` under which a point is umbilic.
pub const TOL_UMBILIC: f64 = 1e-3;
/// Interior margin (parameter units) used when sampling surface points.
pub const SAMPLING_MARGIN: f64 = 1e-3;

const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Square,
    Triangle,
    Circle,
    Cone,
    Cylinder,
    Hemisphere,
    Sphere,
    Ellipsoid,
    Torus,
    Saddle,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 10] = [
        SurfaceKind::Square,
        SurfaceKind::Triangle,
        SurfaceKind::Circle,
        SurfaceKind::Cone,
        SurfaceKind::Cylinder,
        SurfaceKind::Hemisphere,
        SurfaceKind::Sphere,
        SurfaceKind::Ellipsoid,
        SurfaceKind::Torus,
        SurfaceKind::Saddle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Square => "square",
            SurfaceKind::Triangle => "triangle",
            SurfaceKind::Circle => "circle",
            SurfaceKind::Cone => "cone",
            SurfaceKind::Cylinder => "cylinder",
            SurfaceKind::Hemisphere => "hemisphere",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Ellipsoid => "ellipsoid",
            SurfaceKind::Torus => "torus",
            SurfaceKind::Saddle => "saddle",
        }
    }

    /// Closed shapes of the comparative study set. Cone and cylinder are
    /// modeled by their lateral surfaces.
    pub fn is_closed(self) -> bool {
        matches!(
            self,
            SurfaceKind::Cone | SurfaceKind::Cylinder | SurfaceKind::Sphere | SurfaceKind::Ellipsoid | SurfaceKind::Torus
        )
    }

    pub fn is_planar(self) -> bool {
        matches!(self, SurfaceKind::Square | SurfaceKind::Triangle | SurfaceKind::Circle)
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurfaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let k = match s.to_ascii_lowercase().as_str() {
            "square" => SurfaceKind::Square,
            "triangle" => SurfaceKind::Triangle,
            "circle" | "disk" => SurfaceKind::Circle,
            "cone" => SurfaceKind::Cone,
            "cylinder" => SurfaceKind::Cylinder,
            "hemisphere" => SurfaceKind::Hemisphere,
            "sphere" => SurfaceKind::Sphere,
            "ellipsoid" => SurfaceKind::Ellipsoid,
            "torus" => SurfaceKind::Torus,
            "saddle" | "hyperbolic_paraboloid" => SurfaceKind::Saddle,
            other => return Err(Error::Usage(format!("unknown surface `{other}`"))),
        };
        Ok(k)
    }
}

/// Shape parameters in meters (saddle coefficients in 1/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Square { side: f64 },
    /// Equilateral, centroid at the origin.
    Triangle { side: f64 },
    Circle { radius: f64 },
    /// Lateral surface; base circle at `z = 0`, apex at `z = height`.
    Cone { radius: f64, height: f64 },
    /// Lateral surface, centered on the origin along `z`.
    Cylinder { radius: f64, height: f64 },
    /// Upper half (`z ≥ 0`).
    Hemisphere { radius: f64 },
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Torus { major: f64, minor: f64 },
    /// `z = a·u² − b·v²` over `[−half_extent, half_extent]²`.
    Saddle { a: f64, b: f64, half_extent: f64 },
}

impl Shape {
    pub fn kind(&self) -> SurfaceKind {
        match self {
            Shape::Square { .. } => SurfaceKind::Square,
            Shape::Triangle { .. } => SurfaceKind::Triangle,
            Shape::Circle { .. } => SurfaceKind::Circle,
            Shape::Cone { .. } => SurfaceKind::Cone,
            Shape::Cylinder { .. } => SurfaceKind::Cylinder,
            Shape::Hemisphere { .. } => SurfaceKind::Hemisphere,
            Shape::Sphere { .. } => SurfaceKind::Sphere,
            Shape::Ellipsoid { .. } => SurfaceKind::Ellipsoid,
            Shape::Torus { .. } => SurfaceKind::Torus,
            Shape::Saddle { .. } => SurfaceKind::Saddle,
        }
    }

    fn sizes(&self) -> Vec<f64> {
        match *self {
            Shape::Square { side } | Shape::Triangle { side } => vec![side],
            Shape::Circle { radius } | Shape::Hemisphere { radius } | Shape::Sphere { radius } => vec![radius],
            Shape::Cone { radius, height } | Shape::Cylinder { radius, height } => vec![radius, height],
            Shape::Ellipsoid { a, b, c } => vec![a, b, c],
            Shape::Torus { major, minor } => vec![major, minor],
            Shape::Saddle { a, b, half_extent } => vec![a, b, half_extent],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes().iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::contract(format!("{} parameters must be positive: {self:?}", self.kind())));
        }
        if let Shape::Torus { major, minor } = *self {
            if major <= minor {
                return Err(Error::contract(format!("torus needs major > minor, got {major} <= {minor}")));
            }
        }
        Ok(())
    }

    /// Largest linear dimension, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        match *self {
            Shape::Saddle { half_extent, .. } => 2.0 * half_extent,
            Shape::Torus { major, minor } => major + minor,
            _ => self.sizes().into_iter().fold(0.0, f64::max),
        }
    }

    fn orientation_sign(&self) -> f64 {
        match self {
            Shape::Sphere { .. } | Shape::Hemisphere { .. } | Shape::Ellipsoid { .. } => -1.0,
            _ => 1.0,
        }
    }
}

/// Shape of the valid `(u, v)` region inside the parameter bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect,
    /// `u ≥ 0, v ≥ 0, u + v ≤ 1`.
    Triangle,
    /// `u² + v² ≤ r²`.
    Disk(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub u_periodic: bool,
    pub v_periodic: bool,
    pub region: Region,
}

impl Domain {
    fn wrap(x: f64, periodic: bool, (lo, hi): (f64, f64)) -> f64 {
        if periodic {
            lo + (x - lo).rem_euclid(hi - lo)
        } else {
            x
        }
    }

    /// Wraps periodic parameters into their base interval.
    pub fn normalize(&self, u: f64, v: f64) -> (f64, f64) {
        (Self::wrap(u, self.u_periodic, self.u), Self::wrap(v, self.v_periodic, self.v))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.contains_with_margin(u, v, -DOMAIN_SLACK)
    }

    /// Membership of the region shrunk by `margin` (negative grows it).
    pub fn contains_with_margin(&self, u: f64, v: f64, margin: f64) -> bool {
        if !u.is_finite() || !v.is_finite() {
            return false;
        }
        let (u, v) = self.normalize(u, v);
        let inside = |x: f64, periodic: bool, (lo, hi): (f64, f64)| periodic || (x >= lo + margin && x <= hi - margin);
        if !inside(u, self.u_periodic, self.u) || !inside(v, self.v_periodic, self.v) {
            return false;
        }
        match self.region {
            Region::Rect => true,
            Region::Triangle => u + v <= 1.0 - margin,
            Region::Disk(r) => (u * u + v * v).sqrt() <= r - margin,
        }
    }

    /// Clamps into the bounds (and region); periodic parameters are wrapped.
    pub fn clamp(&self, u: f64, v: f64) -> (f64, f64) {
        let (mut u, mut v) = self.normalize(u, v);
        if !self.u_periodic {
            u = u.clamp(self.u.0, self.u.1);
        }
        if !self.v_periodic {
            v = v.clamp(self.v.0, self.v.1);
        }
        match self.region {
            Region::Rect => (u, v),
            Region::Triangle => {
                let excess = u + v - 1.0;
                if excess > 0.0 {
                    ((u - excess / 2.0).clamp(0.0, 1.0), (v - excess / 2.0).clamp(0.0, 1.0))
                } else {
                    (u, v)
                }
            }
            Region::Disk(r) => {
                let n = (u * u + v * v).sqrt();
                if n > r {
                    (u * r / n, v * r / n)
                } else {
                    (u, v)
                }
            }
        }
    }
}

/// Rigid placement of a shape in the world.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub rotation: UnitQuat,
    pub translation: Vec3,
}

impl Placement {
    pub fn to_world(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    pub fn dir_to_world(&self, d: Vec3) -> Vec3 {
        self.rotation.rotate(d)
    }

    pub fn to_local(&self, p: Vec3) -> Vec3 {
        self.rotation.conjugate().rotate(p - self.translation)
    }

    pub fn dir_to_local(&self, d: Vec3) -> Vec3 {
        self.rotation.conjugate().rotate(d)
    }

    /// `other ∘ self`: apply `self`, then `other`.
    pub fn then(&self, other: &Placement) -> Placement {
        Placement {
            rotation: other.rotation * self.rotation,
            translation: other.to_world(self.translation),
        }
    }
}

/// Position with first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub p: Vec3,
    pub su: Vec3,
    pub sv: Vec3,
    pub suu: Vec3,
    pub suv: Vec3,
    pub svv: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureClass {
    Planar,
    Parabolic,
    Elliptic,
    Hyperbolic,
    SphericalUmbilic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub point: Vec3,
    pub normal: Vec3,
    pub k_min: f64,
    pub k_max: f64,
    pub class: CurvatureClass,
}

/// Classifies a point from its ordered principal curvatures.
pub fn classify_curvature(k_min: f64, k_max: f64, tol_planar: f64, tol_umbilic: f64) -> CurvatureClass {
    let zero_min = k_min.abs() <= tol_planar;
    let zero_max = k_max.abs() <= tol_planar;
    match (zero_min, zero_max) {
        (true, true) => CurvatureClass::Planar,
        (true, false) | (false, true) => CurvatureClass::Parabolic,
        _ if k_min.signum() != k_max.signum() => CurvatureClass::Hyperbolic,
        _ => {
            let spread = (k_max - k_min).abs();
            if spread <= tol_umbilic * k_min.abs().max(k_max.abs()) {
                CurvatureClass::SphericalUmbilic
            } else {
                CurvatureClass::Elliptic
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSurface {
    pub shape: Shape,
    pub placement: Placement,
}

impl ReferenceSurface {
    pub fn new(shape: Shape, placement: Placement) -> Result<Self> {
        shape.validate()?;
        Ok(ReferenceSurface { shape, placement })
    }

    /// Shape at the origin with identity orientation.
    pub fn at_origin(shape: Shape) -> Result<Self> {
        Self::new(shape, Placement::default())
    }

    pub fn kind(&self) -> SurfaceKind {
        self.shape.kind()
    }

    pub fn domain(&self) -> Domain {
        let rect = |u: (f64, f64), v: (f64, f64)| Domain { u, v, u_periodic: false, v_periodic: false, region: Region::Rect };
        let revolve = |v: (f64, f64)| Domain { u: (0.0, TAU), v, u_periodic: true, v_periodic: false, region: Region::Rect };
        match self.shape {
            Shape::Square { side } => rect((-side / 2.0, side / 2.0), (-side / 2.0, side / 2.0)),
            Shape::Triangle { .. } => Domain { region: Region::Triangle, ..rect((0.0, 1.0), (0.0, 1.0)) },
            Shape::Circle { radius } => Domain { region: Region::Disk(radius), ..rect((-radius, radius), (-radius, radius)) },
            Shape::Cone { .. } => revolve((0.0, 1.0)),
            Shape::Cylinder { height, .. } => revolve((-height / 2.0, height / 2.0)),
            Shape::Hemisphere { .. } => revolve((0.0, PI / 2.0)),
            Shape::Sphere { .. } | Shape::Ellipsoid { .. } => revolve((0.0, PI)),
            Shape::Torus { .. } => Domain { u: (0.0, TAU), v: (0.0, TAU), u_periodic: true, v_periodic: true, region: Region::Rect },
            Shape::Saddle { half_extent: e, .. } => rect((-e, e), (-e, e)),
        }
    }

    fn check_domain(&self, u: f64, v: f64) -> Result<()> {
        if self.domain().contains(u, v) {
            Ok(())
        } else {
            Err(Error::Domain { u, v })
        }
    }

    /// Position and derivatives in the local frame (no domain check).
    pub fn local_jet(&self, u: f64, v: f64) -> Jet {
        let z = Vec3::ZERO;
        match self.shape {
            Shape::Square { .. } | Shape::Circle { .. } => {
                Jet { p: Vec3::new(u, v, 0.0), su: Vec3::X, sv: Vec3::Y, suu: z, suv: z, svv: z }
            }
            Shape::Triangle { side } => {
                let h = side * 3f64.sqrt() / 2.0;
                let a = Vec3::new(-side / 2.0, -h / 3.0, 0.0);
                let ab = Vec3::new(side, 0.0, 0.0);
                let ac = Vec3::new(side / 2.0, h, 0.0);
                Jet { p: a + ab * u + ac * v, su: ab, sv: ac, suu: z, suv: z, svv: z }
            }
            Shape::Cone { radius: r, height: h } => {
                let (s, c) = u.sin_cos();
                let rho = r * (1.0 - v);
                Jet {
                    p: Vec3::new(rho * c, rho * s, h * v),
                    su: Vec3::new(-rho * s, rho * c, 0.0),
                    sv: Vec3::new(-r * c, -r * s, h),
                    suu: Vec3::new(-rho * c, -rho * s, 0.0),
                    suv: Vec3::new(r * s, -r * c, 0.0),
                    svv: z,
                }
            }
            Shape::Cylinder { radius: r, .. } => {
                let (s, c) = u.sin_cos();
                Jet {
                    p: Vec3::new(r * c, r * s, v),
                    su: Vec3::new(-r * s, r * c, 0.0),
                    sv: Vec3::Z,
                    suu: Vec3::new(-r * c, -r * s, 0.0),
                    suv: z,
                    svv: z,
                }
            }
            Shape::Sphere { radius: r } | Shape::Hemisphere { radius: r } => ellipsoid_jet(r, r, r, u, v),
            Shape::Ellipsoid { a, b, c } => ellipsoid_jet(a, b, c, u, v),
            Shape::Torus { major, minor } => {
                let (su_, cu) = u.sin_cos();
                let (sv_, cv) = v.sin_cos();
                let w = major + minor * cv;
                Jet {
                    p: Vec3::new(w * cu, w * su_, minor * sv_),
                    su: Vec3::new(-w * su_, w * cu, 0.0),
                    sv: Vec3::new(-minor * sv_ * cu, -minor * sv_ * su_, minor * cv),
                    suu: Vec3::new(-w * cu, -w * su_, 0.0),
                    suv: Vec3::new(minor * sv_ * su_, -minor * sv_ * cu, 0.0),
                    svv: Vec3::new(-minor * cv * cu, -minor * cv * su_, -minor * sv_),
                }
            }
            Shape::Saddle { a, b, .. } => Jet {
                p: Vec3::new(u, v, a * u * u - b * v * v),
                su: Vec3::new(1.0, 0.0, 2.0 * a * u),
                sv: Vec3::new(0.0, 1.0, -2.0 * b * v),
                suu: Vec3::new(0.0, 0.0, 2.0 * a),
                suv: z,
                svv: Vec3::new(0.0, 0.0, -2.0 * b),
            },
        }
    }

    /// World-space jet.
    pub fn jet(&self, u: f64, v: f64) -> Result<Jet> {
        self.check_domain(u, v)?;
        let j = self.local_jet(u, v);
        let d = |x: Vec3| self.placement.dir_to_world(x);
        Ok(Jet { p: self.placement.to_world(j.p), su: d(j.su), sv: d(j.sv), suu: d(j.suu), suv: d(j.suv), svv: d(j.svv) })
    }

    /// World-space point `S(u, v)`.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<Vec3> {
        self.check_domain(u, v)?;
        Ok(self.placement.to_world(self.local_jet(u, v).p))
    }

    /// Partial derivatives `(∂S/∂u, ∂S/∂v)` in world space.
    pub fn partials(&self, u: f64, v: f64) -> Result<(Vec3, Vec3)> {
        self.jet(u, v).map(|j| (j.su, j.sv))
    }

    fn parametric_normal(&self, j: &Jet, u: f64, v: f64) -> Result<Vec3> {
        let s = self.shape.scale();
        let c = j.su.cross(j.sv);
        if c.norm() <= 1e-12 * s * s {
            return Err(Error::Singularity { u, v });
        }
        Ok(c.normalize() * self.shape.orientation_sign())
    }

    /// Outward unit normal in world space.
    ///
    /// Quadrics use the closed-form gradient normal, which stays defined at the
    /// parameterization poles; other shapes use `∂S/∂u × ∂S/∂v`.
    pub fn surface_normal(&self, u: f64, v: f64) -> Result<Vec3> {
        self.check_domain(u, v)?;
        let j = self.local_jet(u, v);
        let local = match self.shape {
            Shape::Sphere { .. } | Shape::Hemisphere { .. } => j.p.normalize(),
            Shape::Ellipsoid { a, b, c } => Vec3::new(j.p.x / (a * a), j.p.y / (b * b), j.p.z / (c * c)).normalize(),
            _ => self.parametric_normal(&j, u, v)?,
        };
        Ok(self.placement.dir_to_world(local))
    }

    /// First (E, F, G) and second (L, M, N) fundamental form coefficients with
    /// the outward normal, signed so that convex shapes bend positively.
    fn fundamental_forms(&self, u: f64, v: f64) -> Result<([f64; 3], [f64; 3])> {
        let j = self.local_jet(u, v);
        let n = self.parametric_normal(&j, u, v)?;
        let first = [j.su.dot(j.su), j.su.dot(j.sv), j.sv.dot(j.sv)];
        let second = [-j.suu.dot(n), -j.suv.dot(n), -j.svv.dot(n)];
        Ok((first, second))
    }

    /// Ordered principal curvatures `(k_min, k_max)` in 1/m.
    pub fn principal_curvatures(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        self.check_domain(u, v)?;
        if let Shape::Sphere { radius } | Shape::Hemisphere { radius } = self.shape {
            return Ok((1.0 / radius, 1.0 / radius));
        }
        let ([e, f, g], [l, m, n]) = self.fundamental_forms(u, v)?;
        let det_i = e * g - f * f;
        let h = (e * n + g * l - 2.0 * f * m) / (2.0 * det_i);
        let k = (l * n - m * m) / det_i;
        let disc = (h * h - k).max(0.0).sqrt();
        Ok((h - disc, h + disc))
    }

    /// Curvature of the normal section along a tangent direction (world space).
    pub fn normal_curvature(&self, u: f64, v: f64, direction: Vec3) -> Result<f64> {
        self.check_domain(u, v)?;
        let t = direction
            .try_normalize(1e-300)
            .ok_or_else(|| Error::contract("normal_curvature needs a nonzero direction"))?;
        let normal = self.surface_normal(u, v)?;
        if t.dot(normal).abs() >= 1e-6 {
            return Err(Error::contract(format!(
                "direction is not tangent: |t·n| = {:e}",
                t.dot(normal).abs()
            )));
        }
        if let Shape::Sphere { radius } | Shape::Hemisphere { radius } = self.shape {
            return Ok(1.0 / radius);
        }
        let j = self.local_jet(u, v);
        let t = self.placement.dir_to_local(t);
        let ([e, f, g], [l, m, n]) = self.fundamental_forms(u, v)?;
        // Coordinates of t in the (Su, Sv) basis.
        let (pu, pv) = (t.dot(j.su), t.dot(j.sv));
        let det = e * g - f * f;
        let a = (g * pu - f * pv) / det;
        let b = (e * pv - f * pu) / det;
        let first = e * a * a + 2.0 * f * a * b + g * b * b;
        Ok((l * a * a + 2.0 * m * a * b + n * b * b) / first)
    }

    pub fn curvature_sample(&self, u: f64, v: f64) -> Result<CurvatureSample> {
        let (k_min, k_max) = self.principal_curvatures(u, v)?;
        Ok(CurvatureSample {
            point: self.evaluate(u, v)?,
            normal: self.surface_normal(u, v)?,
            k_min,
            k_max,
            class: classify_curvature(k_min, k_max, TOL_PLANAR, TOL_UMBILIC),
        })
    }

    /// Uniform random parameter point in the domain shrunk by `margin`.
    pub fn sample_parameters<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> (f64, f64) {
        let d = self.domain();
        let range = |(lo, hi): (f64, f64), periodic: bool| if periodic { (lo, hi) } else { (lo + margin, hi - margin) };
        let (ur, vr) = (range(d.u, d.u_periodic), range(d.v, d.v_periodic));
        loop {
            let u = rng.gen_range(ur.0..ur.1);
            let v = rng.gen_range(vr.0..vr.1);
            if d.contains_with_margin(u, v, margin) {
                return (u, v);
            }
        }
    }

    /// Area element `|∂S/∂u × ∂S/∂v|`.
    pub fn area_element(&self, u: f64, v: f64) -> f64 {
        let j = self.local_jet(u, v);
        j.su.cross(j.sv).norm()
    }

    /// `n` parameter points distributed uniformly with respect to surface area
    /// (rejection sampling against the area element).
    pub fn sample_area_uniform<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(f64, f64)> {
        let d = self.domain();
        let mut max_area: f64 = 0.0;
        let steps = 64;
        for i in 0..=steps {
            for k in 0..=steps {
                let u = d.u.0 + (d.u.1 - d.u.0) * i as f64 / steps as f64;
                let v = d.v.0 + (d.v.1 - d.v.0) * k as f64 / steps as f64;
                max_area = max_area.max(self.area_element(u, v));
            }
        }
        let bound = max_area * 1.05;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = rng.gen_range(d.u.0..d.u.1);
            let v = rng.gen_range(d.v.0..d.v.1);
            if !d.contains(u, v) {
                continue;
            }
            if rng.gen::<f64>() * bound <= self.area_element(u, v) {
                out.push((u, v));
            }
        }
        out
    }
}

fn ellipsoid_jet(a: f64, b: f64, c: f64, u: f64, v: f64) -> Jet {
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    Jet {
        p: Vec3::new(a * sv * cu, b * sv * su, c * cv),
        su: Vec3::new(-a * sv * su, b * sv * cu, 0.0),
        sv: Vec3::new(a * cv * cu, b * cv * su, -c * sv),
        suu: Vec3::new(-a * sv * cu, -b * sv * su, 0.0),
        suv: Vec3::new(-a * cv * su, b * cv * cu, 0.0),
        svv: Vec3::new(-a * sv * cu, -b * sv * su, -c * cv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn surf(shape: Shape) -> ReferenceSurface {
        ReferenceSurface::at_origin(shape).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = surf(Shape::Sphere { radius: 1.0 });
        assert!((s.evaluate(0.3, 0.0).unwrap() - Vec3::Z).norm() < 1e-15);

        let t = surf(Shape::Torus { major: 2.0, minor: 0.5 });
        let p = t.evaluate(0.0, 0.0).unwrap();
        assert!(((p.x * p.x + p.y * p.y).sqrt() - 2.5).abs() < 1e-15);

        let sd = surf(Shape::Saddle { a: 1.0, b: 1.0, half_extent: 2.0 });
        assert_eq!(sd.evaluate(1.0, 1.0).unwrap(), Vec3::new(1.0, 1.0, 0.0));
    }

    #[test]
    fn domain_errors() {
        let s = surf(Shape::Square { side: 1.0 });
        assert!(matches!(s.evaluate(0.6, 0.0), Err(Error::Domain { .. })));
        let d = surf(Shape::Circle { radius: 1.0 });
        assert!(d.evaluate(0.8, 0.8).is_err());
        let t = surf(Shape::Triangle { side: 1.0 });
        assert!(t.evaluate(0.7, 0.7).is_err());
        // Periodic parameters wrap.
        assert!(surf(Shape::Torus { major: 2.0, minor: 0.5 }).evaluate(-1.0, 9.0).is_ok());
    }

    #[test]
    fn validation() {
        assert!(ReferenceSurface::at_origin(Shape::Torus { major: 0.5, minor: 0.5 }).is_err());
        assert!(ReferenceSurface::at_origin(Shape::Sphere { radius: 0.0 }).is_err());
    }

    #[test]
    fn sphere_normal_is_radial() {
        let s = surf(Shape::Sphere { radius: 1.0 });
        for (u, v) in [(0.1, 0.2), (2.0, 1.5), (5.0, 3.0), (0.0, 0.0)] {
            let p = s.evaluate(u, v).unwrap();
            assert!((s.surface_normal(u, v).unwrap() - p).norm() < 1e-12);
        }
    }

    #[test]
    fn planar_normals_constant() {
        for shape in [Shape::Square { side: 1.0 }, Shape::Circle { radius: 0.5 }] {
            let s = surf(shape);
            assert_eq!(s.surface_normal(0.1, -0.2).unwrap(), Vec3::Z);
        }
        assert_eq!(surf(Shape::Triangle { side: 1.0 }).surface_normal(0.2, 0.3).unwrap(), Vec3::Z);
    }

    #[test]
    fn cone_apex_is_singular() {
        let c = surf(Shape::Cone { radius: 0.25, height: 0.35 });
        assert!(matches!(c.surface_normal(0.0, 1.0), Err(Error::Singularity { .. })));
        assert!(c.principal_curvatures(0.0, 1.0).is_err());
    }

    #[test]
    fn curvature_examples() {
        let (a, b) = surf(Shape::Sphere { radius: 2.0 }).principal_curvatures(1.0, 1.0).unwrap();
        assert_eq!((a, b), (0.5, 0.5));

        let (a, b) = surf(Shape::Torus { major: 2.0, minor: 0.5 }).principal_curvatures(0.0, 0.0).unwrap();
        assert!((a - 0.4).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);

        let cone = surf(Shape::Cone { radius: 0.25, height: 0.35 });
        let (a, b) = cone.principal_curvatures(1.0, 0.4).unwrap();
        assert!(a.abs() < 1e-12 && b > 0.0);

        let (a, b) = surf(Shape::Saddle { a: 1.0, b: 1.0, half_extent: 1.0 }).principal_curvatures(0.0, 0.0).unwrap();
        assert!((a + 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_curvature_examples() {
        let cyl = surf(Shape::Cylinder { radius: 0.2, height: 0.4 });
        assert!(cyl.normal_curvature(1.0, 0.1, Vec3::Z).unwrap().abs() < 1e-15);
        let (su, _) = cyl.partials(1.0, 0.1).unwrap();
        assert!((cyl.normal_curvature(1.0, 0.1, su).unwrap() - 5.0).abs() < 1e-12);

        let sph = surf(Shape::Sphere { radius: 0.5 });
        let (su, sv) = sph.partials(0.4, 1.1).unwrap();
        assert!((sph.normal_curvature(0.4, 1.1, su + sv).unwrap() - 2.0).abs() < 1e-12);

        let cone = surf(Shape::Cone { radius: 0.25, height: 0.35 });
        let (_, generator) = cone.partials(2.0, 0.3).unwrap();
        assert!(cone.normal_curvature(2.0, 0.3, generator).unwrap().abs() < 1e-12);

        assert!(matches!(sph.normal_curvature(0.4, 1.1, sph.surface_normal(0.4, 1.1).unwrap()), Err(Error::Contract(_))));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_curvature(0.0, 0.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Planar);
        assert_eq!(classify_curvature(0.0, 2.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Parabolic);
        assert_eq!(classify_curvature(-1.0, 2.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Hyperbolic);
        assert_eq!(classify_curvature(2.0, 2.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::SphericalUmbilic);
        assert_eq!(classify_curvature(1.0, 2.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Elliptic);
        assert_eq!(classify_curvature(-2.0, -1.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Elliptic);
        assert_eq!(classify_curvature(-2.0, 0.0, TOL_PLANAR, TOL_UMBILIC), CurvatureClass::Parabolic);
    }

    #[test]
    fn placement_moves_points_and_normals() {
        let placement = Placement {
            rotation: UnitQuat::from_axis_angle(Vec3::X, -FRAC_PI_2),
            translation: Vec3::new(0.0, 1.0, 0.5),
        };
        let s = ReferenceSurface::new(Shape::Square { side: 1.0 }, placement).unwrap();
        assert!((s.surface_normal(0.0, 0.0).unwrap() - Vec3::Y).norm() < 1e-12);
        assert!((s.evaluate(0.0, 0.0).unwrap() - Vec3::new(0.0, 1.0, 0.5)).norm() < 1e-12);
    }
}
