//! Named surfaces with default dimensions and `key=value` overrides.
//!
//! Defaults fit a seated 3 m × 3 m workspace. Recognized keys per shape:
//!
//! | shape | keys |
//! |---|---|
//! | square, triangle | `side` |
//! | circle, sphere, hemisphere | `radius` |
//! | cone, cylinder | `radius`, `height` |
//! | ellipsoid | `a`, `b`, `c` |
//! | torus | `major` (`R`), `minor` (`r`) |
//! | saddle | `a`, `b`, `half_extent` |
//!
//! Every shape also accepts placement keys `tx, ty, tz` (meters) and
//! `rx, ry, rz` (rotation vector, radians).

use std::collections::BTreeMap;

use super::{Placement, ReferenceSurface, Shape, SurfaceKind};
use crate::error::{Error, Result};
use crate::geometry::{UnitQuat, Vec3};

impl SurfaceKind {
    /// Registry default dimensions.
    pub fn default_shape(self) -> Shape {
        match self {
            SurfaceKind::Square => Shape::Square { side: 0.5 },
            SurfaceKind::Triangle => Shape::Triangle { side: 0.5 },
            SurfaceKind::Circle => Shape::Circle { radius: 0.25 },
            SurfaceKind::Cone => Shape::Cone { radius: 0.25, height: 0.35 },
            SurfaceKind::Cylinder => Shape::Cylinder { radius: 0.2, height: 0.4 },
            SurfaceKind::Hemisphere => Shape::Hemisphere { radius: 0.3 },
            SurfaceKind::Sphere => Shape::Sphere { radius: 0.5 },
            SurfaceKind::Ellipsoid => Shape::Ellipsoid { a: 0.4, b: 0.3, c: 0.25 },
            SurfaceKind::Torus => Shape::Torus { major: 0.35, minor: 0.15 },
            SurfaceKind::Saddle => Shape::Saddle { a: 1.0, b: 1.0, half_extent: 0.3 },
        }
    }

    pub fn default_surface(self) -> ReferenceSurface {
        ReferenceSurface { shape: self.default_shape(), placement: Placement::default() }
    }
}

/// A surface name plus parameter overrides, as read from flags or a config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfaceConfig {
    pub name: Option<String>,
    pub params: BTreeMap<String, f64>,
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<ReferenceSurface> {
        let name = self.name.as_deref().ok_or_else(|| Error::Usage("no surface given".into()))?;
        ReferenceSurface::from_name(name, &self.params)
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str, source_name: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(source_name, i + 1, format!("expected key=value, got `{line}`")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl ReferenceSurface {
    /// Builds a registry surface with parameter overrides. Unknown keys are
    /// rejected so typos do not silently fall back to defaults.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let kind: SurfaceKind = name.parse()?;
        let mut shape = kind.default_shape();
        let mut t = Vec3::ZERO;
        let mut r = Vec3::ZERO;
        for (key, &value) in params {
            let slot: &mut f64 = match (key.as_str(), &mut shape) {
                ("tx", _) => &mut t.x,
                ("ty", _) => &mut t.y,
                ("tz", _) => &mut t.z,
                ("rx", _) => &mut r.x,
                ("ry", _) => &mut r.y,
                ("rz", _) => &mut r.z,
                ("side", Shape::Square { side } | Shape::Triangle { side }) => side,
                ("radius", Shape::Circle { radius } | Shape::Sphere { radius } | Shape::Hemisphere { radius }) => radius,
                ("radius", Shape::Cone { radius, .. } | Shape::Cylinder { radius, .. }) => radius,
                ("height", Shape::Cone { height, .. } | Shape::Cylinder { height, .. }) => height,
                ("a", Shape::Ellipsoid { a, .. } | Shape::Saddle { a, .. }) => a,
                ("b", Shape::Ellipsoid { b, .. } | Shape::Saddle { b, .. }) => b,
                ("c", Shape::Ellipsoid { c, .. }) => c,
                ("major" | "R", Shape::Torus { major, .. }) => major,
                ("minor" | "r", Shape::Torus { minor, .. }) => minor,
                ("half_extent", Shape::Saddle { half_extent, .. }) => half_extent,
                _ => return Err(Error::Usage(format!("unknown parameter `{key}` for surface {kind}"))),
            };
            *slot = value;
        }
        let placement = Placement { rotation: UnitQuat::from_rotation_vector(r), translation: t };
        ReferenceSurface::new(shape, placement)
    }
}
