//! Synthetic coverage strokes and brush-constrained controller orientations.
//!
//! The orientation chain is a minimal-rotation lower bound for each brush,
//! not a model of how people actually hold a controller.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::brush::BrushKind;
use crate::error::{Error, Result};
use crate::geometry::{Pose, UnitQuat, Vec3};
use crate::metrics::{step_cost, EffortWeights};
use crate::surface::{ReferenceSurface, Shape};

pub const DEFAULT_OVERLAP: f64 = 0.2;
pub const DEFAULT_SPEED: f64 = 0.5;
pub const DEFAULT_SAMPLES_PER_STROKE: usize = 200;
/// Idle time between strokes, in seconds.
pub const STROKE_GAP: f64 = 0.5;
const DENSE: usize = 1024;
const COARSE_SCAN: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokePlan {
    pub surface_id: String,
    pub surface: ReferenceSurface,
    pub brush: BrushKind,
    pub width: f64,
    /// Distance between neighbouring stroke centre lines.
    pub spacing: f64,
    pub overlap: f64,
    pub samples_per_stroke: usize,
    /// Densely sampled parameter polylines, one per stroke.
    pub uv_paths: Vec<Vec<(f64, f64)>>,
}

impl StrokePlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) {
            return Err(Error::contract(format!("spacing must be positive, got {}", self.spacing)));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::contract(format!("overlap must be in [0, 1), got {}", self.overlap)));
        }
        if self.samples_per_stroke < 2 {
            return Err(Error::contract("a stroke needs at least 2 samples"));
        }
        let d = self.surface.domain();
        for (i, path) in self.uv_paths.iter().enumerate() {
            if path.len() < 2 {
                return Err(Error::contract(format!("path {i} has fewer than 2 points")));
            }
            if let Some(&(u, v)) = path.iter().find(|&&(u, v)| !d.contains(u, v)) {
                return Err(Error::contract(format!("path {i} leaves the domain at ({u}, {v})")));
            }
        }
        Ok(())
    }
}

/// Which parameter is held fixed along each stroke.
#[derive(Debug, Clone, Copy)]
enum Fixed {
    U,
    V,
}

struct Topology {
    fixed: Fixed,
    range: (f64, f64),
    periodic: bool,
    /// Curve across the strokes, used to space them by arc length.
    probe: Box<dyn Fn(f64) -> (f64, f64)>,
    /// Free-parameter interval of the stroke at a given fixed value.
    span: Box<dyn Fn(f64) -> (f64, f64)>,
}

fn topology(surface: &ReferenceSurface) -> Topology {
    let d = surface.domain();
    let (u_mid, v_mid) = ((d.u.0 + d.u.1) / 2.0, (d.v.0 + d.v.1) / 2.0);
    let (du, dv) = (d.u, d.v);
    let iso_v = |probe_u: f64| Topology {
        fixed: Fixed::V,
        range: dv,
        periodic: false,
        probe: Box::new(move |v| (probe_u, v)),
        span: Box::new(move |_| du),
    };
    match surface.shape {
        Shape::Square { .. } | Shape::Saddle { .. } => iso_v(u_mid),
        Shape::Circle { radius } => Topology {
            span: Box::new(move |v| {
                let c = (radius * radius - v * v).max(0.0).sqrt();
                (-c, c)
            }),
            ..iso_v(0.0)
        },
        // Lines parallel to one edge, spaced along the perpendicular median.
        Shape::Triangle { .. } => Topology {
            fixed: Fixed::V,
            range: (0.0, 1.0),
            periodic: false,
            probe: Box::new(|t| (0.5 - t / 2.0, t)),
            span: Box::new(|v| (0.0, 1.0 - v)),
        },
        // Parallels: each ruling then lies along a straight generator.
        Shape::Cone { .. } => Topology {
            fixed: Fixed::V,
            range: dv,
            periodic: false,
            probe: Box::new(|v| (0.0, v)),
            span: Box::new(|_| (0.0, TAU)),
        },
        // Meridians, generators and small circles; the probe runs along the
        // widest parallel so the spacing bound holds everywhere.
        Shape::Sphere { .. } | Shape::Hemisphere { .. } | Shape::Ellipsoid { .. } => Topology {
            fixed: Fixed::U,
            range: du,
            periodic: true,
            probe: Box::new(|u| (u, PI / 2.0)),
            span: Box::new(move |_| dv),
        },
        Shape::Cylinder { .. } => Topology {
            fixed: Fixed::U,
            range: du,
            periodic: true,
            probe: Box::new(move |u| (u, v_mid)),
            span: Box::new(move |_| dv),
        },
        Shape::Torus { .. } => Topology {
            fixed: Fixed::U,
            range: du,
            periodic: true,
            probe: Box::new(|u| (u, 0.0)),
            span: Box::new(|_| (0.0, TAU)),
        },
    }
}

/// Cumulative 3D arc length of a parameter curve sampled at `DENSE` points.
fn arc_table(surface: &ReferenceSurface, curve: impl Fn(f64) -> (f64, f64), (a, b): (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let mut ts = Vec::with_capacity(DENSE + 1);
    let mut ss = Vec::with_capacity(DENSE + 1);
    let mut prev: Option<Vec3> = None;
    let mut s = 0.0;
    for i in 0..=DENSE {
        let t = a + (b - a) * i as f64 / DENSE as f64;
        let (u, v) = curve(t);
        let p = surface.placement.to_world(surface.local_jet(u, v).p);
        if let Some(q) = prev {
            s += p.distance(q);
        }
        prev = Some(p);
        ts.push(t);
        ss.push(s);
    }
    (ts, ss)
}

fn invert_arc(ts: &[f64], ss: &[f64], s: f64) -> f64 {
    let i = ss.partition_point(|&x| x < s).clamp(1, ss.len() - 1);
    let (s0, s1) = (ss[i - 1], ss[i]);
    let f = if s1 > s0 { ((s - s0) / (s1 - s0)).clamp(0.0, 1.0) } else { 0.0 };
    ts[i - 1] + (ts[i] - ts[i - 1]) * f
}

/// Side-by-side iso-parameter strokes whose ribbons of `width` overlap by
/// `overlap` (a fraction of the width).
pub fn coverage_plan(surface: &ReferenceSurface, brush: BrushKind, width: f64, overlap: f64) -> Result<StrokePlan> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::contract(format!("width must be positive, got {width}")));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::contract(format!("overlap must be in [0, 1), got {overlap}")));
    }
    let topo = topology(surface);
    let stride = width * (1.0 - overlap);
    let (ts, ss) = arc_table(surface, &topo.probe, topo.range);
    let length = *ss.last().unwrap_or(&0.0);

    let (positions, spacing): (Vec<f64>, f64) = if topo.periodic {
        let n = ((length / stride) - 1e-9).ceil().max(1.0) as usize;
        let gap = length / n as f64;
        ((0..n).map(|k| k as f64 * gap).collect(), gap)
    } else if length <= width {
        (vec![length / 2.0], width)
    } else {
        let n = (((length - width) / stride) - 1e-9).ceil().max(1.0) as usize + 1;
        let gap = (length - width) / (n - 1) as f64;
        ((0..n).map(|k| width / 2.0 + k as f64 * gap).collect(), gap)
    };

    let uv_paths = positions
        .iter()
        .map(|&s| {
            let (pu, pv) = (topo.probe)(invert_arc(&ts, &ss, s));
            let fixed = match topo.fixed {
                Fixed::U => pu,
                Fixed::V => pv,
            };
            let (a, b) = (topo.span)(fixed);
            (0..=DENSE)
                .map(|i| {
                    let free = a + (b - a) * i as f64 / DENSE as f64;
                    match topo.fixed {
                        Fixed::U => (fixed, free),
                        Fixed::V => (free, fixed),
                    }
                })
                .collect()
        })
        .collect();

    let plan = StrokePlan {
        surface_id: surface.kind().to_string(),
        surface: *surface,
        brush,
        width,
        spacing,
        overlap,
        samples_per_stroke: DEFAULT_SAMPLES_PER_STROKE,
        uv_paths,
    };
    plan.validate()?;
    Ok(plan)
}

/// Controller orientation meeting the brush constraint at `(u, v)`.
///
/// Normal brush: the up axis equals the surface normal. Strip brush: the side
/// axis equals the surface tangent perpendicular to `path_tangent`. The
/// remaining rotation about that axis minimizes the weighted step cost from
/// `prev`; without `prev` the forward axis is aligned as closely as possible
/// with the path tangent.
pub fn orient_for_brush(
    surface: &ReferenceSurface,
    (u, v): (f64, f64),
    path_tangent: Vec3,
    brush: BrushKind,
    prev: Option<UnitQuat>,
    weights: &EffortWeights,
) -> Result<UnitQuat> {
    let n = surface.surface_normal(u, v)?;
    let t = (path_tangent - n * path_tangent.dot(n)).try_normalize(1e-12).ok_or(Error::Singularity { u, v })?;
    let ruling = n.cross(t).try_normalize(1e-12).ok_or(Error::Singularity { u, v })?;
    let (target, local_axis) = match brush {
        BrushKind::Normal => (n, Vec3::Y),
        BrushKind::Strip => (ruling, Vec3::X),
    };
    let Some(prev) = prev else {
        // Both constraints lead to side = n × t, up = n, forward = t here.
        return Ok(UnitQuat::from_basis(ruling, n, t));
    };
    let current = prev.rotate(local_axis);
    if current.distance(target) <= 1e-12 {
        return Ok(prev);
    }
    let q0 = UnitQuat::rotation_arc(current, target) * prev;
    let at = |phi: f64| (UnitQuat::from_axis_angle(target, phi) * q0).canonical();
    let cost = |phi: f64| step_cost(prev, at(phi), weights);
    let phi = minimize_periodic(cost);
    Ok(at(phi))
}

/// Minimizer over `[-π, π)`: coarse scan, then golden-section refinement
/// around each scanned local minimum.
fn minimize_periodic(f: impl Fn(f64) -> f64) -> f64 {
    let h = TAU / COARSE_SCAN as f64;
    let xs: Vec<f64> = (0..COARSE_SCAN).map(|k| -PI + k as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let (mut best, mut best_val) = (0.0, f64::INFINITY);
    for k in 0..COARSE_SCAN {
        let (l, r) = (fs[(k + COARSE_SCAN - 1) % COARSE_SCAN], fs[(k + 1) % COARSE_SCAN]);
        if fs[k] < best_val {
            best = xs[k];
            best_val = fs[k];
        }
        if fs[k] <= l && fs[k] <= r {
            let g = golden_section(&f, xs[k] - h, xs[k] + h, 1e-12);
            let fg = f(g);
            if fg < best_val {
                best = g;
                best_val = fg;
            }
        }
    }
    best
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// A sample skipped while synthesizing poses.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanDiagnostic {
    pub stroke: usize,
    pub sample: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlannedStrokes {
    pub strokes: Vec<Vec<Pose>>,
    pub diagnostics: Vec<PlanDiagnostic>,
}

impl PlannedStrokes {
    /// One stream with a trigger-released pose between consecutive strokes.
    pub fn flatten(&self) -> Vec<Pose> {
        crate::io::join_strokes(self.strokes.iter().map(Vec::as_slice))
    }
}

/// Pose streams for every stroke of `plan`, resampled uniformly by arc length
/// and timed at `speed` m/s.
pub fn plan_to_poses(plan: &StrokePlan, speed: f64, weights: &EffortWeights) -> Result<PlannedStrokes> {
    plan.validate()?;
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::contract(format!("speed must be positive, got {speed}")));
    }
    let surface = &plan.surface;
    let mut out = PlannedStrokes::default();
    let mut clock = 0.0;
    for (si, path) in plan.uv_paths.iter().enumerate() {
        let pts: Vec<Vec3> =
            path.iter().map(|&(u, v)| surface.placement.to_world(surface.local_jet(u, v).p)).collect();
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + w[0].distance(w[1]));
        }
        let total = *cum.last().unwrap();
        let n = plan.samples_per_stroke;
        let mut poses = Vec::with_capacity(n);
        let mut prev_q: Option<UnitQuat> = None;
        let mut prev_s = 0.0;
        for j in 0..n {
            let s = total * j as f64 / (n - 1) as f64;
            let i = cum.partition_point(|&x| x < s).clamp(1, cum.len() - 1);
            let f = if cum[i] > cum[i - 1] { ((s - cum[i - 1]) / (cum[i] - cum[i - 1])).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (path[i - 1], path[i]);
            let (u, v) = (a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f);
            let sample = surface.jet(u, v).and_then(|jet| {
                let tangent = jet.su * (b.0 - a.0) + jet.sv * (b.1 - a.1);
                orient_for_brush(surface, (u, v), tangent, plan.brush, prev_q, weights).map(|q| (jet.p, q))
            });
            match sample {
                Ok((p, q)) => {
                    clock += (s - prev_s) / speed;
                    prev_s = s;
                    poses.push(Pose::new(clock, p, q, true));
                    prev_q = Some(q);
                }
                Err(e) => out.diagnostics.push(PlanDiagnostic { stroke: si, sample: j, message: e.to_string() }),
            }
        }
        clock += (total - prev_s) / speed + STROKE_GAP;
        out.strokes.push(poses);
    }
    Ok(out)
}
