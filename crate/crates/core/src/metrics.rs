//! Drawing accuracy against a reference surface and wrist-rotation effort.
//!
//! Effort totals are a kinematic proxy. Their absolute values depend on the
//! chosen weights, so only comparisons between brushes under the same weights
//! carry meaning.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brush::{folded_angle, quad_normals_with_diagnostics, RibbonStrip};
use crate::error::{Error, Result};
use crate::geometry::{rotation_vector_between, ControllerFrame, Pose, UnitQuat, Vec3};
use crate::surface::ReferenceSurface;

pub const DEFAULT_COVERAGE_SAMPLES: usize = 10_000;
pub const DEFAULT_COVERAGE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mean_dist: f64,
    pub rms_dist: f64,
    pub max_dist: f64,
    pub mean_normal_dev: f64,
    pub max_normal_dev: f64,
    pub coverage_fraction: f64,
    pub tau: f64,
    /// Number of distance samples (five per quad).
    pub sample_count: usize,
    /// Quads whose normal deviation was measured.
    pub normal_sample_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyOptions {
    pub tau: f64,
    pub coverage_samples: usize,
    pub seed: u64,
}

impl AccuracyOptions {
    pub fn new(tau: f64) -> Self {
        AccuracyOptions { tau, coverage_samples: DEFAULT_COVERAGE_SAMPLES, seed: DEFAULT_COVERAGE_SEED }
    }
}

/// Distances, normal deviation and coverage of `strips` against `surface`.
pub fn accuracy_report(strips: &[RibbonStrip], surface: &ReferenceSurface, tau: f64) -> Result<AccuracyReport> {
    accuracy_report_with(strips, surface, &AccuracyOptions::new(tau))
}

pub fn accuracy_report_with(
    strips: &[RibbonStrip],
    surface: &ReferenceSurface,
    opts: &AccuracyOptions,
) -> Result<AccuracyReport> {
    if strips.is_empty() {
        return Err(Error::contract("accuracy_report needs at least one ribbon"));
    }
    if let Some(i) = strips.iter().position(|s| s.quad_count() == 0) {
        return Err(Error::contract(format!("ribbon {i} has no quads")));
    }
    if !(opts.tau > 0.0) || !opts.tau.is_finite() {
        return Err(Error::contract(format!("coverage threshold must be positive, got {}", opts.tau)));
    }

    let (mut sum, mut sum_sq, mut max, mut count) = (0.0, 0.0, 0.0f64, 0usize);
    let (mut dev_sum, mut dev_max, mut dev_count) = (0.0, 0.0f64, 0usize);
    for strip in strips {
        let normals = quad_normals_with_diagnostics(strip).ok();
        for (i, q) in strip.quads().enumerate() {
            let center = (q[0] + q[1] + q[2] + q[3]) / 4.0;
            for p in [q[0], q[1], q[2], q[3], center] {
                let d = surface.project_to_surface(p).distance;
                sum += d;
                sum_sq += d * d;
                max = max.max(d);
                count += 1;
            }
            let Some(qn) = &normals else { continue };
            if qn.degenerate.contains(&i) {
                continue;
            }
            let proj = surface.project_to_surface(center);
            if let Ok(n) = surface.surface_normal(proj.u, proj.v) {
                let dev = folded_angle(qn.normals[i], n);
                dev_sum += dev;
                dev_max = dev_max.max(dev);
                dev_count += 1;
            }
        }
    }

    let grid = TriangleGrid::new(strips, opts.tau);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples = surface.sample_area_uniform(&mut rng, opts.coverage_samples);
    let covered = samples
        .iter()
        .filter(|&&(u, v)| surface.evaluate(u, v).map(|p| grid.within(p, opts.tau)).unwrap_or(false))
        .count();

    let n = count as f64;
    Ok(AccuracyReport {
        mean_dist: sum / n,
        rms_dist: (sum_sq / n).sqrt(),
        max_dist: max,
        mean_normal_dev: if dev_count > 0 { dev_sum / dev_count as f64 } else { 0.0 },
        max_normal_dev: dev_max,
        coverage_fraction: if samples.is_empty() { 0.0 } else { covered as f64 / samples.len() as f64 },
        tau: opts.tau,
        sample_count: count,
        normal_sample_count: dev_count,
    })
}

/// Uniform hash grid over ribbon triangles for "within τ" queries.
struct TriangleGrid {
    cell: f64,
    tris: Vec<[Vec3; 3]>,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl TriangleGrid {
    fn new(strips: &[RibbonStrip], tau: f64) -> Self {
        let mut tris = Vec::new();
        for s in strips {
            for [l0, r0, r1, l1] in s.quads() {
                tris.push([l0, r0, r1]);
                tris.push([l0, r1, l1]);
            }
        }
        let mean_extent = tris
            .iter()
            .map(|t| {
                let (lo, hi) = aabb(t);
                let e = hi - lo;
                e.x.max(e.y).max(e.z)
            })
            .sum::<f64>()
            / tris.len().max(1) as f64;
        // Cells no smaller than τ keep the 3×3×3 neighbourhood query exact.
        let cell = tau.max(mean_extent);
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, t) in tris.iter().enumerate() {
            let (lo, hi) = aabb(t);
            let (a, b) = (key(lo, cell), key(hi, cell));
            for x in a.0..=b.0 {
                for y in a.1..=b.1 {
                    for z in a.2..=b.2 {
                        cells.entry((x, y, z)).or_default().push(i as u32);
                    }
                }
            }
        }
        TriangleGrid { cell, tris, cells }
    }

    fn within(&self, p: Vec3, tau: f64) -> bool {
        let (cx, cy, cz) = key(p, self.cell);
        for x in cx - 1..=cx + 1 {
            for y in cy - 1..=cy + 1 {
                for z in cz - 1..=cz + 1 {
                    let Some(ids) = self.cells.get(&(x, y, z)) else { continue };
                    if ids.iter().any(|&i| closest_on_triangle(p, &self.tris[i as usize]).distance(p) <= tau) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn aabb(t: &[Vec3; 3]) -> (Vec3, Vec3) {
    let f = |g: fn(f64, f64) -> f64| {
        Vec3::new(g(g(t[0].x, t[1].x), t[2].x), g(g(t[0].y, t[1].y), t[2].y), g(g(t[0].z, t[1].z), t[2].z))
    };
    (f(f64::min), f(f64::max))
}

fn key(p: Vec3, cell: f64) -> (i64, i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64)
}

/// Closest point on a (possibly degenerate) triangle.
fn closest_on_triangle(p: Vec3, [a, b, c]: &[Vec3; 3]) -> Vec3 {
    let (a, b, c) = (*a, *b, *c);
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(ap), ac.dot(ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(bp), ac.dot(bp));
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(cp), ac.dot(cp));
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = va + vb + vc;
    if denom.abs() < 1e-300 {
        // Collinear vertices: fall back to the nearest edge point.
        return [(a, b), (b, c), (a, c)]
            .into_iter()
            .map(|(s, e)| {
                let d = e - s;
                let t = if d.norm_squared() > 0.0 { ((p - s).dot(d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
                s + d * t
            })
            .min_by(|x, y| x.distance(p).total_cmp(&y.distance(p)))
            .unwrap_or(a);
    }
    a + ab * (vb / denom) + ac * (vc / denom)
}

/// Per-axis weights of the wrist cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortWeights {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

impl Default for EffortWeights {
    fn default() -> Self {
        EffortWeights { pitch: 1.0, yaw: 3.0, roll: 1.0 }
    }
}

impl EffortWeights {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Result<Self> {
        let w = EffortWeights { pitch, yaw, roll };
        if [pitch, yaw, roll].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::contract(format!("effort weights must be finite and ≥ 0, got {w}")));
        }
        Ok(w)
    }

    /// Weighted L1 norm of body-frame (pitch, yaw, roll) components.
    pub fn cost(&self, local: Vec3) -> f64 {
        self.pitch * local.x.abs() + self.yaw * local.y.abs() + self.roll * local.z.abs()
    }
}

impl fmt::Display for EffortWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.pitch, self.yaw, self.roll)
    }
}

impl FromStr for EffortWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Usage(format!("bad weights `{s}`: {e}")))?;
        match parts[..] {
            [p, y, r] => EffortWeights::new(p, y, r),
            _ => Err(Error::Usage(format!("weights need three values p,y,r, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortReport {
    pub pitch_total: f64,
    pub yaw_total: f64,
    pub roll_total: f64,
    pub weighted_total: f64,
    pub step_count: usize,
    pub weights: EffortWeights,
}

impl EffortReport {
    pub fn zero(weights: EffortWeights) -> Self {
        EffortReport { pitch_total: 0.0, yaw_total: 0.0, roll_total: 0.0, weighted_total: 0.0, step_count: 0, weights }
    }

    /// Sums two reports taken under the same weights.
    pub fn combine(&self, other: &EffortReport) -> EffortReport {
        let (p, y, r) = (
            self.pitch_total + other.pitch_total,
            self.yaw_total + other.yaw_total,
            self.roll_total + other.roll_total,
        );
        EffortReport {
            pitch_total: p,
            yaw_total: y,
            roll_total: r,
            weighted_total: self.weights.pitch * p + self.weights.yaw * y + self.weights.roll * r,
            step_count: self.step_count + other.step_count,
            weights: self.weights,
        }
    }
}

/// Rotation from `a` to `b` as (pitch, yaw, roll) components in `a`'s frame.
pub fn step_components(a: UnitQuat, b: UnitQuat) -> Vec3 {
    ControllerFrame::from_orientation(a).local_components(rotation_vector_between(a, b))
}

/// Weighted single-step cost, the quantity summed by [`wrist_effort`].
pub fn step_cost(a: UnitQuat, b: UnitQuat, weights: &EffortWeights) -> f64 {
    weights.cost(step_components(a, b))
}

/// Accumulated absolute per-step rotation about the controller's side (pitch),
/// up (yaw) and forward (roll) axes.
pub fn wrist_effort(poses: &[Pose], weights: EffortWeights) -> Result<EffortReport> {
    if poses.len() < 2 {
        return Err(Error::contract(format!("wrist_effort needs at least 2 poses, got {}", poses.len())));
    }
    let weights = EffortWeights::new(weights.pitch, weights.yaw, weights.roll)?;
    let (mut p, mut y, mut r) = (0.0, 0.0, 0.0);
    for w in poses.windows(2) {
        let c = step_components(w[0].orientation, w[1].orientation);
        p += c.x.abs();
        y += c.y.abs();
        r += c.z.abs();
    }
    Ok(EffortReport {
        pitch_total: p,
        yaw_total: y,
        roll_total: r,
        weighted_total: weights.pitch * p + weights.yaw * y + weights.roll * r,
        step_count: poses.len() - 1,
        weights,
    })
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub shape: String,
    pub brush: String,
    pub mean_dist: f64,
    pub rms_dist: f64,
    pub max_dist: f64,
    pub mean_normal_dev: f64,
    pub max_normal_dev: f64,
    pub coverage: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
    pub weighted_total: f64,
    pub stroke_count: usize,
    pub correction_count: usize,
    pub runtime_s: f64,
}

impl MetricsRow {
    pub fn new(
        shape: &str,
        brush: &str,
        accuracy: &AccuracyReport,
        effort: &EffortReport,
        stroke_count: usize,
        correction_count: usize,
        runtime_s: f64,
    ) -> Self {
        MetricsRow {
            shape: shape.to_string(),
            brush: brush.to_string(),
            mean_dist: accuracy.mean_dist,
            rms_dist: accuracy.rms_dist,
            max_dist: accuracy.max_dist,
            mean_normal_dev: accuracy.mean_normal_dev,
            max_normal_dev: accuracy.max_normal_dev,
            coverage: accuracy.coverage_fraction,
            pitch: effort.pitch_total,
            yaw: effort.yaw_total,
            roll: effort.roll_total,
            weighted_total: effort.weighted_total,
            stroke_count,
            correction_count,
            runtime_s,
        }
    }
}

pub fn write_metrics_csv<W: std::io::Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::contract(format!("csv write: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv(text: &str, source_name: &str) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: MetricsRow = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source_name, line, e.to_string())
        })?;
        rows.push(row);
    }
    Ok(rows)
}
