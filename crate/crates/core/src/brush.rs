//! Ribbon brush kernels.
//!
//! Both kernels sweep a ruling segment along the controller path and connect
//! consecutive ruling endpoints into a quad strip. They differ only in how the
//! ruling direction is chosen:
//!
//! * [`BrushKind::Normal`] derives it from the controller's up axis and the
//!   motion since the previous sample, `normalize(up × (p_cur − p_prev))`, so
//!   rulings are always orthogonal to the path.
//! * [`BrushKind::Strip`] uses the controller's side axis directly, centered
//!   at the tip; rulings may make any angle with the path.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};

/// Default resampling distance between accepted samples, meters.
pub const DEFAULT_EPSILON: f64 = 0.005;
/// Default ribbon width, meters.
pub const DEFAULT_WIDTH: f64 = 0.03;

const CROSS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrushKind {
    Normal,
    Strip,
}

impl BrushKind {
    pub const ALL: [BrushKind; 2] = [BrushKind::Normal, BrushKind::Strip];

    pub fn as_str(self) -> &'static str {
        match self {
            BrushKind::Normal => "normal",
            BrushKind::Strip => "strip",
        }
    }
}

impl fmt::Display for BrushKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BrushKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(BrushKind::Normal),
            "strip" => Ok(BrushKind::Strip),
            other => Err(Error::Usage(format!("unknown brush `{other}` (expected normal|strip)"))),
        }
    }
}

/// One ruling segment of a ribbon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ruling {
    pub left: Vec3,
    pub right: Vec3,
    pub center: Vec3,
    /// Index of the pose (in the stroke's pose stream) that produced this ruling.
    pub source_pose_index: usize,
}

impl Ruling {
    fn centered(center: Vec3, direction: Vec3, width: f64, source_pose_index: usize) -> Self {
        let half = direction * (0.5 * width);
        Ruling { left: center - half, right: center + half, center, source_pose_index }
    }

    /// Unit vector from `left` to `right`.
    pub fn direction(&self) -> Vec3 {
        (self.right - self.left).normalize()
    }

    pub fn length(&self) -> f64 {
        self.left.distance(self.right)
    }
}

/// A stroke's ribbon: ordered rulings; quad `i` spans rulings `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonStrip {
    pub rulings: Vec<Ruling>,
    pub width: f64,
    pub brush_kind: BrushKind,
}

impl RibbonStrip {
    pub fn empty(brush_kind: BrushKind, width: f64) -> Self {
        RibbonStrip { rulings: Vec::new(), width, brush_kind }
    }

    pub fn is_empty(&self) -> bool {
        self.rulings.is_empty()
    }

    pub fn quad_count(&self) -> usize {
        self.rulings.len().saturating_sub(1)
    }

    /// Corners of quad `i` as `[left_i, right_i, right_{i+1}, left_{i+1}]`.
    pub fn quad(&self, i: usize) -> [Vec3; 4] {
        let (a, b) = (&self.rulings[i], &self.rulings[i + 1]);
        [a.left, a.right, b.right, b.left]
    }

    pub fn quads(&self) -> impl Iterator<Item = [Vec3; 4]> + '_ {
        (0..self.quad_count()).map(move |i| self.quad(i))
    }

    /// Bit-exact little-endian serialization of the geometry, used for digests.
    pub fn write_canonical_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(self.brush_kind.as_str().as_bytes());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&(self.rulings.len() as u64).to_le_bytes());
        for r in &self.rulings {
            for v in [r.left, r.right, r.center] {
                for c in v.to_array() {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
            out.extend_from_slice(&(r.source_pose_index as u64).to_le_bytes());
        }
    }
}

/// Why a sample was dropped while building a ribbon.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    InvalidPose(String),
    DegenerateMotion,
    ZeroCrossProduct,
    DegenerateQuad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub pose_index: usize,
    pub kind: DiagnosticKind,
}

fn check_width(width: f64) -> Result<()> {
    if width > 0.0 && width.is_finite() {
        Ok(())
    } else {
        Err(Error::contract(format!("ribbon width must be positive, got {width}")))
    }
}

fn normal_direction(n_c: Vec3, motion: Vec3) -> Result<Vec3> {
    let m = motion.try_normalize(0.0).ok_or(Error::DegenerateMotion)?;
    n_c.cross(m).try_normalize(CROSS_TOLERANCE).ok_or(Error::ZeroCrossProduct)
}

/// Normal-brush ruling at `p_cur`: direction `normalize(n_c × (p_cur − p_prev))`,
/// endpoints `p_cur ± (width/2)·direction`.
///
/// The cross product is taken with the unit motion direction, so the
/// zero-cross test is `sin(angle(n_c, motion)) < 1e-9`.
pub fn normal_brush_ruling(n_c: Vec3, p_prev: Vec3, p_cur: Vec3, width: f64) -> Result<Ruling> {
    check_width(width)?;
    let dir = normal_direction(n_c, p_cur - p_prev)?;
    Ok(Ruling::centered(p_cur, dir, width, 0))
}

/// Strip-brush ruling: endpoints `tip ± (width/2)·side`.
pub fn strip_brush_ruling(pose: &Pose, width: f64) -> Result<Ruling> {
    check_width(width)?;
    pose.validate()?;
    Ok(Ruling::centered(pose.position, pose.frame().side, width, 0))
}

/// Whether a candidate sample is far enough from the last accepted one.
/// The first sample of a stroke (`last == None`) is always accepted.
pub fn resample_gate(last: Option<Vec3>, candidate: Vec3, epsilon: f64) -> bool {
    match last {
        None => true,
        Some(p) => p.distance(candidate) >= epsilon,
    }
}

fn quad_is_degenerate(a: &Ruling, b: &Ruling, width: f64) -> bool {
    let tol = 1e-12 * width * width;
    let t1 = (a.right - a.left).cross(b.right - a.left).norm();
    let t2 = (b.right - a.left).cross(b.left - a.left).norm();
    t1 <= tol && t2 <= tol
}

/// What a single [`RibbonBuilder::push`] appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Appended {
    /// Index of the first new ruling in the strip.
    pub first_ruling: usize,
    pub rulings: Vec<Ruling>,
    pub new_quads: usize,
}

/// Incremental ribbon construction, one pose at a time.
///
/// [`build_ribbon`] is a fold of this builder over a pose slice; the live
/// service drives the same builder so that offline and online ribbons agree.
#[derive(Debug, Clone)]
pub struct RibbonBuilder {
    brush: BrushKind,
    width: f64,
    epsilon: f64,
    rulings: Vec<Ruling>,
    last_accepted: Option<Vec3>,
    // Normal brush: first accepted sample, waiting for motion.
    pending: Option<(usize, Pose)>,
    accepted: usize,
    diagnostics: Vec<Diagnostic>,
}

impl RibbonBuilder {
    pub fn new(brush: BrushKind, width: f64, epsilon: f64) -> Result<Self> {
        check_width(width)?;
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::contract(format!("epsilon must be non-negative, got {epsilon}")));
        }
        Ok(RibbonBuilder {
            brush,
            width,
            epsilon,
            rulings: Vec::new(),
            last_accepted: None,
            pending: None,
            accepted: 0,
            diagnostics: Vec::new(),
        })
    }

    pub fn brush(&self) -> BrushKind {
        self.brush
    }

    pub fn rulings(&self) -> &[Ruling] {
        &self.rulings
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Number of samples that passed the gate and produced geometry (or, for
    /// the first normal-brush sample, are waiting for motion).
    pub fn accepted(&self) -> usize {
        self.accepted
    }

    fn diag(&mut self, pose_index: usize, kind: DiagnosticKind) {
        self.diagnostics.push(Diagnostic { pose_index, kind });
    }

    /// Feeds one pose. Returns the geometry appended, or `None` if the sample
    /// was ignored (trigger released), gated, or skipped with a diagnostic.
    pub fn push(&mut self, index: usize, pose: &Pose) -> Option<Appended> {
        if !pose.trigger {
            return None;
        }
        if let Err(e) = pose.validate() {
            self.diag(index, DiagnosticKind::InvalidPose(e.to_string()));
            return None;
        }
        if !resample_gate(self.last_accepted, pose.position, self.epsilon) {
            return None;
        }
        match self.brush {
            BrushKind::Strip => self.push_strip(index, pose),
            BrushKind::Normal => self.push_normal(index, pose),
        }
    }

    fn push_strip(&mut self, index: usize, pose: &Pose) -> Option<Appended> {
        let ruling = Ruling::centered(pose.position, pose.frame().side, self.width, index);
        if let Some(prev) = self.rulings.last() {
            if quad_is_degenerate(prev, &ruling, self.width) {
                self.diag(index, DiagnosticKind::DegenerateQuad);
                return None;
            }
        }
        Some(self.commit(pose.position, vec![ruling]))
    }

    fn push_normal(&mut self, index: usize, pose: &Pose) -> Option<Appended> {
        let up = pose.frame().up;
        let Some(prev_pos) = self.last_accepted else {
            self.pending = Some((index, *pose));
            self.last_accepted = Some(pose.position);
            self.accepted += 1;
            return None;
        };
        let motion = pose.position - prev_pos;
        let mut new = Vec::with_capacity(2);
        if let Some((first_index, first)) = self.pending {
            // The first sample gets its ruling from the first motion vector.
            match normal_direction(first.frame().up, motion) {
                Ok(dir) => new.push(Ruling::centered(first.position, dir, self.width, first_index)),
                Err(e) => {
                    self.diag(first_index, kind_of(&e));
                    self.pending = Some((index, *pose));
                    self.last_accepted = Some(pose.position);
                    return None;
                }
            }
        }
        match normal_direction(up, motion) {
            Ok(dir) => new.push(Ruling::centered(pose.position, dir, self.width, index)),
            Err(e) => {
                self.diag(index, kind_of(&e));
                return None;
            }
        }
        let prev = if new.len() == 2 { Some(&new[0]) } else { self.rulings.last() };
        if let Some(prev) = prev {
            if quad_is_degenerate(prev, new.last().unwrap(), self.width) {
                self.diag(index, DiagnosticKind::DegenerateQuad);
                return None;
            }
        }
        self.pending = None;
        Some(self.commit(pose.position, new))
    }

    fn commit(&mut self, position: Vec3, new: Vec<Ruling>) -> Appended {
        let first_ruling = self.rulings.len();
        let before = self.rulings.len().saturating_sub(1);
        self.rulings.extend_from_slice(&new);
        self.last_accepted = Some(position);
        self.accepted += 1;
        Appended {
            first_ruling,
            new_quads: self.rulings.len().saturating_sub(1) - before,
            rulings: new,
        }
    }

    /// Current state as a strip; fewer than two rulings give an empty ribbon.
    pub fn strip(&self) -> RibbonStrip {
        if self.rulings.len() < 2 {
            return RibbonStrip::empty(self.brush, self.width);
        }
        RibbonStrip { rulings: self.rulings.clone(), width: self.width, brush_kind: self.brush }
    }

    pub fn finish(self) -> (RibbonStrip, Vec<Diagnostic>) {
        let strip = self.strip();
        (strip, self.diagnostics)
    }
}

fn kind_of(e: &Error) -> DiagnosticKind {
    match e {
        Error::DegenerateMotion => DiagnosticKind::DegenerateMotion,
        _ => DiagnosticKind::ZeroCrossProduct,
    }
}

/// Builds a ribbon from a pose stream, also returning the skipped-sample diagnostics.
pub fn build_ribbon_with_diagnostics(
    poses: &[Pose],
    brush: BrushKind,
    width: f64,
    epsilon: f64,
) -> Result<(RibbonStrip, Vec<Diagnostic>)> {
    let mut b = RibbonBuilder::new(brush, width, epsilon)?;
    for (i, p) in poses.iter().enumerate() {
        b.push(i, p);
    }
    Ok(b.finish())
}

/// Builds a ribbon from a pose stream. Samples with the trigger released are ignored.
pub fn build_ribbon(poses: &[Pose], brush: BrushKind, width: f64, epsilon: f64) -> Result<RibbonStrip> {
    build_ribbon_with_diagnostics(poses, brush, width, epsilon).map(|(s, _)| s)
}

/// Unnormalized quad normal: the sum of the two triangle normals
/// `(L0, R0, R1)` and `(L0, R1, L1)`, equal to the cross product of the diagonals.
pub fn raw_quad_normal(q: &[Vec3; 4]) -> Vec3 {
    let [l0, r0, r1, l1] = *q;
    (r0 - l0).cross(r1 - l0) + (r1 - l0).cross(l1 - l0)
}

/// Per-quad unit normals plus the flip applied to each (`true` when the
/// normal was negated for consistency) and indices of degenerate quads.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNormals {
    pub normals: Vec<Vec3>,
    pub flipped: Vec<bool>,
    pub degenerate: Vec<usize>,
}

pub fn quad_normals_with_diagnostics(strip: &RibbonStrip) -> Result<QuadNormals> {
    let n = strip.quad_count();
    if n == 0 {
        return Err(Error::contract("quad_normals needs at least one quad"));
    }
    let tol = 1e-12 * strip.width * strip.width;
    let raw: Vec<Option<Vec3>> = strip.quads().map(|q| raw_quad_normal(&q).try_normalize(tol)).collect();
    let Some(first) = raw.iter().position(Option::is_some) else {
        return Err(Error::contract("every quad of the strip is degenerate"));
    };
    let mut normals = Vec::with_capacity(n);
    let mut flipped = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    let mut prev = raw[first].unwrap();
    for (i, r) in raw.iter().enumerate() {
        match r {
            Some(v) => {
                let flip = i > first && v.dot(prev) < 0.0;
                let v = if flip { -*v } else { *v };
                normals.push(v);
                flipped.push(flip);
                prev = v;
            }
            None => {
                degenerate.push(i);
                normals.push(prev);
                flipped.push(false);
            }
        }
    }
    Ok(QuadNormals { normals, flipped, degenerate })
}

/// Per-quad unit normals, sign-consistent along the strip.
pub fn quad_normals(strip: &RibbonStrip) -> Result<Vec<Vec3>> {
    quad_normals_with_diagnostics(strip).map(|q| q.normals)
}

/// Angle between a unit normal and a unit reference, folded into `[0, π/2]`.
pub fn folded_angle(a: Vec3, b: Vec3) -> f64 {
    a.dot(b).abs().min(1.0).acos()
}

/// Controller up axes of the poses that generated each quad (the pose of the
/// quad's second ruling).
pub fn controller_normals(strip: &RibbonStrip, poses: &[Pose]) -> Vec<Vec3> {
    strip.rulings.iter().skip(1).map(|r| poses[r.source_pose_index].frame().up).collect()
}

/// Per-quad angle between the ribbon normal and the controller's intended normal.
pub fn normal_divergence(strip: &RibbonStrip, controller_normals: &[Vec3]) -> Result<Vec<f64>> {
    if controller_normals.len() != strip.quad_count() {
        return Err(Error::contract(format!(
            "{} controller normals for {} quads",
            controller_normals.len(),
            strip.quad_count()
        )));
    }
    if strip.quad_count() == 0 {
        return Ok(Vec::new());
    }
    let normals = quad_normals(strip)?;
    Ok(normals.iter().zip(controller_normals).map(|(n, c)| folded_angle(*n, c.normalize())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitQuat;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn at(t: f64, p: Vec3, q: UnitQuat) -> Pose {
        Pose::new(t, p, q, true)
    }

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn normal_ruling_axis_aligned() {
        let r = normal_brush_ruling(Vec3::Z, Vec3::ZERO, Vec3::X, 2.0).unwrap();
        assert!(close(r.direction(), Vec3::Y));
        assert!(close(r.left, Vec3::new(1.0, -1.0, 0.0)));
        assert!(close(r.right, Vec3::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn normal_ruling_tilted_normal() {
        // (0, s, s) × (1, 0, 0) = (0, s, -s) by expanding the determinant.
        let n = Vec3::new(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let r = normal_brush_ruling(n, Vec3::ZERO, Vec3::X, 2.0).unwrap();
        assert!(close(r.direction(), Vec3::new(0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)));
    }

    #[test]
    fn normal_ruling_errors() {
        assert!(matches!(normal_brush_ruling(Vec3::X, Vec3::ZERO, Vec3::X, 1.0), Err(Error::ZeroCrossProduct)));
        assert!(matches!(normal_brush_ruling(Vec3::Y, Vec3::X, Vec3::X, 1.0), Err(Error::DegenerateMotion)));
        assert!(normal_brush_ruling(Vec3::Y, Vec3::ZERO, Vec3::X, 0.0).is_err());
    }

    #[test]
    fn strip_ruling_cases() {
        let r = strip_brush_ruling(&at(0.0, Vec3::ZERO, UnitQuat::IDENTITY), 2.0).unwrap();
        assert!(close(r.left, -Vec3::X) && close(r.right, Vec3::X));

        let roll = UnitQuat::from_axis_angle(Vec3::Z, FRAC_PI_2);
        let r = strip_brush_ruling(&at(0.0, Vec3::ZERO, roll), 2.0).unwrap();
        assert!(close(r.left, -Vec3::Y) && close(r.right, Vec3::Y));

        let q = UnitQuat::new(0.5, 0.5, 0.5, 0.5).unwrap();
        let tip = Vec3::new(0.1, 0.2, 0.3);
        let r = strip_brush_ruling(&at(0.0, tip, q), 1.0).unwrap();
        // Rotated +X for this quaternion is (0, 1, 0).
        assert!(close(r.left, tip - Vec3::Y * 0.5) && close(r.right, tip + Vec3::Y * 0.5));
    }

    #[test]
    fn gate() {
        let o = Vec3::ZERO;
        assert!(!resample_gate(Some(o), Vec3::new(0.004, 0.0, 0.0), 0.005));
        assert!(resample_gate(Some(o), Vec3::new(0.005, 0.0, 0.0), 0.005));
        assert!(resample_gate(None, o, 0.005));
        assert!(resample_gate(Some(o), o, 0.0));
    }

    #[test]
    fn collinear_strip_is_planar() {
        let poses: Vec<_> = (0..3).map(|i| at(i as f64, Vec3::new(0.0, 0.0, i as f64 * 0.1), UnitQuat::IDENTITY)).collect();
        let s = build_ribbon(&poses, BrushKind::Strip, 0.03, 0.0).unwrap();
        assert_eq!(s.rulings.len(), 3);
        assert_eq!(s.quad_count(), 2);
        for q in s.quads() {
            for v in q {
                assert_eq!(v.y, 0.0);
            }
        }
    }

    #[test]
    fn gate_collapses_short_stroke() {
        let poses = [at(0.0, Vec3::ZERO, UnitQuat::IDENTITY), at(1.0, Vec3::new(0.001, 0.0, 0.0), UnitQuat::IDENTITY)];
        for brush in BrushKind::ALL {
            let s = build_ribbon(&poses, brush, 0.03, 0.005).unwrap();
            assert!(s.is_empty());
        }
    }

    #[test]
    fn normal_brush_first_motion_gives_two_rulings() {
        let poses = [at(0.0, Vec3::ZERO, UnitQuat::IDENTITY), at(1.0, Vec3::new(0.0, 0.0, 0.1), UnitQuat::IDENTITY)];
        let mut b = RibbonBuilder::new(BrushKind::Normal, 0.03, 0.0).unwrap();
        assert!(b.push(0, &poses[0]).is_none());
        let a = b.push(1, &poses[1]).unwrap();
        assert_eq!(a.rulings.len(), 2);
        assert_eq!(a.new_quads, 1);
        assert_eq!(a.rulings[0].source_pose_index, 0);
        assert_eq!(a.rulings[0].center, Vec3::ZERO);
    }

    #[test]
    fn released_trigger_is_ignored() {
        let mut p = at(0.0, Vec3::ZERO, UnitQuat::IDENTITY);
        p.trigger = false;
        let mut b = RibbonBuilder::new(BrushKind::Strip, 0.03, 0.0).unwrap();
        assert!(b.push(0, &p).is_none());
        assert_eq!(b.accepted(), 0);
    }

    #[test]
    fn strip_motion_along_side_axis_is_skipped() {
        let poses: Vec<_> = (0..3).map(|i| at(i as f64, Vec3::new(i as f64 * 0.01, 0.0, 0.0), UnitQuat::IDENTITY)).collect();
        let (s, diags) = build_ribbon_with_diagnostics(&poses, BrushKind::Strip, 0.03, 0.0).unwrap();
        assert!(s.is_empty());
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.kind == DiagnosticKind::DegenerateQuad));
    }

    #[test]
    fn normal_brush_skips_parallel_normal() {
        // Up axis points along the motion for the middle sample.
        let pitch = UnitQuat::from_axis_angle(Vec3::X, FRAC_PI_2);
        let poses = [
            at(0.0, Vec3::ZERO, UnitQuat::IDENTITY),
            at(1.0, Vec3::new(0.0, 0.0, 0.1), UnitQuat::IDENTITY),
            at(2.0, Vec3::new(0.0, 0.0, 0.2), pitch),
            at(3.0, Vec3::new(0.0, 0.0, 0.3), UnitQuat::IDENTITY),
        ];
        let (s, diags) = build_ribbon_with_diagnostics(&poses, BrushKind::Normal, 0.03, 0.0).unwrap();
        assert_eq!(s.rulings.len(), 3);
        assert_eq!(diags, vec![Diagnostic { pose_index: 2, kind: DiagnosticKind::ZeroCrossProduct }]);
    }

    #[test]
    fn planar_strip_normals() {
        let poses: Vec<_> = (0..5).map(|i| at(i as f64, Vec3::new(0.0, i as f64 * 0.1, 0.0), UnitQuat::from_axis_angle(Vec3::X, -FRAC_PI_2))).collect();
        let s = build_ribbon(&poses, BrushKind::Strip, 0.03, 0.0).unwrap();
        let ns = quad_normals(&s).unwrap();
        assert_eq!(ns.len(), 4);
        for n in &ns {
            assert!((n.z.abs() - 1.0).abs() < 1e-12);
            assert!(n.dot(ns[0]) > 0.0);
        }
    }

    #[test]
    fn single_quad_normal_is_diagonal_cross() {
        let s = RibbonStrip {
            rulings: vec![
                Ruling { left: Vec3::new(0.0, 0.0, 0.0), right: Vec3::new(1.0, 0.0, 0.1), center: Vec3::new(0.5, 0.0, 0.05), source_pose_index: 0 },
                Ruling { left: Vec3::new(0.1, 1.0, -0.2), right: Vec3::new(1.2, 0.9, 0.0), center: Vec3::new(0.65, 0.95, -0.1), source_pose_index: 1 },
            ],
            width: 1.0,
            brush_kind: BrushKind::Strip,
        };
        let [l0, r0, r1, l1] = s.quad(0);
        let expect = (r1 - l0).cross(l1 - r0).normalize();
        let n = quad_normals(&s).unwrap()[0];
        assert!((n - expect).norm() < 1e-12);
    }

    #[test]
    fn divergence_aligned_and_tilted() {
        // Motion along +Z; up axis orthogonal to motion → zero divergence.
        let poses: Vec<_> = (0..4).map(|i| at(i as f64, Vec3::new(0.0, 0.0, i as f64 * 0.1), UnitQuat::IDENTITY)).collect();
        let s = build_ribbon(&poses, BrushKind::Normal, 0.03, 0.0).unwrap();
        let d = normal_divergence(&s, &controller_normals(&s, &poses)).unwrap();
        assert!(d.iter().all(|a| a.abs() < 1e-12));

        // Up tilted 45° toward the motion: the ribbon normal is the part of up
        // orthogonal to the motion, so divergence is π/4.
        let tilt = UnitQuat::from_axis_angle(Vec3::X, FRAC_PI_4);
        let poses: Vec<_> = (0..4).map(|i| at(i as f64, Vec3::new(0.0, 0.0, i as f64 * 0.1), tilt)).collect();
        let s = build_ribbon(&poses, BrushKind::Normal, 0.03, 0.0).unwrap();
        let d = normal_divergence(&s, &controller_normals(&s, &poses)).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|a| (a - FRAC_PI_4).abs() < 1e-12));

        assert!(normal_divergence(&s, &[Vec3::Y]).is_err());
    }
}
