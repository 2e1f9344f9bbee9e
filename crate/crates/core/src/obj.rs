//! Wavefront OBJ export of ribbon strips.
//!
//! Each stroke becomes one `o stroke_<n>` group. Every quad is written as two
//! triangles wound counter-clockwise when seen from the side its
//! (sign-consistent) normal points to.

use std::fmt::Write as _;

use crate::brush::{quad_normals_with_diagnostics, RibbonStrip};

pub const OBJ_HEADER: &str = "# ribbon-brush OBJ export\n";

/// Renders strips as OBJ text. Empty strips still get their group line.
pub fn to_obj<'a>(strips: impl IntoIterator<Item = &'a RibbonStrip>) -> String {
    let mut out = String::from(OBJ_HEADER);
    let mut base = 1usize;
    for (n, strip) in strips.into_iter().enumerate() {
        let _ = writeln!(out, "o stroke_{n}");
        let _ = writeln!(out, "# brush {} width {}", strip.brush_kind, strip.width);
        for r in &strip.rulings {
            for v in [r.left, r.right] {
                let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
            }
        }
        if strip.quad_count() > 0 {
            let flips = quad_normals_with_diagnostics(strip).map(|q| q.flipped).unwrap_or_default();
            for i in 0..strip.quad_count() {
                let l0 = base + 2 * i;
                let (r0, l1, r1) = (l0 + 1, l0 + 2, l0 + 3);
                if flips.get(i).copied().unwrap_or(false) {
                    let _ = writeln!(out, "f {l0} {r1} {r0}");
                    let _ = writeln!(out, "f {l0} {l1} {r1}");
                } else {
                    let _ = writeln!(out, "f {l0} {r0} {r1}");
                    let _ = writeln!(out, "f {l0} {r1} {l1}");
                }
            }
        }
        base += 2 * strip.rulings.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brush::{build_ribbon, BrushKind};
    use crate::geometry::{Pose, UnitQuat, Vec3};

    #[test]
    fn empty_export_is_header_only() {
        assert_eq!(to_obj(std::iter::empty()), OBJ_HEADER);
    }

    #[test]
    fn counts_and_indices() {
        let poses: Vec<_> = (0..4).map(|i| Pose::new(i as f64, Vec3::new(0.0, 0.0, 0.1 * i as f64), UnitQuat::IDENTITY, true)).collect();
        let s = build_ribbon(&poses, BrushKind::Strip, 0.03, 0.0).unwrap();
        let obj = to_obj([&s, &s]);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 16);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 12);
        assert_eq!(obj.lines().filter(|l| l.starts_with("o ")).count(), 2);
        assert!(obj.contains("f 9 10 12"));
    }
}
