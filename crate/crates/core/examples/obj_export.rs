//! Builds both ribbons from one helical pose stream and writes them as OBJ.
//!
//! cargo run --example obj_export -- /tmp/helix.obj

use ribbon_brush::brush::{build_ribbon, BrushKind};
use ribbon_brush::obj::to_obj;
use ribbon_brush::{Pose, UnitQuat, Vec3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("helix.obj").display().to_string());
    let poses: Vec<Pose> = (0..200)
        .map(|i| {
            let a = i as f64 * 0.05;
            let p = Vec3::new(0.1 * a.cos(), 0.1 * a.sin(), 0.01 * a);
            Pose::new(i as f64 * 0.01, p, UnitQuat::from_axis_angle(Vec3::Z, a), true)
        })
        .collect();
    let strips = [build_ribbon(&poses, BrushKind::Normal, 0.02, 0.005)?, build_ribbon(&poses, BrushKind::Strip, 0.02, 0.005)?];
    for s in &strips {
        println!("{}: {} rulings, {} quads", s.brush_kind, s.rulings.len(), s.quad_count());
    }
    std::fs::write(&path, to_obj(&strips))?;
    println!("wrote {path}");
    Ok(())
}
