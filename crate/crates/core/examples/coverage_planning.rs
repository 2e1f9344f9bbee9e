//! Stroke counts and drawing time of coverage plans at several overlaps.
//!
//! cargo run --release --example coverage_planning -- sphere

use ribbon_brush::brush::BrushKind;
use ribbon_brush::metrics::EffortWeights;
use ribbon_brush::planner::{coverage_plan, plan_to_poses, DEFAULT_SPEED};
use ribbon_brush::SurfaceKind;

fn main() -> ribbon_brush::Result<()> {
    let kind: SurfaceKind = std::env::args().nth(1).as_deref().unwrap_or("sphere").parse()?;
    let surface = kind.default_surface();
    for overlap in [0.0, 0.2, 0.5] {
        let plan = coverage_plan(&surface, BrushKind::Strip, 0.03, overlap)?;
        let poses = plan_to_poses(&plan, DEFAULT_SPEED, &EffortWeights::default())?;
        let samples: usize = poses.strokes.iter().map(Vec::len).sum();
        let flat = poses.flatten();
        let secs = flat.last().map_or(0.0, |p| p.timestamp) - flat.first().map_or(0.0, |p| p.timestamp);
        println!("{kind} overlap {overlap:.1}: {} strokes, {samples} poses, {secs:.1} s of drawing", poses.strokes.len());
    }
    Ok(())
}
