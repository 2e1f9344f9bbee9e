//! Draws the same coverage plan with both brushes and prints their metrics.
//!
//! cargo run --release --example normal_vs_strip -- torus

use ribbon_brush::brush::BrushKind;
use ribbon_brush::cli::{simulate, RunConfig};
use ribbon_brush::metrics::{EffortWeights, DEFAULT_COVERAGE_SEED};
use ribbon_brush::planner::{DEFAULT_OVERLAP, DEFAULT_SPEED};
use ribbon_brush::SurfaceKind;

fn main() -> ribbon_brush::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "torus".into());
    let kind: SurfaceKind = name.parse()?;
    let cfg = RunConfig {
        surface: kind.default_surface(),
        surface_name: name,
        brushes: BrushKind::ALL.to_vec(),
        width: 0.03,
        epsilon: 0.005,
        weights: EffortWeights::default(),
        overlap: DEFAULT_OVERLAP,
        speed: DEFAULT_SPEED,
        seed: DEFAULT_COVERAGE_SEED,
        out: None,
    };
    println!("{:<7} {:>7} {:>11} {:>9} {:>9} {:>9} {:>9}", "brush", "strokes", "mean_dist", "pitch°", "yaw°", "roll°", "weighted");
    for brush in BrushKind::ALL {
        let r = simulate(&cfg, brush)?.row;
        println!(
            "{:<7} {:>7} {:>11.3e} {:>9.1} {:>9.1} {:>9.1} {:>9.3}",
            r.brush,
            r.stroke_count,
            r.mean_dist,
            r.pitch.to_degrees(),
            r.yaw.to_degrees(),
            r.roll.to_degrees(),
            r.weighted_total
        );
    }
    Ok(())
}
