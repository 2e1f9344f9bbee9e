//! Effort of a stroke that twists the controller while moving along x.

use std::f64::consts::FRAC_PI_2;

use ribbon_brush::metrics::{wrist_effort, EffortWeights};
use ribbon_brush::{Pose, UnitQuat, Vec3};

fn main() -> ribbon_brush::Result<()> {
    let n = 50;
    let twist: Vec<Pose> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let q = UnitQuat::from_axis_angle(Vec3::Z, FRAC_PI_2 * s) * UnitQuat::from_axis_angle(Vec3::X, 0.3 * s);
            Pose::new(0.02 * i as f64, Vec3::new(0.2 * s, 0.0, 0.0), q, true)
        })
        .collect();
    for w in [EffortWeights::default(), EffortWeights::new(1.0, 2.0, 0.5)?] {
        let e = wrist_effort(&twist, w)?;
        println!(
            "weights {:?}: pitch {:.1}° yaw {:.1}° roll {:.1}° weighted {:.4}",
            w,
            e.pitch_total.to_degrees(),
            e.yaw_total.to_degrees(),
            e.roll_total.to_degrees(),
            e.weighted_total
        );
    }
    Ok(())
}
