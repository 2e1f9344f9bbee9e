//! Nearest surface points for a few probes around a torus and an ellipsoid.

use ribbon_brush::{SurfaceKind, Vec3};

fn main() {
    let probes = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.3, 0.1, 0.05), Vec3::new(-0.05, 0.2, 0.4), Vec3::new(1.0, 1.0, 1.0)];
    for kind in [SurfaceKind::Torus, SurfaceKind::Ellipsoid] {
        let s = kind.default_surface();
        println!("{kind}");
        for p in probes {
            let pr = s.project_to_surface(p);
            println!(
                "  ({:5.2}, {:5.2}, {:5.2}) -> ({:6.3}, {:6.3}, {:6.3})  d = {:.5}  (u, v) = ({:.3}, {:.3})",
                p.x, p.y, p.z, pr.point.x, pr.point.y, pr.point.z, pr.distance, pr.u, pr.v
            );
        }
    }
}
