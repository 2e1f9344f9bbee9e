//! Principal curvature ranges and point classes over every reference surface.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ribbon_brush::SurfaceKind;

fn main() -> ribbon_brush::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in SurfaceKind::ALL {
        let s = kind.default_surface();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut classes = BTreeMap::new();
        for _ in 0..500 {
            let (u, v) = s.sample_parameters(&mut rng, 0.02);
            let c = s.curvature_sample(u, v)?;
            lo = lo.min(c.k_min);
            hi = hi.max(c.k_max);
            *classes.entry(format!("{:?}", c.class)).or_insert(0) += 1;
        }
        println!("{kind:<10} k in [{lo:8.3}, {hi:8.3}]  {classes:?}");
    }
    Ok(())
}
