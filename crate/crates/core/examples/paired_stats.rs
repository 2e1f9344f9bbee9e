//! Paired t-tests from raw differences and from summary statistics.

use ribbon_brush::stats::{paired_t, PairedSummary};

fn main() -> ribbon_brush::Result<()> {
    let diffs = [12.5, 20.0, -5.0, 30.0, 7.5, 15.0, 22.5, 10.0, 2.5, 17.5];
    let s = paired_t(&diffs)?;
    println!("raw:     n={} diff={:.3} t={:.3} p={:.4} CI=({:.2}, {:.2})", s.n, s.mean_diff, s.t, s.p_one_tailed, s.ci95.0, s.ci95.1);

    let s = PairedSummary::from_summary(13.882, 16.484, 17)?;
    println!(
        "summary: n={} diff={:.3} t={:.3} p={:.4} (two-tailed {:.4}) CI=({:.2}, {:.2})",
        s.n,
        s.mean_diff,
        s.t,
        s.p_one_tailed,
        s.p_two_tailed(),
        s.ci95.0,
        s.ci95.1
    );
    Ok(())
}
