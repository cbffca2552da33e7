//! Meeting-time distributions of two walkers, and the identity relating
//! them to hitting times on a transitive chain (which fails on a path).
//!
//!     cargo run --example meeting_times

use meetwalk::chain::{build_hypercube, ChainSpec};
use meetwalk::collision::{identity_gaps, meeting_cdf};
use meetwalk::exact::{hitting_cdf, hitting_moments, linear_grid};

fn main() -> meetwalk::Result<()> {
    let q = build_hypercube(3, None)?;
    let t = hitting_moments(&q)?.t_star_hit;
    let grid = linear_grid(3.0 * t, 7);
    let (ly, lz) = (0.5, 2.0);
    let meet = meeting_cdf(&q, ly, lz, 0, 7, &grid)?;
    let hit = hitting_cdf(&q, 0, 7, ly + lz, &grid)?;
    println!("hypercube d=3, Y at speed {ly} from 0, Z at speed {lz} from 7");
    println!("{:>8} {:>12} {:>12}", "t", "meeting", "hitting");
    for ((t, m), h) in grid.iter().zip(&meet.values).zip(&hit.values) {
        println!("{t:>8.3} {m:>12.8} {h:>12.8}");
    }
    let gaps = identity_gaps(&q, ly, lz, &grid)?;
    println!("largest gap over all pairs: {:.2e}", gaps.max_gap);

    let path = ChainSpec::from_dense(&[vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 1.0, 0.0]])?;
    let g = identity_gaps(&path, 1.0, 1.0, &linear_grid(8.0, 41))?;
    println!("3-state path: largest gap {:.4} at pair {:?}", g.max_gap, g.worst_pair);
    Ok(())
}
