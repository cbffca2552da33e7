//! Exact probability that X meets Y before either meets Z, across families,
//! speeds and both tie rules.
//!
//!     cargo run --example collision_exact

use meetwalk::collision::{collision_exact, collision_from, TieRule};
use meetwalk::{Family, SpeedTriple};

fn main() -> meetwalk::Result<()> {
    let s = SpeedTriple::new(1.0, 1.0, 0.0)?;
    println!("speeds {s}, stationary start");
    println!("{:<20} {:>12} {:>12} {:>12}", "family", "strict", "weak", "product");
    for f in Family::parse_list("cycle:3..8,complete:3..6,hypercube:2..4")? {
        let c = f.build()?;
        let strict = collision_exact(&c, &s, TieRule::Strict)?;
        let weak = collision_exact(&c, &s, TieRule::Weak)?;
        println!(
            "{:<20} {:>12.8} {:>12.8} {:>12}",
            f.to_string(),
            strict.probability,
            weak.probability,
            strict.product_states
        );
    }

    // on K_n the weak probability approaches (1 + ly) / (2 (1 + ly + lz))
    let k = Family::Complete { n: 32 }.build()?;
    println!("\nK_32, weak rule:");
    for (ly, lz) in [(0.0, 1.0), (1.0, 1.0), (0.5, 4.0)] {
        let s = SpeedTriple::new(1.0, ly, lz)?;
        let p = collision_exact(&k, &s, TieRule::Weak)?.probability;
        println!("  ly={ly} lz={lz}: {p:.6} vs limit {:.6}", (1.0 + ly) / (2.0 * (1.0 + ly + lz)));
    }

    let c = Family::Cycle { n: 10 }.build()?;
    let p = collision_from(&c, &SpeedTriple::new(1.0, 1.0, 1.0)?, (0, 2, 5), TieRule::Strict)?;
    println!("\ncycle n=10, speeds (1,1,1), start (0,2,5): {p:.8}");
    Ok(())
}
