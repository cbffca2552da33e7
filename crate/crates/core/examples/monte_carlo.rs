//! Seeded Monte Carlo estimates checked against exact values, plus the
//! moving-target and occupation estimators.
//!
//!     cargo run --release --example monte_carlo

use meetwalk::collision::{collision_exact, TieRule};
use meetwalk::montecarlo::{estimate_collision, moving_target_check, occupation_check, TargetPath};
use meetwalk::{Family, SpeedTriple};

fn main() -> meetwalk::Result<()> {
    let seed = 2024;
    let c = Family::Hypercube { d: 3, eps: None }.build()?;
    println!("hypercube d=3, seed {seed}");
    for (lx, ly, lz) in [(1.0, 1.0, 0.0), (1.0, 0.5, 2.0)] {
        let s = SpeedTriple::new(lx, ly, lz)?;
        let exact = collision_exact(&c, &s, TieRule::Strict)?.probability;
        let e = estimate_collision(&c, &s, TieRule::Strict, 50_000, seed, None)?;
        println!("  {s}: {:.5} ± {:.5} vs exact {exact:.5} ({:.2} SE)", e.mean, e.std_err, e.z_score(exact));
    }

    let cyc = Family::Cycle { n: 12 }.build()?;
    for target in [TargetPath::Frozen { state: 6 }, TargetPath::Random { start: 6, seed: 1 }] {
        let r = moving_target_check(&cyc, 0, target, 20_000, seed)?;
        println!(
            "cycle n=12, target {target:?}: E tau = {:.3} ± {:.3}, bound 11 t*_hit = {:.3}",
            r.estimate.mean, r.estimate.std_err, r.bound
        );
    }

    let k = Family::Complete { n: 5 }.build()?;
    let r = occupation_check(&k, &SpeedTriple::new(1.0, 1.0, 1.0)?, 20_000, seed)?;
    println!(
        "K_5 occupation: worst state {:.2} SE off; T-integral {:.4} ± {:.4} <= {:.4}",
        r.max_z, r.t_integral.mean, r.t_integral.std_err, r.t_bound
    );
    Ok(())
}
