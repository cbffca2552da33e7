//! The hypercube with geometric coordinate rates, where the weak-rule
//! probability with speeds (1, 1, 0) comes close to 1/3.
//!
//!     cargo run --release --example sharpness

use meetwalk::collision::DEFAULT_CAPACITY;
use meetwalk::verify::sharpness_suite;

fn main() -> meetwalk::Result<()> {
    for eps in [0.2, 0.05, 0.01] {
        let (check, _) = sharpness_suite(3, eps, DEFAULT_CAPACITY, 10_000, 0)?;
        println!("d=3 eps={eps}: weak {:.6}, strict {:.6}, budget {:.4}", check.weak, check.strict, check.budget);
        for l in &check.per_k {
            println!("    k={}: {:.6} >= {:.6}", l.k, l.probability, l.bound);
        }
    }
    Ok(())
}
