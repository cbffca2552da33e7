//! Trap graphs with speeds (1, 0, 1): the weak-rule probability keeps
//! falling as the graph grows.
//!
//!     cargo run --release --example trap_graph

use meetwalk::verify::counterexample_suite;

fn main() -> meetwalk::Result<()> {
    let report = counterexample_suite(12.0, &[10, 40, 120], 10_000, 5)?;
    for e in &report.estimates {
        println!("{:<36} {:.5} ± {:.5}", e.label, e.value, e.std_err);
    }
    println!();
    print!("{}", report.table());
    Ok(())
}
