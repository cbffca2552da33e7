//! Build every chain family, inspect its structure, and round-trip one
//! through the chain file format.
//!
//!     cargo run --example chain_families

use meetwalk::chain::{
    self, build_trap_graph, structure_report, DEFAULT_REVERSIBILITY_TOL, DEFAULT_TRANSITIVITY_BUDGET,
};
use meetwalk::Family;

fn main() -> meetwalk::Result<()> {
    let families = Family::parse_list("complete:5,cycle:6,directed-cycle:5,hypercube:3,hypercube:3@0.2,trap:4@12")?;
    println!("{:<28} {:>6} {:>6} {:>11} {:>15}", "family", "states", "edges", "reversible", "transitivity");
    for f in &families {
        let c = f.build()?;
        let s = structure_report(&c, DEFAULT_REVERSIBILITY_TOL, DEFAULT_TRANSITIVITY_BUDGET)?;
        println!(
            "{:<28} {:>6} {:>6} {:>11} {:>15}",
            f.to_string(),
            c.n(),
            c.nnz(),
            s.reversibility.reversible,
            s.transitivity.label()
        );
    }

    let (trap, layout) = build_trap_graph(20, 12.0)?;
    let down = trap.stationary()?.mass(layout.down.iter().copied());
    println!(
        "\ntrap graph n=20, C=12: {} states, cliques of size {}, pi(Down) = {down:.4} (2/C = {:.4})",
        trap.n(),
        layout.k,
        2.0 / 12.0
    );

    let q = Family::Hypercube { d: 3, eps: Some(0.2) }.build()?;
    let text = chain::io::to_string(&q);
    let back = chain::io::from_str(&text)?;
    let same = (0..q.n()).all(|x| q.row(x) == back.row(x));
    println!("\nchain file ({} bytes) round-trips bit for bit: {same}", text.len());
    println!("{}", text.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
