//! Expected hitting times, the spectrum, hitting-time distributions and the
//! mean residual life curve on a cycle.
//!
//!     cargo run --example hitting_times

use meetwalk::chain::build_cycle;
use meetwalk::exact::{hitting_cdf, hitting_moments, linear_grid, residual_life_curve, spectral_summary};

fn main() -> meetwalk::Result<()> {
    let c = build_cycle(9, false)?;
    let hit = hitting_moments(&c)?;
    let spec = spectral_summary(&c)?;
    println!("cycle n=9: t_hit = {:.4}, t*_hit = {:.4}", hit.t_hit, hit.t_star_hit);
    println!(
        "E_0[tau_k] for k = 0..8: {:?}",
        hit.expectations[0].iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    println!(
        "lambda_2 = {:.6}, t_rel = {:.4}, continuous-time t_rel = {:.4}",
        spec.lambda_2, spec.t_rel_discrete, spec.t_rel_cont
    );
    println!("generator residual {:.1e}, pair residual {:.1e}", hit.generator_residual(&c), hit.pair_residual(&c));

    let grid = linear_grid(3.0 * hit.t_star_hit, 7);
    let cdf = hitting_cdf(&c, 0, 4, 1.0, &grid)?;
    println!("\nP_0(tau_4 <= t), truncation error <= {:.1e}", cdf.err_bound);
    for (t, v) in cdf.times.iter().zip(&cdf.values) {
        println!("  t = {t:>7.3}  {v:.6}");
    }

    let s_grid = linear_grid(2.0 * hit.t_star_hit, 6);
    let f = residual_life_curve(&c, 0, &s_grid, &spec)?;
    println!("\nE_pi[tau_0 - s | tau_0 > s] (ceiling E_pi tau_0 + t_rel = {:.4})", f.ceiling());
    for (s, v) in f.s.iter().zip(&f.f) {
        println!("  s = {s:>7.3}  {v:.6}");
    }
    Ok(())
}
