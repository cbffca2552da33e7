//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`); a positional argument selects criteria by number.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use meetwalk::collision::{collision_exact, TieRule, DEFAULT_CAPACITY};
use meetwalk::verify::{
    counterexample_suite, default_identity_speeds, default_oracle_speeds, default_speed_grid, identity_suite,
    moving_target_suite, nonreversible_suite, occupation_suite, oracle_suite, sharpness_suite, speeds_suite,
    structural_suite, transitive_suite, Check, MovingTargetOptions, Relation, StructuralOptions, VerificationReport,
};
use meetwalk::{Family, SpeedTriple};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> meetwalk::Result<Outcome>;

fn families(s: &str) -> Vec<Family> {
    Family::parse_list(s).expect("valid family list")
}

/// All checks whose name starts with one of `prefixes` ran and passed.
fn report_outcome(report: &VerificationReport, prefixes: &[&str], extra: &str) -> Outcome {
    let chosen: Vec<&Check> = report.checks.iter().filter(|c| prefixes.iter().any(|p| c.name.starts_with(p))).collect();
    let ran = chosen.iter().filter(|c| c.skipped.is_none()).count();
    let failed: Vec<&str> = chosen.iter().filter(|c| c.is_failure()).map(|c| c.name.as_str()).collect();
    let mut detail = format!("{ran} checks, {} failed", failed.len());
    if let Some(f) = failed.first() {
        detail.push_str(&format!(" (first: {f})"));
    }
    if !extra.is_empty() {
        detail.push_str("; ");
        detail.push_str(extra);
    }
    Outcome { pass: ran > 0 && failed.is_empty(), detail }
}

/// Worst `lhs` among passing-direction checks with a prefix, for reporting.
fn extreme(report: &VerificationReport, prefix: &str) -> f64 {
    let vals = report.checks.iter().filter(|c| c.name.starts_with(prefix) && c.skipped.is_none());
    match report.checks.iter().find(|c| c.name.starts_with(prefix)).map(|c| c.relation) {
        Some(Relation::Ge) => vals.map(|c| c.lhs - c.rhs).fold(f64::INFINITY, f64::min),
        _ => vals.map(|c| c.lhs - c.rhs).fold(f64::NEG_INFINITY, f64::max),
    }
}

fn c1_quarter() -> meetwalk::Result<Outcome> {
    let t0 = Instant::now();
    let r = transitive_suite(&families("cycle:3..10,complete:2..8,hypercube:2..4"), DEFAULT_CAPACITY)?;
    let elapsed = t0.elapsed();
    let min = r.checks.iter().map(|c| c.lhs).fold(f64::INFINITY, f64::min);
    let mut o = report_outcome(&r, &["quarter/"], &format!("min strict {min:.10}, {:.1}s", elapsed.as_secs_f64()));
    o.pass &= r.counts().2 == 0 && elapsed < Duration::from_secs(120);
    Ok(o)
}

fn c2_complete_limit() -> meetwalk::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for n in [8usize, 16, 32] {
        let k = Family::Complete { n }.build()?;
        for ly in [0.0, 0.5, 1.0] {
            for lz in [0.0, 1.0, 4.0] {
                let p = collision_exact(&k, &SpeedTriple::new(1.0, ly, lz)?, TieRule::Weak)?.probability;
                let gap = (p - (1.0 + ly) / (2.0 * (1.0 + ly + lz))).abs();
                worst = worst.max(gap * n as f64);
                pass &= gap <= 3.0 / n as f64;
            }
        }
    }
    Ok(Outcome { pass, detail: format!("27 cells, worst n*|gap| = {worst:.4} (limit 3)") })
}

fn c3_identity() -> meetwalk::Result<Outcome> {
    let r = identity_suite(&families("hypercube:3,cycle:7"), &default_identity_speeds())?;
    let gap = r.checks.iter().filter(|c| c.name.starts_with("identity/")).map(|c| c.lhs).fold(0.0, f64::max);
    let fails = r.checks.iter().find(|c| c.name.starts_with("identity-fails/")).map_or(f64::NAN, |c| c.lhs);
    Ok(report_outcome(
        &r,
        &["identity/", "identity-fails/"],
        &format!("max transitive gap {gap:.2e}, three-path gap {fails:.4}"),
    ))
}

/// Reversible families with at most 64 states; shared by criteria 4 to 7.
fn structural() -> &'static VerificationReport {
    static REPORT: OnceLock<VerificationReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let fams = families("cycle:3..64,complete:2..64,hypercube:2..6,hypercube:2..5@0.2,trap:2..6@12");
        structural_suite(&fams, &StructuralOptions::default()).expect("structural suite runs")
    })
}

fn c4_generator() -> meetwalk::Result<Outcome> {
    let r = structural();
    let extra = format!(
        "worst single residual {:.1e}, worst pair residual {:.1e}",
        extreme(r, "single-drift/") + 1e-10,
        extreme(r, "pair-drift/") + 1e-9
    );
    Ok(report_outcome(r, &["single-drift/", "pair-drift/"], &extra))
}

fn c5_symmetry() -> meetwalk::Result<Outcome> {
    let r = structural();
    let extra = format!("worst symmetry gap {:.1e}", extreme(r, "symmetry/") + 1e-9);
    Ok(report_outcome(r, &["symmetry/", "hit-vs-stationary/"], &extra))
}

fn c6_residual_life() -> meetwalk::Result<Outcome> {
    let r = structural();
    let extra = format!(
        "worst drop {:.1e}, worst sup f - ceiling {:.3e}",
        extreme(r, "residual-life-monotone/"),
        extreme(r, "residual-life-ceiling/")
    );
    Ok(report_outcome(r, &["residual-life-monotone/", "residual-life-ceiling/"], &extra))
}

fn c7_small_time() -> meetwalk::Result<Outcome> {
    let r = structural();
    let worst = r
        .checks
        .iter()
        .filter(|c| c.name.starts_with("small-time/") && c.skipped.is_none())
        .map(|c| c.lhs / c.rhs)
        .fold(0.0, f64::max);
    let meet = extreme(r, "small-time-meeting/") + 1.0;
    Ok(report_outcome(
        r,
        &["small-time/", "small-time-meeting/"],
        &format!("worst ratio to 6 sqrt(theta) {worst:.3}, worst meeting ratio {meet:.3}"),
    ))
}

fn c8_speed_bounds() -> meetwalk::Result<Outcome> {
    let r = speeds_suite(&families("complete:8,complete:16,complete:32"), &default_speed_grid(), DEFAULT_CAPACITY)?;
    let lin = r.checks.iter().filter(|c| c.name.starts_with("linear-bound/")).count();
    let mut o = report_outcome(&r, &["speed-bound/", "linear-bound/"], &format!("{lin} linear-bound cells"));
    o.pass &= r.counts().2 == 0 && lin > 0;
    Ok(o)
}

fn c9_trap() -> meetwalk::Result<Outcome> {
    let t0 = Instant::now();
    let r = counterexample_suite(12.0, &[20, 60, 160], 20_000, SEED)?;
    let elapsed = t0.elapsed();
    let est: Vec<String> = r.estimates.iter().map(|e| format!("{:.4}±{:.4}", e.value, e.std_err)).collect();
    let mut o = report_outcome(
        &r,
        &["down-mass/", "decreasing/"],
        &format!("estimates {}, {:.0}s", est.join(" > "), elapsed.as_secs_f64()),
    );
    o.pass &= elapsed < Duration::from_secs(600);
    Ok(o)
}

fn c10_sharpness() -> meetwalk::Result<Outcome> {
    let (check, _) = sharpness_suite(3, 0.01, DEFAULT_CAPACITY, 20_000, SEED)?;
    let levels_ok = check.per_k.len() == 2 && check.per_k.iter().all(|l| l.probability >= l.bound);
    let pass = check.method == "exact" && check.weak <= 1.0 / 3.0 + 0.06 && levels_ok;
    let levels: Vec<String> =
        check.per_k.iter().map(|l| format!("k={}: {:.6} >= {:.6}", l.k, l.probability, l.bound)).collect();
    Ok(Outcome { pass, detail: format!("weak {:.6} <= {:.6}; {}", check.weak, 1.0 / 3.0 + 0.06, levels.join(", ")) })
}

fn c11_occupation() -> meetwalk::Result<Outcome> {
    let r = occupation_suite(&families("complete:5,hypercube:3"), &SpeedTriple::new(1.0, 1.0, 1.0)?, 50_000, SEED)?;
    let z = r.checks.iter().filter(|c| c.name.starts_with("occupation/")).map(|c| c.lhs).fold(0.0, f64::max);
    let mut o = report_outcome(&r, &["occupation/", "t-integral/"], &format!("worst diagonal z {z:.2}"));
    o.pass &= r.counts().2 == 0;
    Ok(o)
}

fn c12_moving_target() -> meetwalk::Result<Outcome> {
    let opts = MovingTargetOptions { samples: 20_000, seed: SEED, path_seeds: vec![1, 2, 3] };
    let r = moving_target_suite(&families("cycle:8,cycle:16,hypercube:3,hypercube:4"), &opts)?;
    let ratio = r.checks.iter().filter(|c| c.name.contains("-bound/")).map(|c| c.lhs / c.rhs).fold(0.0, f64::max);
    Ok(report_outcome(
        &r,
        &["frozen-target/", "frozen-bound/", "random-bound/"],
        &format!("largest estimate / (11 t*_hit) = {ratio:.3}"),
    ))
}

fn c13_oracle() -> meetwalk::Result<Outcome> {
    let fams = families("cycle:3..12,cycle:16,cycle:24,cycle:32,complete:2..12,complete:16,complete:32,hypercube:2..5");
    let r = oracle_suite(&fams, &default_oracle_speeds(), 100_000, SEED)?;
    let rate = r.checks.iter().find(|c| c.name == "agreement-rate").map_or(f64::NAN, |c| c.lhs);
    Ok(report_outcome(&r, &["agreement-rate"], &format!("{} cells, agreement {:.4}", r.estimates.len(), rate)))
}

fn c14_directed() -> meetwalk::Result<Outcome> {
    let r = nonreversible_suite(&[10, 30, 90], 20_000, SEED)?;
    let est: Vec<String> = r
        .estimates
        .iter()
        .filter(|e| e.method == "monte-carlo")
        .map(|e| format!("{:.4}±{:.4}", e.value, e.std_err))
        .collect();
    Ok(report_outcome(
        &r,
        &["not-reversible/", "exact-agrees/", "decreasing/"],
        &format!("n=3 then 10,30,90: {}", est.join(", ")),
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 14] = [
        ("strict probability >= 1/4 on transitive families", c1_quarter),
        ("complete-graph weak probability near its limit", c2_complete_limit),
        ("hitting/meeting identity on transitive chains", c3_identity),
        ("generator identities", c4_generator),
        ("hitting symmetry and t_hit <= 2 t*_hit", c5_symmetry),
        ("mean residual life monotone and bounded", c6_residual_life),
        ("small-time hitting and meeting profiles", c7_small_time),
        ("speed-dependent lower bounds", c8_speed_bounds),
        ("trap graphs: falling estimates and pi(Down)", c9_trap),
        ("geometric hypercube near 1/3", c10_sharpness),
        ("occupation identity and T-integral bound", c11_occupation),
        ("moving-target hitting bound", c12_moving_target),
        ("Monte Carlo agrees with exact solves", c13_oracle),
        ("directed cycles: falling estimates", c14_directed),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!outcome.pass);
        println!("{status} {id:>2} {title}: {} [{:.1}s]", outcome.detail, t0.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
