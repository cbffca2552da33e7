use serde::{Deserialize, Serialize};

use super::claims;
use super::exact_suites::Prepared;
use super::report::{Check, EstimateRow, Relation, VerificationReport};
use crate::chain::{build_cycle, build_trap_graph, Family, SpeedTriple};
use crate::collision::{collision_exact, TieRule};
use crate::error::{Error, Result};
use crate::exact::hitting_moments;
use crate::montecarlo::{estimate_collision, moving_target_check, occupation_check, McEstimate, TargetPath};

fn est_row(label: String, e: &McEstimate) -> EstimateRow {
    EstimateRow { label, value: e.mean, std_err: e.std_err, n_samples: e.n_used, method: "monte-carlo".into() }
}

/// Consecutive estimates must drop by more than `gap_se` combined standard
/// errors.
fn trend_checks(
    report: &mut VerificationReport,
    prefix: &str,
    claim: &str,
    points: &[(String, McEstimate)],
    gap_se: f64,
) {
    for w in points.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let combined = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
        report.checks.push(Check::new(
            format!("{prefix}/{}>{}", w[0].0, w[1].0),
            claim,
            a.mean - b.mean,
            Relation::Ge,
            gap_se * combined,
            0.0,
            "monte-carlo",
        ));
    }
}

/// Weak-rule probability on trap graphs with speeds `(1, 0, 1)` for growing
/// `n`, plus the mass of the central clique.
pub fn counterexample_suite(c: f64, n_list: &[usize], samples: usize, seed: u64) -> Result<VerificationReport> {
    if n_list.len() < 2 {
        return Err(Error::param("counterexample suite needs at least two sizes"));
    }
    let mut report = VerificationReport::new("counterexample");
    report.seed = Some(seed);
    let s = SpeedTriple::new(1.0, 0.0, 1.0)?;
    report.add_speeds(s);
    let mut points = Vec::new();
    for &n in n_list {
        let (chain, layout) = build_trap_graph(n, c)?;
        let down = chain.stationary()?.mass(layout.down.iter().copied());
        let label = format!("n={n}");
        report.checks.push(Check::new(
            format!("down-mass/trap/{label}"),
            claims::TRAP_DOWN,
            down,
            Relation::Le,
            2.0 / c,
            0.0,
            "stationary",
        ));
        let e = estimate_collision(&chain, &s, TieRule::Weak, samples, seed, None)?;
        report.estimates.push(est_row(format!("weak/trap(n={n}, C={c})"), &e));
        report.chains.push(super::report::ChainMeta {
            family: chain.family().to_string(),
            n: chain.n(),
            reversible: true,
            transitivity: "not-transitive".into(),
        });
        points.push((label, e));
    }
    trend_checks(&mut report, "decreasing/trap", claims::TRAP_TREND, &points, 5.0);
    Ok(report)
}

/// Directed cycles with speeds `(1, 1, 0)`: the strict probability falls with
/// `n`; the exact solve on the 3-cycle checks the simulator.
pub fn nonreversible_suite(n_list: &[usize], samples: usize, seed: u64) -> Result<VerificationReport> {
    if n_list.len() < 2 {
        return Err(Error::param("nonreversible suite needs at least two sizes"));
    }
    let mut report = VerificationReport::new("nonreversible");
    report.seed = Some(seed);
    let s = SpeedTriple::new(1.0, 1.0, 0.0)?;
    report.add_speeds(s);

    let small = build_cycle(3, true)?;
    let rev = crate::chain::check_reversible(&small, crate::chain::DEFAULT_REVERSIBILITY_TOL)?;
    report.checks.push(Check::new(
        "not-reversible/directed-cycle(n=3)",
        claims::NOT_REVERSIBLE,
        rev.max_residual,
        Relation::Ge,
        rev.tol,
        0.0,
        "detailed balance",
    ));
    let exact = collision_exact(&small, &s, TieRule::Strict)?.probability;
    let mc = estimate_collision(&small, &s, TieRule::Strict, samples, seed, None)?;
    report.estimates.push(EstimateRow {
        label: "strict/directed-cycle(n=3)/exact".into(),
        value: exact,
        std_err: 0.0,
        n_samples: 0,
        method: "exact".into(),
    });
    report.estimates.push(est_row("strict/directed-cycle(n=3)".into(), &mc));
    report.checks.push(Check::new(
        "exact-agrees/directed-cycle(n=3)",
        claims::EXACT_AGREES,
        mc.z_score(exact),
        Relation::Le,
        3.5,
        0.0,
        "monte-carlo vs exact",
    ));

    let mut points = Vec::new();
    for &n in n_list {
        let chain = build_cycle(n, true)?;
        let e = estimate_collision(&chain, &s, TieRule::Strict, samples, seed, None)?;
        report.estimates.push(est_row(format!("strict/directed-cycle(n={n})"), &e));
        report.chains.push(Prepared::new(chain)?.meta());
        points.push((format!("n={n}"), e));
    }
    trend_checks(&mut report, "decreasing/directed-cycle", claims::DIRECTED_TREND, &points, 5.0);
    Ok(report)
}

/// The speed triples used for the simulator-versus-exact comparison.
pub fn default_oracle_speeds() -> Vec<SpeedTriple> {
    [(1.0, 1.0, 0.0), (1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 0.5, 2.0)]
        .iter()
        .map(|&(a, b, c)| SpeedTriple::new(a, b, c).expect("valid speeds"))
        .collect()
}

/// Simulator against the exact solve for every (chain, speeds) cell; passes
/// when at least 95% of cells agree within 3.5 SE.
pub fn oracle_suite(
    families: &[Family],
    speeds: &[SpeedTriple],
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("oracle");
    report.seed = Some(seed);
    let (mut cells, mut agree) = (0usize, 0usize);
    for f in families {
        let p = Prepared::build(f)?;
        report.chains.push(p.meta());
        for s in speeds {
            report.add_speeds(*s);
            let tie = TieRule::Strict;
            let exact = collision_exact(&p.chain, s, tie)?.probability;
            let e = estimate_collision(&p.chain, s, tie, samples, seed, None)?;
            let z = e.z_score(exact);
            cells += 1;
            if z <= 3.5 {
                agree += 1;
            } else {
                report.notes.push(format!("{} {s}: {:.6} vs exact {exact:.6} ({z:.2} SE)", p.label, e.mean));
            }
            report.estimates.push(est_row(format!("strict/{}/{s}", p.label), &e));
        }
    }
    report.checks.push(Check::new(
        "agreement-rate",
        claims::ORACLE_RATE,
        agree as f64 / cells.max(1) as f64,
        Relation::Ge,
        0.95,
        0.0,
        "monte-carlo vs exact",
    ));
    Ok(report)
}

pub fn occupation_suite(
    families: &[Family],
    speeds: &SpeedTriple,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("occupation");
    report.seed = Some(seed);
    report.add_speeds(*speeds);
    for f in families {
        let p = Prepared::build(f)?;
        report.chains.push(p.meta());
        let l = &p.label;
        if !(p.transitive() && p.reversible) {
            report.checks.push(Check::skip(
                format!("occupation/{l}"),
                claims::OCCUPATION,
                "hypothesis: transitive and reversible",
            ));
            continue;
        }
        let r = occupation_check(&p.chain, speeds, samples, seed)?;
        report.checks.push(Check::new(
            format!("occupation/{l}"),
            claims::OCCUPATION,
            r.max_z,
            Relation::Le,
            3.5,
            0.0,
            "monte-carlo, paired SE",
        ));
        report.checks.push(Check::new(
            format!("t-integral/{l}"),
            claims::T_INTEGRAL,
            r.t_integral.mean,
            Relation::Le,
            r.t_bound,
            0.0,
            "monte-carlo",
        ));
        report.estimates.push(est_row(format!("tau/{l}"), &r.tau));
        report.estimates.push(est_row(format!("t-integral/{l}"), &r.t_integral));
        report.notes.push(format!("{l}: acceptance rate {:.4} over {} attempts", r.acceptance_rate, r.attempted));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingTargetOptions {
    pub samples: usize,
    pub seed: u64,
    /// Seeds of the random target paths.
    pub path_seeds: Vec<u64>,
}

impl Default for MovingTargetOptions {
    fn default() -> Self {
        MovingTargetOptions { samples: 20_000, seed: 0, path_seeds: vec![1, 2, 3] }
    }
}

pub fn moving_target_suite(families: &[Family], opts: &MovingTargetOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("moving-target");
    report.seed = Some(opts.seed);
    for f in families {
        let p = Prepared::build(f)?;
        report.chains.push(p.meta());
        let l = &p.label;
        if !p.reversible {
            report.checks.push(Check::skip(
                format!("moving-target/{l}"),
                claims::MOVING_TARGET,
                "hypothesis: not reversible",
            ));
            continue;
        }
        let n = p.chain.n();
        let far = n / 2;
        let frozen = moving_target_check(&p.chain, 0, TargetPath::Frozen { state: far }, opts.samples, opts.seed)?;
        let exact = hitting_moments(&p.chain)?.expectations[0][far];
        report.checks.push(Check::new(
            format!("frozen-target/{l}"),
            claims::FROZEN_TARGET,
            frozen.estimate.z_score(exact),
            Relation::Le,
            3.5,
            0.0,
            "monte-carlo vs exact",
        ));
        let mut runs = vec![(format!("frozen-bound/{l}"), frozen)];
        for &ps in &opts.path_seeds {
            let r =
                moving_target_check(&p.chain, 0, TargetPath::Random { start: far, seed: ps }, opts.samples, opts.seed)?;
            runs.push((format!("random-bound/{l}/path={ps}"), r));
        }
        for (name, r) in runs {
            report.estimates.push(est_row(name.clone(), &r.estimate));
            report.checks.push(Check::new(
                name,
                claims::MOVING_TARGET,
                r.estimate.mean,
                Relation::Le,
                r.bound,
                3.5 * r.estimate.std_err,
                "monte-carlo",
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directed_cycles_fall() {
        let r = nonreversible_suite(&[5, 15], 4_000, 1).unwrap();
        assert!(r.all_pass(), "{}", r.table());
    }

    #[test]
    fn small_oracle() {
        let fams = Family::parse_list("complete:3..4").unwrap();
        let r = oracle_suite(&fams, &default_oracle_speeds(), 5_000, 2).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert_eq!(r.estimates.len(), 8);
    }

    #[test]
    fn occupation_skips_nontransitive() {
        let fams = Family::parse_list("complete:4,trap:2@12").unwrap();
        let r = occupation_suite(&fams, &SpeedTriple::new(1.0, 1.0, 1.0).unwrap(), 5_000, 3).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert_eq!(r.counts().2, 1);
    }

    #[test]
    fn moving_target_small() {
        let opts = MovingTargetOptions { samples: 5_000, seed: 4, path_seeds: vec![1] };
        let r = moving_target_suite(&Family::parse_list("cycle:6").unwrap(), &opts).unwrap();
        assert!(r.all_pass(), "{}", r.table());
    }
}
