use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::claims;
use super::report::{ChainMeta, Check, EstimateRow, FloorEvidence, Relation, VerificationReport};
use crate::chain::{
    build_hypercube, check_reversible, check_transitive, hypercube_rates, ChainSpec, Family, SpeedTriple, Transitivity,
    DEFAULT_REVERSIBILITY_TOL, DEFAULT_TRANSITIVITY_BUDGET,
};
use crate::collision::{
    collision_exact_with_capacity, identity_gaps, meeting_small_time_profile, CollisionReport, TieRule,
};
use crate::error::{Error, Result};
use crate::exact::{
    hitting_moments, linear_grid, negative_set, negative_set_tail, residual_life_curve, small_time_profile,
    spectral_summary,
};
use crate::linalg::SparseSystem;
use crate::montecarlo::estimate_collision;

/// A chain with its structural verdicts.
pub(crate) struct Prepared {
    pub label: String,
    pub chain: ChainSpec,
    pub reversible: bool,
    pub transitivity: Transitivity,
}

impl Prepared {
    pub fn new(chain: ChainSpec) -> Result<Self> {
        let reversible = check_reversible(&chain, DEFAULT_REVERSIBILITY_TOL)?.reversible;
        let transitivity = check_transitive(&chain, DEFAULT_TRANSITIVITY_BUDGET);
        Ok(Prepared { label: chain.family().to_string(), chain, reversible, transitivity })
    }

    pub fn build(family: &Family) -> Result<Self> {
        Self::new(family.build()?)
    }

    pub fn meta(&self) -> ChainMeta {
        ChainMeta {
            family: self.label.clone(),
            n: self.chain.n(),
            reversible: self.reversible,
            transitivity: self.transitivity.label().to_string(),
        }
    }

    pub fn transitive(&self) -> bool {
        self.transitivity.is_transitive()
    }
}

fn prepare_all(families: &[Family]) -> Result<Vec<Prepared>> {
    families.par_iter().map(Prepared::build).collect()
}

fn speeds(a: f64, b: f64, c: f64) -> Result<SpeedTriple> {
    SpeedTriple::new(a, b, c)
}

fn exact_or_skip(
    p: &Prepared,
    s: &SpeedTriple,
    tie: TieRule,
    capacity: usize,
) -> Result<std::result::Result<CollisionReport, String>> {
    match collision_exact_with_capacity(&p.chain, s, tie, capacity) {
        Ok(r) => Ok(Ok(r)),
        Err(Error::CapacityExceeded { needed, capacity }) => {
            Ok(Err(format!("capacity: {needed} product states exceed {capacity}; use Monte Carlo")))
        }
        Err(e) => Err(e),
    }
}

/// Strict-rule probability at speeds `(1, 1, 0)` against 1/4 on transitive
/// chains. Also feeds the weak-rule evidence ledger.
pub fn transitive_suite(families: &[Family], capacity: usize) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("transitive");
    let s = speeds(1.0, 1.0, 0.0)?;
    report.add_speeds(s);
    let prepared = prepare_all(families)?;
    let results: Vec<Result<_>> = prepared
        .par_iter()
        .map(|p| {
            if !p.transitive() {
                return Ok(None);
            }
            exact_or_skip(p, &s, TieRule::Strict, capacity).map(Some)
        })
        .collect();
    for (p, r) in prepared.iter().zip(results) {
        report.chains.push(p.meta());
        let name = format!("quarter/{}", p.label);
        match r? {
            None => report.checks.push(Check::skip(name, claims::QUARTER, "hypothesis: not transitive")),
            Some(Err(reason)) => report.checks.push(Check::skip(name, claims::QUARTER, reason)),
            Some(Ok(c)) => {
                report.checks.push(Check::new(
                    name,
                    claims::QUARTER,
                    c.probability,
                    Relation::Ge,
                    0.25,
                    1e-10,
                    "exact",
                ));
                let weak = c.probability + c.start_breakdown.triple;
                report.estimates.push(row(format!("strict/{}", p.label), c.probability, "exact"));
                if p.reversible {
                    FloorEvidence::observe(&mut report.evidence, p.label.clone(), weak, 0.0);
                }
            }
        }
    }
    Ok(report)
}

fn row(label: String, value: f64, method: &str) -> EstimateRow {
    EstimateRow { label, value, std_err: 0.0, n_samples: 0, method: method.into() }
}

/// `c / (sqrt(1 + lz) + sqrt(ly + lz))^2` with `c = 1/4752`.
pub fn speed_lower_bound(ly: f64, lz: f64) -> f64 {
    let d = (1.0 + lz).sqrt() + (ly + lz).sqrt();
    (1.0 / 4752.0) / (d * d)
}

/// `(1/4) (1 - 2 lz / (1 + ly))`; informative only when positive.
pub fn linear_lower_bound(ly: f64, lz: f64) -> f64 {
    0.25 * (1.0 - 2.0 * lz / (1.0 + ly))
}

/// The default `(lambda_y, lambda_z)` grid for the speed bounds.
pub fn default_speed_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for ly in [0.0, 0.5, 1.0] {
        for lz in [0.0, 1.0, 4.0, 10.0, 20.0] {
            g.push((ly, lz));
        }
    }
    g
}

/// Strict-rule probability against both speed-dependent lower bounds, with
/// `lambda_x = 1`.
type SpeedCell = (f64, f64, Option<std::result::Result<CollisionReport, String>>);

pub fn speeds_suite(families: &[Family], grid: &[(f64, f64)], capacity: usize) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("speeds");
    let prepared = prepare_all(families)?;
    for p in &prepared {
        report.chains.push(p.meta());
        let cells: Vec<Result<SpeedCell>> = grid
            .par_iter()
            .map(|&(ly, lz)| {
                if !p.transitive() || ly > 1.0 {
                    return Ok((ly, lz, None));
                }
                Ok((ly, lz, Some(exact_or_skip(p, &speeds(1.0, ly, lz)?, TieRule::Strict, capacity)?)))
            })
            .collect();
        for cell in cells {
            let (ly, lz, outcome) = cell?;
            let tag = format!("{}/ly={ly},lz={lz}", p.label);
            let s = speeds(1.0, ly, lz)?;
            report.add_speeds(s);
            match outcome {
                None if !p.transitive() => report.checks.push(Check::skip(
                    format!("speed-bound/{tag}"),
                    claims::SPEED_BOUND,
                    "hypothesis: not transitive",
                )),
                None => report.checks.push(Check::skip(
                    format!("speed-bound/{tag}"),
                    claims::SPEED_BOUND,
                    "hypothesis: lambda_y <= 1",
                )),
                Some(Err(reason)) => {
                    report.checks.push(Check::skip(format!("speed-bound/{tag}"), claims::SPEED_BOUND, reason))
                }
                Some(Ok(c)) => {
                    report.estimates.push(row(format!("strict/{tag}"), c.probability, "exact"));
                    report.checks.push(Check::new(
                        format!("speed-bound/{tag}"),
                        claims::SPEED_BOUND,
                        c.probability,
                        Relation::Ge,
                        speed_lower_bound(ly, lz),
                        1e-10,
                        "exact",
                    ));
                    let lin = linear_lower_bound(ly, lz);
                    if lin > 0.0 {
                        report.checks.push(Check::new(
                            format!("linear-bound/{tag}"),
                            claims::LINEAR_BOUND,
                            c.probability,
                            Relation::Ge,
                            lin,
                            1e-10,
                            "exact",
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The `(lambda_y, lambda_z)` pairs used for the identity suite.
pub fn default_identity_speeds() -> Vec<(f64, f64)> {
    let vals = [0.0, 0.5, 1.0, 2.0];
    vals.iter().flat_map(|&a| vals.iter().map(move |&b| (a, b))).filter(|&(a, b)| a + b > 0.0).collect()
}

/// The path on three states, a reversible chain that is not transitive.
pub fn three_path() -> ChainSpec {
    ChainSpec::from_dense(&[vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 1.0, 0.0]])
        .expect("three-state path is a valid chain")
}

fn identity_grid(p: &Prepared, scale: f64) -> Result<Vec<f64>> {
    let h = hitting_moments(&p.chain)?;
    Ok(linear_grid(4.0 * h.t_hit / scale, 41))
}

/// Hitting time of the scaled walker against meeting time of Y and Z, all
/// start pairs, on every transitive reversible chain; plus a non-transitive
/// chain where the two laws must differ.
pub fn identity_suite(families: &[Family], pairs: &[(f64, f64)]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("identity");
    let prepared = prepare_all(families)?;
    for p in &prepared {
        report.chains.push(p.meta());
        let cells: Vec<Result<Option<(f64, f64, f64)>>> = pairs
            .par_iter()
            .map(|&(ly, lz)| {
                if !(p.transitive() && p.reversible) {
                    return Ok(None);
                }
                let grid = identity_grid(p, ly + lz)?;
                let t = identity_gaps(&p.chain, ly, lz, &grid)?;
                Ok(Some((ly, lz, t.max_gap)))
            })
            .collect();
        for (cell, &(ly, lz)) in cells.into_iter().zip(pairs) {
            let name = format!("identity/{}/ly={ly},lz={lz}", p.label);
            match cell? {
                None => {
                    report.checks.push(Check::skip(name, claims::IDENTITY, "hypothesis: transitive and reversible"))
                }
                Some((_, _, gap)) => report.checks.push(Check::new(
                    name,
                    claims::IDENTITY,
                    gap,
                    Relation::Le,
                    1e-8,
                    0.0,
                    "uniformization",
                )),
            }
        }
    }
    let path = Prepared::new(three_path())?;
    let grid = identity_grid(&path, 2.0)?;
    let gap = identity_gaps(&path.chain, 1.0, 1.0, &grid)?;
    report.chains.push(path.meta());
    report.checks.push(Check::new(
        "identity-fails/three-path/ly=1,lz=1",
        claims::IDENTITY_FAILS,
        gap.max_gap,
        Relation::Ge,
        1e-3,
        0.0,
        "uniformization",
    ));
    Ok(report)
}

/// Options for [`structural_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralOptions {
    pub thetas: Vec<f64>,
    /// `(lambda_y, lambda_z)` pairs for the meeting-time profiles.
    pub meeting_speeds: Vec<(f64, f64)>,
    pub residual_life_points: usize,
}

impl Default for StructuralOptions {
    fn default() -> Self {
        StructuralOptions {
            thetas: vec![1e-4, 1e-3, 1e-2, 1e-1],
            meeting_speeds: vec![(1.0, 0.0), (1.0, 1.0), (0.5, 2.0)],
            residual_life_points: 50,
        }
    }
}

/// Single-chain facts about hitting times of reversible chains, several
/// restricted to transitive ones.
pub fn structural_suite(families: &[Family], opts: &StructuralOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("structural");
    let prepared = prepare_all(families)?;
    let per_chain: Vec<Result<(Vec<Check>, Vec<String>)>> =
        prepared.par_iter().map(|p| structural_checks(p, opts)).collect();
    for (p, r) in prepared.iter().zip(per_chain) {
        report.chains.push(p.meta());
        let (checks, notes) = r?;
        report.checks.extend(checks);
        report.notes.extend(notes);
    }
    Ok(report)
}

fn structural_checks(p: &Prepared, opts: &StructuralOptions) -> Result<(Vec<Check>, Vec<String>)> {
    let mut out = Vec::new();
    let mut notes = Vec::new();
    let l = &p.label;
    if !p.reversible {
        out.push(Check::skip(format!("structural/{l}"), claims::REVERSIBLE_FAMILY, "hypothesis: not reversible"));
        return Ok((out, notes));
    }
    let c = &p.chain;
    let n = c.n();
    let h = hitting_moments(c)?;
    let sp = spectral_summary(c)?;
    if sp.t_rel_discrete.is_infinite() {
        notes.push(format!("{l}: -1 is an eigenvalue, so only the continuous-time relaxation time is finite"));
    }
    let scale = h.t_hit.max(1.0);

    if p.transitive() {
        let mut gap: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                gap = gap.max((h.expectations[x][y] - h.expectations[y][x]).abs());
            }
        }
        out.push(Check::new(
            format!("symmetry/{l}"),
            claims::SYMMETRY,
            gap,
            Relation::Le,
            1e-9,
            0.0,
            "fundamental matrix",
        ));
        out.push(Check::new(
            format!("pair-drift/{l}"),
            claims::PAIR_DRIFT,
            h.pair_residual(c),
            Relation::Le,
            1e-9,
            0.0,
            "fundamental matrix",
        ));
    } else {
        out.push(Check::skip(format!("symmetry/{l}"), claims::SYMMETRY, "hypothesis: not transitive"));
        out.push(Check::skip(format!("pair-drift/{l}"), claims::PAIR_DRIFT, "hypothesis: not transitive"));
    }
    out.push(Check::new(
        format!("hit-vs-stationary/{l}"),
        claims::THIT_TWICE,
        h.t_hit,
        Relation::Le,
        2.0 * h.t_star_hit,
        1e-9 * scale,
        "fundamental matrix",
    ));
    out.push(Check::new(
        format!("single-drift/{l}"),
        claims::SINGLE_DRIFT,
        h.generator_residual(c),
        Relation::Le,
        1e-10,
        0.0,
        "fundamental matrix",
    ));

    // mean residual life, every target
    let mut worst_drop: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for z in 0..n {
        let top = 4.0 * (h.from_stationary[z] + sp.t_rel_cont);
        let curve = residual_life_curve(c, z, &linear_grid(top, opts.residual_life_points), &sp)?;
        for w in curve.f.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        worst_excess = worst_excess.max(curve.sup() - curve.ceiling());
    }
    out.push(Check::new(
        format!("residual-life-monotone/{l}"),
        claims::RESIDUAL_MONOTONE,
        worst_drop,
        Relation::Le,
        0.0,
        1e-10 * scale,
        "killed spectrum",
    ));
    out.push(Check::new(
        format!("residual-life-ceiling/{l}"),
        claims::RESIDUAL_CEILING,
        worst_excess,
        Relation::Le,
        0.0,
        1e-8,
        "killed spectrum",
    ));

    let set = negative_set(c)?;
    out.push(Check::new(
        format!("negative-set-mass/{l}"),
        claims::NEGATIVE_SET,
        set.pi_a,
        Relation::Ge,
        0.5,
        1e-12,
        "spectral",
    ));
    let tail = negative_set_tail(c, &set, sp.t_rel_cont, &linear_grid(5.0 * sp.t_rel_cont, 41))?;
    out.push(Check::new(
        format!("negative-set-tail/{l}"),
        claims::NEGATIVE_SET,
        tail.worst_margin(),
        Relation::Ge,
        0.0,
        1e-12,
        "uniformization",
    ));

    if !p.transitive() {
        for name in ["small-time", "small-time-meeting"] {
            out.push(Check::skip(format!("{name}/{l}"), claims::SMALL_TIME, "hypothesis: not transitive"));
        }
        return Ok((out, notes));
    }
    for pt in small_time_profile(c, 0, &opts.thetas, &p.transitivity, &h)? {
        out.push(Check::new(
            format!("small-time/{l}/theta={:e}", pt.theta),
            claims::SMALL_TIME,
            pt.lhs - pt.err_bound,
            Relation::Le,
            pt.bound,
            0.0,
            "uniformization",
        ));
    }
    for &(ly, lz) in &opts.meeting_speeds {
        for (tag, a, b) in [("xz", 1.0, lz), ("yz", ly, lz)] {
            if a + b == 0.0 {
                continue;
            }
            let pts = meeting_small_time_profile(c, 0, a, b, &opts.thetas, &p.transitivity, &h)?;
            let ratio = pts.iter().map(|q| (q.lhs - q.err_bound).max(0.0) / q.bound).fold(0.0, f64::max);
            out.push(Check::new(
                format!("small-time-meeting/{l}/{tag}/ly={ly},lz={lz}"),
                claims::SMALL_TIME_MEETING,
                ratio,
                Relation::Le,
                1.0,
                0.0,
                "uniformization",
            ));
        }
    }
    Ok((out, notes))
}

/// Per-level data for the hypercube with geometric coordinate rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    pub k: usize,
    /// Worst start over the first `k` coordinates of
    /// `P[first k coordinates match the target before a later one flips]`.
    pub probability: f64,
    /// `(1 - eps)^k`.
    pub bound: f64,
}

/// Collision probabilities and per-level bounds on the hypercube with
/// geometric rates, where the weak-rule probability sits near 1/3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCheck {
    pub d: usize,
    pub eps: f64,
    pub per_k: Vec<LevelBound>,
    pub weak: f64,
    pub strict: f64,
    /// Standard error when the collision was estimated by Monte Carlo.
    pub std_err: f64,
    pub method: String,
    /// `1/3 + 2 d eps`.
    pub budget: f64,
}

/// Exact `min_start P[tau_k < sigma_{k+1}]`: the Laplace transform of the
/// time for the first `k` coordinates to reach the target, evaluated at the
/// total flip rate of the coordinates above `k`.
pub fn level_probability(d: usize, eps: f64, k: usize) -> Result<f64> {
    if k == 0 || k >= d {
        return Err(Error::param(format!("level k must be in 1..{d}, got {k}")));
    }
    let q = hypercube_rates(d, Some(eps))?;
    let killing: f64 = q[k..].iter().sum();
    let own: f64 = q[..k].iter().sum();
    let m = 1usize << k;
    // unknowns are the nonzero difference patterns 1..m
    let mut sys =
        SparseSystem { diag: vec![own + killing; m - 1], off: vec![Vec::new(); m - 1], rhs: vec![0.0; m - 1] };
    for v in 1..m {
        for (i, &qi) in q[..k].iter().enumerate() {
            let w = v ^ (1 << i);
            if w == 0 {
                sys.rhs[v - 1] += qi;
            } else {
                sys.off[v - 1].push((w - 1, qi));
            }
        }
    }
    let (h, _) = sys.solve(2000, 1e-15)?;
    Ok(h.into_iter().fold(1.0, f64::min))
}

pub fn sharpness_suite(
    d: usize,
    eps: f64,
    capacity: usize,
    samples: usize,
    seed: u64,
) -> Result<(SharpnessCheck, VerificationReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps must be in (0, 1)"));
    }
    let mut report = VerificationReport::new("sharpness");
    let chain = build_hypercube(d, Some(eps))?;
    let p = Prepared::new(chain)?;
    report.chains.push(p.meta());
    let s = speeds(1.0, 1.0, 0.0)?;
    report.add_speeds(s);
    let label = p.label.clone();
    let budget = 1.0 / 3.0 + 2.0 * d as f64 * eps;

    let (weak, strict, se, method) = match collision_exact_with_capacity(&p.chain, &s, TieRule::Weak, capacity) {
        Ok(w) => (w.probability, w.probability - w.start_breakdown.triple, 0.0, "exact"),
        Err(Error::CapacityExceeded { .. }) => {
            report.seed = Some(seed);
            report.notes.push(format!("{label}: 8^d exceeds capacity, collision estimated by Monte Carlo"));
            let w = estimate_collision(&p.chain, &s, TieRule::Weak, samples, seed, None)?;
            let st = estimate_collision(&p.chain, &s, TieRule::Strict, samples, seed, None)?;
            (w.mean, st.mean, w.std_err, "monte-carlo")
        }
        Err(e) => return Err(e),
    };
    report.checks.push(Check::new(
        format!("near-third/{label}"),
        claims::SHARPNESS,
        weak,
        Relation::Le,
        budget,
        if se > 0.0 { 3.5 * se } else { 1e-9 },
        method,
    ));
    report.estimates.push(EstimateRow {
        label: format!("weak/{label}"),
        value: weak,
        std_err: se,
        n_samples: if se > 0.0 { samples } else { 0 },
        method: method.into(),
    });
    if p.reversible {
        FloorEvidence::observe(&mut report.evidence, label.clone(), weak, se);
    }

    let mut per_k = Vec::new();
    for k in 1..d {
        let probability = level_probability(d, eps, k)?;
        let bound = (1.0 - eps).powi(k as i32);
        report.checks.push(Check::new(
            format!("level/{label}/k={k}"),
            claims::LEVEL,
            probability,
            Relation::Ge,
            bound,
            1e-12,
            "exact",
        ));
        per_k.push(LevelBound { k, probability, bound });
    }
    let check = SharpnessCheck { d, eps, per_k, weak, strict, std_err: se, method: method.into(), budget };
    Ok((check, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_one_closed_form() {
        // k = 1: flip rate q1 against the rest, so the worst start gives q1 / (q1 + S) = q1
        let (d, eps) = (4, 0.2);
        let q = hypercube_rates(d, Some(eps)).unwrap();
        assert!((level_probability(d, eps, 1).unwrap() - q[0]).abs() < 1e-14);
    }

    /// Simulates the first `d` coordinates directly.
    #[test]
    fn level_matches_simulation() {
        let (d, eps, k) = (4, 0.3, 2);
        let q = hypercube_rates(d, Some(eps)).unwrap();
        let total: f64 = q.iter().sum();
        let mut r = ChaCha8Rng::seed_from_u64(21);
        let runs = 100_000;
        let mut wins = 0;
        for _ in 0..runs {
            let mut diff = (1usize << k) - 1; // worst start: every low coordinate differs
            loop {
                if diff == 0 {
                    wins += 1;
                    break;
                }
                let u = r.random::<f64>() * total;
                let mut acc = 0.0;
                let j = q.iter().position(|&qj| {
                    acc += qj;
                    u < acc
                });
                match j {
                    Some(j) if j < k => diff ^= 1 << j,
                    _ => break,
                }
            }
        }
        let p = wins as f64 / runs as f64;
        let se = (p * (1.0 - p) / runs as f64).sqrt();
        let exact = level_probability(d, eps, k).unwrap();
        assert!((p - exact).abs() <= 3.5 * se, "{p} vs {exact}");
    }

    #[test]
    fn bounds_at_zero_speed_z() {
        assert!((linear_lower_bound(1.0, 0.0) - 0.25).abs() < 1e-15);
        assert!((speed_lower_bound(0.0, 0.0) - 1.0 / 4752.0).abs() < 1e-18);
    }

    #[test]
    fn transitive_small() {
        let fams = Family::parse_list("cycle:3..5,complete:2..4,hypercube:2,trap:2@12").unwrap();
        let r = transitive_suite(&fams, 300_000).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert_eq!(r.counts().2, 1, "trap graph is skipped");
        assert!(r.evidence.as_ref().unwrap().consistent);
    }

    #[test]
    fn identity_detects_nontransitive() {
        let r = identity_suite(&Family::parse_list("cycle:5").unwrap(), &[(1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert!(r.checks.last().unwrap().name.contains("three-path"));
    }

    #[test]
    fn structural_gates() {
        let fams = Family::parse_list("cycle:4,trap:2@12,directed-cycle:4").unwrap();
        let r = structural_suite(&fams, &StructuralOptions::default()).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert!(r.notes.iter().any(|n| n.starts_with("cycle(n=4)")));
    }

    #[test]
    fn sharpness_cube() {
        let (s, r) = sharpness_suite(3, 0.01, 300_000, 1000, 0).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert!(s.weak <= 1.0 / 3.0 + 0.06);
        assert_eq!(s.per_k.len(), 2);
    }
}
