use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, Transitivity};
use crate::error::{Error, Result};
use crate::exact::{
    hitting_survival, negative_set, negative_set_at, require_reversible, survival_on_grid, CurveKind,
    DistributionCurve, HittingSummary, SurvivalTable,
};

/// Survival of the meeting time of two walkers with speeds `lambda_a`,
/// `lambda_b`, for every start pair (indexed `a*n + b`).
pub fn meeting_survival(chain: &ChainSpec, lambda_a: f64, lambda_b: f64, grid: &[f64]) -> Result<SurvivalTable> {
    for s in [lambda_a, lambda_b] {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::param(format!("speed must be finite and >= 0, got {s}")));
        }
    }
    let n = chain.n();
    let alive: Vec<bool> = (0..n * n).map(|v| v / n != v % n).collect();
    let rate = lambda_a + lambda_b;
    if rate == 0.0 {
        return survival_on_grid(&alive, 0.0, grid, |u, out| out.copy_from_slice(u));
    }
    let (wa, wb) = (lambda_a / rate, lambda_b / rate);
    survival_on_grid(&alive, rate, grid, |u, out| {
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                if wa > 0.0 {
                    s += wa * chain.row(a).iter().map(|&(a2, p)| p * u[a2 * n + b]).sum::<f64>();
                }
                if wb > 0.0 {
                    s += wb * chain.row(b).iter().map(|&(b2, p)| p * u[a * n + b2]).sum::<f64>();
                }
                out[a * n + b] = s;
            }
        }
    })
}

/// CDF of the first time two independent walkers occupy the same state.
pub fn meeting_cdf(
    chain: &ChainSpec,
    lambda_a: f64,
    lambda_b: f64,
    a0: usize,
    b0: usize,
    grid: &[f64],
) -> Result<DistributionCurve> {
    let n = chain.n();
    if a0 >= n || b0 >= n {
        return Err(Error::param("start state out of range"));
    }
    if a0 != b0 && lambda_a == 0.0 && lambda_b == 0.0 {
        return Err(Error::DegenerateNoMeeting);
    }
    let table = meeting_survival(chain, lambda_a, lambda_b, grid)?;
    Ok(DistributionCurve {
        times: table.times,
        values: table.survival.iter().map(|s| 1.0 - s[a0 * n + b0]).collect(),
        err_bound: table.err_bound,
        kind: CurveKind::Meeting,
        speed_scale: lambda_a + lambda_b,
    })
}

/// Distance between the law of `tau_z / (lambda_y + lambda_z)` from `x` and
/// the law of the meeting time of walkers started at `(x, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityGap {
    pub sup_gap: f64,
    pub grid: Vec<f64>,
    pub pair: (usize, usize),
    pub speeds: (f64, f64),
    pub err_bound: f64,
}

pub fn identity_gap(
    chain: &ChainSpec,
    x: usize,
    z: usize,
    lambda_y: f64,
    lambda_z: f64,
    grid: &[f64],
) -> Result<IdentityGap> {
    let all = identity_gaps(chain, lambda_y, lambda_z, grid)?;
    let n = chain.n();
    if x >= n || z >= n {
        return Err(Error::param("state out of range"));
    }
    Ok(IdentityGap {
        sup_gap: all.gaps[x * n + z],
        grid: grid.to_vec(),
        pair: (x, z),
        speeds: (lambda_y, lambda_z),
        err_bound: all.err_bound,
    })
}

/// Identity gaps for every pair at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityGapTable {
    /// `gaps[x*n + z]`.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub worst_pair: (usize, usize),
    pub speeds: (f64, f64),
    pub err_bound: f64,
}

pub fn identity_gaps(chain: &ChainSpec, lambda_y: f64, lambda_z: f64, grid: &[f64]) -> Result<IdentityGapTable> {
    let scale = lambda_y + lambda_z;
    if !(scale > 0.0) {
        return Err(Error::param("identity needs lambda_y + lambda_z > 0"));
    }
    require_reversible(chain)?;
    let n = chain.n();
    let meet = meeting_survival(chain, lambda_y, lambda_z, grid)?;
    let mut gaps = vec![0.0; n * n];
    let mut err = meet.err_bound;
    for z in 0..n {
        let hit = hitting_survival(chain, &[z], scale, grid)?;
        err = err.max(meet.err_bound + hit.err_bound);
        for x in 0..n {
            gaps[x * n + z] =
                (0..grid.len()).map(|j| (hit.survival[j][x] - meet.survival[j][x * n + z]).abs()).fold(0.0, f64::max);
        }
    }
    let (worst, &max_gap) = gaps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("n >= 2");
    Ok(IdentityGapTable {
        gaps,
        max_gap,
        worst_pair: (worst / n, worst % n),
        speeds: (lambda_y, lambda_z),
        err_bound: err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingSmallTimePoint {
    pub theta: f64,
    /// `(1/pi(A_x)) sum_{z in A_x} pi(z) P_(x,z)(M <= theta t_hit)`.
    pub lhs: f64,
    /// `6 sqrt((lambda_a + lambda_b) theta)`.
    pub bound: f64,
    pub err_bound: f64,
}

impl MeetingSmallTimePoint {
    pub fn holds(&self) -> bool {
        self.lhs - self.err_bound <= self.bound
    }
}

/// Small-time meeting probabilities averaged over the nonpositive set of
/// `x`: the first walker (speed `lambda_a`) starts at `x`, the second
/// (`lambda_b`) at `z`.
pub fn meeting_small_time_profile(
    chain: &ChainSpec,
    x: usize,
    lambda_a: f64,
    lambda_b: f64,
    thetas: &[f64],
    transitivity: &Transitivity,
    hitting: &HittingSummary,
) -> Result<Vec<MeetingSmallTimePoint>> {
    if thetas.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::param("theta must be positive"));
    }
    let set = negative_set(chain)?;
    let a_x = negative_set_at(&set, transitivity, x)?;
    let pi = &chain.stationary()?.pi;
    let pi_a: f64 = a_x.iter().map(|&z| pi[z]).sum();
    let n = chain.n();
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
    let grid: Vec<f64> = order.iter().map(|&i| thetas[i] * hitting.t_hit).collect();
    let rate = lambda_a + lambda_b;
    let mut lhs = vec![0.0; thetas.len()];
    let mut err = 0.0;
    if rate > 0.0 {
        let table = meeting_survival(chain, lambda_a, lambda_b, &grid)?;
        err = table.err_bound;
        for &z in &a_x {
            for (j, &i) in order.iter().enumerate() {
                lhs[i] += pi[z] * (1.0 - table.survival[j][x * n + z]) / pi_a;
            }
        }
    }
    Ok(thetas
        .iter()
        .zip(lhs)
        .map(|(&theta, lhs)| MeetingSmallTimePoint { theta, lhs, bound: 6.0 * (rate * theta).sqrt(), err_bound: err })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube};
    use crate::exact::{hitting_cdf, linear_grid};

    fn path3() -> ChainSpec {
        ChainSpec::from_dense(&[vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn two_states_meet_at_first_jump() {
        let grid = linear_grid(5.0, 26);
        let c = meeting_cdf(&build_complete(2).unwrap(), 1.0, 1.0, 0, 1, &grid).unwrap();
        for (t, v) in grid.iter().zip(&c.values) {
            assert!((v - (1.0 - (-2.0 * t).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn already_met_and_degenerate() {
        let k = build_complete(4).unwrap();
        let c = meeting_cdf(&k, 0.0, 0.0, 2, 2, &[0.0, 1.0]).unwrap();
        assert_eq!(c.values, vec![1.0, 1.0]);
        assert!(matches!(meeting_cdf(&k, 0.0, 0.0, 1, 2, &[1.0]), Err(Error::DegenerateNoMeeting)));
    }

    #[test]
    fn frozen_partner_is_hitting() {
        let n = 6;
        let k = build_complete(n).unwrap();
        let grid = linear_grid(30.0, 31);
        let m = meeting_cdf(&k, 1.0, 0.0, 0, 3, &grid).unwrap();
        for (t, v) in grid.iter().zip(&m.values) {
            assert!((v - (1.0 - (-t / (n - 1) as f64).exp())).abs() < 1e-12);
        }
        let c = build_cycle(7, false).unwrap();
        let m = meeting_cdf(&c, 1.7, 0.0, 1, 4, &grid).unwrap();
        let h = hitting_cdf(&c, 1, 4, 1.7, &grid).unwrap();
        assert!(m.sup_distance(&h) <= 2e-10);
    }

    #[test]
    fn identity_holds_on_cube() {
        let c = build_hypercube(3, None).unwrap();
        let grid = linear_grid(30.0, 61);
        let t = identity_gaps(&c, 1.0, 1.0, &grid).unwrap();
        assert!(t.max_gap <= 1e-8, "{}", t.max_gap);
    }

    #[test]
    fn identity_with_frozen_y() {
        let c = build_complete(2).unwrap();
        let grid = linear_grid(6.0, 13);
        let g = identity_gap(&c, 0, 1, 1.0, 0.0, &grid).unwrap();
        assert!(g.sup_gap < 1e-12);
        let h = hitting_cdf(&c, 0, 1, 1.0, &grid).unwrap();
        for (t, v) in grid.iter().zip(&h.values) {
            assert!((v - (1.0 - (-t).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_fails_off_transitive() {
        let grid = linear_grid(10.0, 101);
        let g = identity_gap(&path3(), 0, 2, 1.0, 1.0, &grid).unwrap();
        assert!(g.sup_gap > 1e-3, "{}", g.sup_gap);
    }

    #[test]
    fn zero_scale_rejected() {
        assert!(matches!(identity_gap(&path3(), 0, 2, 0.0, 0.0, &[1.0]), Err(Error::InvalidParameter(_))));
    }
}
