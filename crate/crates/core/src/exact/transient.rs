//! Transient survival probabilities by uniformization.
//!
//! For a generator `Q` killed on a target set, the survival vector
//! `u(t) = exp(tQ) 1` is advanced between grid times by
//! `u(t + h) = sum_k Pois(k; rate*h) K^k u(t)` with `K = I + Q/rate`
//! substochastic. `K` is a contraction in the max norm, so the error of each
//! step is bounded by the Poisson mass left out, and the error of a grid
//! value by the sum of the steps leading to it.

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

/// Longest Poisson mean handled in one step; longer steps are split.
const MAX_STEP_MEAN: f64 = 256.0;
/// Poisson tail allowed per step.
const STEP_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Hitting,
    Meeting,
}

/// A CDF sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Bound on the truncation error of every value.
    pub err_bound: f64,
    pub kind: CurveKind,
    pub speed_scale: f64,
}

impl DistributionCurve {
    pub fn at(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Largest pointwise difference to another curve on the same grid.
    pub fn sup_distance(&self, other: &DistributionCurve) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Survival probabilities for every start state at every grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTable {
    pub times: Vec<f64>,
    /// `survival[j][v]`: probability of not yet being absorbed at `times[j]`
    /// when started from `v`.
    pub survival: Vec<Vec<f64>>,
    pub err_bound: f64,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param("time grid must contain finite nonnegative values"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("time grid must be nondecreasing"));
    }
    Ok(())
}

/// Run the uniformized recursion. `kernel(u, out)` must write `K u` for the
/// full state vector; entries of dead states are zeroed afterwards.
pub(crate) fn survival_on_grid(
    alive: &[bool],
    rate: f64,
    grid: &[f64],
    kernel: impl Fn(&[f64], &mut [f64]),
) -> Result<SurvivalTable> {
    check_grid(grid)?;
    let dim = alive.len();
    let mut u: Vec<f64> = alive.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let mut term = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let mut acc = vec![0.0; dim];
    let mut err = 0.0;
    let mut now = 0.0;
    let mut survival = Vec::with_capacity(grid.len());
    for &t in grid {
        let span = t - now;
        if span > 0.0 && rate > 0.0 {
            let pieces = (rate * span / MAX_STEP_MEAN).ceil().max(1.0) as usize;
            let mean = rate * span / pieces as f64;
            for _ in 0..pieces {
                err += poisson_step(&mut u, &mut term, &mut next, &mut acc, alive, mean, &kernel);
            }
        }
        now = t;
        survival.push(u.clone());
    }
    Ok(SurvivalTable { times: grid.to_vec(), survival, err_bound: err })
}

/// One step `u <- sum_k Pois(k; mean) K^k u`. Returns the tail bound.
fn poisson_step(
    u: &mut Vec<f64>,
    term: &mut Vec<f64>,
    next: &mut Vec<f64>,
    acc: &mut Vec<f64>,
    alive: &[bool],
    mean: f64,
    kernel: &impl Fn(&[f64], &mut [f64]),
) -> f64 {
    term.copy_from_slice(u);
    let mut log_w = -mean;
    let w0 = log_w.exp();
    for (a, &v) in acc.iter_mut().zip(term.iter()) {
        *a = w0 * v;
    }
    let ln_mean = mean.ln();
    let mut k = 0usize;
    let tail = loop {
        // the weights decrease geometrically once k + 1 > mean, so the tail
        // after k is at most w_{k+1} / (1 - mean/(k+2))
        let next_log = log_w + ln_mean - ((k + 1) as f64).ln();
        if (k + 1) as f64 > mean {
            let ratio = mean / (k + 2) as f64;
            let bound = next_log.exp() / (1.0 - ratio);
            if bound <= STEP_TAIL {
                break bound;
            }
        }
        kernel(term, next);
        for (v, &a) in next.iter_mut().zip(alive) {
            if !a {
                *v = 0.0;
            }
        }
        std::mem::swap(term, next);
        k += 1;
        log_w = next_log;
        let w = log_w.exp();
        for (a, &v) in acc.iter_mut().zip(term.iter()) {
            *a += w * v;
        }
    };
    std::mem::swap(u, acc);
    tail
}

fn single_chain_kernel(chain: &ChainSpec) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |u, out| chain.apply(u, out)
}

/// Survival table of the hitting time of `targets` for a walker of the given
/// speed, for every start state.
pub fn hitting_survival(chain: &ChainSpec, targets: &[usize], speed: f64, grid: &[f64]) -> Result<SurvivalTable> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::param(format!("speed must be positive, got {speed}")));
    }
    if targets.is_empty() || targets.iter().any(|&z| z >= chain.n()) {
        return Err(Error::param("target set must be non-empty and in range"));
    }
    let mut alive = vec![true; chain.n()];
    for &z in targets {
        alive[z] = false;
    }
    survival_on_grid(&alive, speed, grid, single_chain_kernel(chain))
}

/// CDF of the hitting time of `z` from `x` for a walker of the given speed.
pub fn hitting_cdf(chain: &ChainSpec, x: usize, z: usize, speed: f64, grid: &[f64]) -> Result<DistributionCurve> {
    if x >= chain.n() {
        return Err(Error::param(format!("start state {x} out of range")));
    }
    let table = hitting_survival(chain, &[z], speed, grid)?;
    Ok(DistributionCurve {
        times: table.times,
        values: table.survival.iter().map(|s| 1.0 - s[x]).collect(),
        err_bound: table.err_bound,
        kind: CurveKind::Hitting,
        speed_scale: speed,
    })
}

/// `n` evenly spaced times from 0 to `t_max` inclusive.
pub fn linear_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t_max];
    }
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle};
    use crate::exact::hitting_moments;

    #[test]
    fn two_state_is_exponential() {
        let k2 = build_complete(2).unwrap();
        let grid = linear_grid(8.0, 33);
        let c = hitting_cdf(&k2, 0, 1, 1.0, &grid).unwrap();
        for (t, v) in grid.iter().zip(&c.values) {
            assert!((v - (1.0 - (-t).exp())).abs() < 1e-12);
        }
        assert!(c.err_bound <= 1e-10);
    }

    #[test]
    fn complete_graph_rank_one() {
        let n = 6;
        let kn = build_complete(n).unwrap();
        let grid = linear_grid(40.0, 21);
        let c = hitting_cdf(&kn, 1, 4, 1.0, &grid).unwrap();
        for (t, v) in grid.iter().zip(&c.values) {
            assert!((v - (1.0 - (-t / (n - 1) as f64).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn already_hit() {
        let c = hitting_cdf(&build_cycle(5, false).unwrap(), 2, 2, 1.0, &[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(c.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn speed_scales_time() {
        let c = build_cycle(7, false).unwrap();
        let fast = hitting_cdf(&c, 0, 3, 2.5, &[0.0, 0.4, 2.0, 8.0]).unwrap();
        let slow = hitting_cdf(&c, 0, 3, 1.0, &[0.0, 1.0, 5.0, 20.0]).unwrap();
        assert!(fast.sup_distance(&slow) < 1e-12);
    }

    #[test]
    fn mean_from_survival_integral() {
        // E[tau] = int_0^inf P(tau > t) dt, integrated by Simpson on a long grid
        let c = build_cycle(6, false).unwrap();
        let h = hitting_moments(&c).unwrap();
        let grid = linear_grid(400.0, 4001);
        let table = hitting_survival(&c, &[0], 1.0, &grid).unwrap();
        let dt = grid[1] - grid[0];
        let s: Vec<f64> = table.survival.iter().map(|v| v[3]).collect();
        let mut integral = s[0] + s[s.len() - 1];
        for (i, v) in s.iter().enumerate().take(s.len() - 1).skip(1) {
            integral += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        integral *= dt / 3.0;
        assert!((integral - h.expectations[3][0]).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn cdf_satisfies_backward_equation() {
        // d/dt P_v(tau <= t) = sum_w q(v,w) (P_w(tau<=t) - P_v(tau<=t)) for v off the target
        let c = build_cycle(8, false).unwrap();
        let h = 1e-3;
        let base = [1.0, 3.0, 7.0];
        let mut grid = Vec::new();
        for t in base {
            grid.extend([t - h, t, t + h]);
        }
        let table = hitting_survival(&c, &[0], 1.0, &grid).unwrap();
        for (i, _) in base.iter().enumerate() {
            let (lo, mid, hi) = (&table.survival[3 * i], &table.survival[3 * i + 1], &table.survival[3 * i + 2]);
            for v in 1..8 {
                let deriv = -(hi[v] - lo[v]) / (2.0 * h);
                let rhs: f64 = c.row(v).iter().map(|&(w, p)| p * ((1.0 - mid[w]) - (1.0 - mid[v]))).sum();
                assert!((deriv - rhs).abs() < 1e-6, "v={v} {deriv} vs {rhs}");
            }
        }
    }

    #[test]
    fn grid_validation() {
        let c = build_complete(3).unwrap();
        assert!(hitting_cdf(&c, 0, 1, 1.0, &[1.0, 0.5]).is_err());
        assert!(hitting_cdf(&c, 0, 1, 0.0, &[1.0]).is_err());
        assert!(hitting_cdf(&c, 0, 1, -1.0, &[1.0]).is_err());
    }
}
