use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{run_rng, Categorical, StepSampler, Walkers};
use crate::chain::{check_reversible, ChainSpec, SpeedTriple, DEFAULT_REVERSIBILITY_TOL};
use crate::collision::{classify, ProductClass, TieRule};
use crate::error::{Error, Result};
use crate::exact::{hitting_moments, DENSE_CAPACITY};

/// Largest tolerated share of runs stopped by the time cap.
pub const DEFAULT_CENSOR_CAP: f64 = 1e-3;
/// Default time cap as a multiple of `t*_hit`.
pub const DEFAULT_T_MAX_MULT: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Good,
    Bad,
    /// Started at `x = y = z`.
    Tie0,
    Censored,
}

/// Diagonal occupation of `(X, Y)` over `[0, tau]`, where `tau` is the first
/// time `X = Y` at or after the first bad meeting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    /// `diagonal[x]` = time spent with `X = Y = x`.
    pub diagonal: Vec<f64>,
    pub tau: f64,
    /// Time with `X = Y` before the first bad meeting.
    pub t_before_bad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOutcome {
    pub winner: Winner,
    pub t_good: Option<f64>,
    pub t_bad: Option<f64>,
    pub occupation: Option<Occupation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RaceStart {
    /// Each walker drawn independently from `pi`.
    Stationary,
    At(usize, usize, usize),
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
    /// Runs that entered the mean.
    pub n_used: usize,
    pub seed: u64,
    pub censored: usize,
    pub censored_fraction: f64,
    pub t_max: f64,
}

impl McEstimate {
    pub(crate) fn from_values(values: &[Option<f64>], seed: u64, t_max: f64, cap: f64) -> Result<Self> {
        let used: Vec<f64> = values.iter().flatten().copied().collect();
        let censored = values.len() - used.len();
        let censored_fraction = censored as f64 / values.len().max(1) as f64;
        if used.is_empty() || censored_fraction > cap {
            return Err(Error::InconclusiveEstimate(format!(
                "{censored} of {} runs hit the time cap {t_max:.3e} (allowed fraction {cap:e})",
                values.len()
            )));
        }
        let m = used.len() as f64;
        let mean = used.iter().sum::<f64>() / m;
        let var = if used.len() > 1 { used.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        Ok(McEstimate {
            mean,
            std_err: (var / m).sqrt(),
            n_samples: values.len(),
            n_used: used.len(),
            seed,
            censored,
            censored_fraction,
            t_max,
        })
    }

    /// Binomial version: `std_err = sqrt(p (1 - p) / n)`.
    pub(crate) fn binomial(values: &[Option<f64>], seed: u64, t_max: f64, cap: f64) -> Result<Self> {
        let mut e = Self::from_values(values, seed, t_max, cap)?;
        e.std_err = (e.mean * (1.0 - e.mean) / e.n_used as f64).max(0.0).sqrt();
        Ok(e)
    }

    /// `|mean - target|` in standard errors; infinite when the error is zero
    /// and the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }
}

/// `t*_hit = max_z E_pi[tau_z]`, exact when the dense solver fits. Larger
/// reversible chains get an upper bound from effective resistance; returns
/// the value and whether it is exact.
pub fn t_star_hit_or_bound(chain: &ChainSpec) -> Result<(f64, bool)> {
    if chain.n() <= DENSE_CAPACITY {
        return Ok((hitting_moments(chain)?.t_star_hit, true));
    }
    if !check_reversible(chain, DEFAULT_REVERSIBILITY_TOL)?.reversible {
        return Err(Error::CapacityExceeded { needed: chain.n(), capacity: DENSE_CAPACITY });
    }
    Ok((resistance_diameter_bound(chain)?, false))
}

/// `E_x tau_z` is at most the commute time, which equals the effective
/// resistance under conductances `pi(x) P(x, y)`; any path's resistance
/// bounds that, and twice the eccentricity of state 0 bounds every pair.
fn resistance_diameter_bound(chain: &ChainSpec) -> Result<f64> {
    let pi = &chain.stationary()?.pi;
    let n = chain.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(Reverse((OrdF64(0.0), 0usize)));
    while let Some(Reverse((OrdF64(d), x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, p) in chain.row(x) {
            let nd = d + 1.0 / (pi[x] * p);
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((OrdF64(nd), y)));
            }
        }
    }
    Ok(2.0 * dist.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// `mult * t*_hit` (or its resistance bound).
pub fn default_t_max(chain: &ChainSpec, mult: f64) -> Result<f64> {
    if !(mult > 0.0) {
        return Err(Error::param("t_max multiplier must be positive"));
    }
    Ok(mult * t_star_hit_or_bound(chain)?.0)
}

/// Shared state for many runs on one chain.
pub(crate) struct RaceSim<'a> {
    pub walkers: Walkers<'a>,
    pub start: Categorical,
}

impl<'a> RaceSim<'a> {
    pub fn new(step: &'a StepSampler, chain: &ChainSpec, speeds: &SpeedTriple) -> Result<Self> {
        Ok(RaceSim {
            walkers: Walkers::new(step, &speeds.as_array()),
            start: Categorical::new(&chain.stationary()?.pi),
        })
    }

    pub fn draw_start(&self, start: RaceStart, rng: &mut impl Rng) -> [usize; 3] {
        match start {
            RaceStart::Stationary => [self.start.sample(rng), self.start.sample(rng), self.start.sample(rng)],
            RaceStart::At(x, y, z) => [x, y, z],
        }
    }

    /// Runs until the state leaves the transient class or time passes `t_max`.
    /// Returns the time and class at exit (`Transient` means censored).
    pub fn run_to_absorption(&self, pos: &mut [usize; 3], t_max: f64, rng: &mut impl Rng) -> (f64, ProductClass) {
        let mut t = 0.0;
        loop {
            let class = classify(pos[0], pos[1], pos[2]);
            if class != ProductClass::Transient {
                return (t, class);
            }
            t += self.walkers.hold(rng);
            if t > t_max {
                return (t_max, ProductClass::Transient);
            }
            self.walkers.move_one(pos, rng);
        }
    }

    pub fn race(&self, start: RaceStart, t_max: f64, rng: &mut impl Rng) -> TrajectoryOutcome {
        let mut pos = self.draw_start(start, rng);
        if pos[0] == pos[1] && pos[1] == pos[2] {
            return TrajectoryOutcome { winner: Winner::Tie0, t_good: Some(0.0), t_bad: Some(0.0), occupation: None };
        }
        let (t, class) = self.run_to_absorption(&mut pos, t_max, rng);
        let (winner, t_good, t_bad) = match class {
            ProductClass::Good => (Winner::Good, Some(t), None),
            ProductClass::Bad => (Winner::Bad, None, Some(t)),
            ProductClass::Transient => (Winner::Censored, None, None),
        };
        TrajectoryOutcome { winner, t_good, t_bad, occupation: None }
    }
}

fn check_start(chain: &ChainSpec, start: RaceStart) -> Result<()> {
    if let RaceStart::At(x, y, z) = start {
        if x.max(y).max(z) >= chain.n() {
            return Err(Error::param("start state out of range"));
        }
    }
    Ok(())
}

/// One trajectory, deterministic in `seed`.
pub fn simulate_race(
    chain: &ChainSpec,
    speeds: &SpeedTriple,
    start: RaceStart,
    seed: u64,
    t_max: f64,
) -> Result<TrajectoryOutcome> {
    if !(t_max > 0.0) {
        return Err(Error::param("t_max must be positive"));
    }
    check_start(chain, start)?;
    let step = StepSampler::new(chain);
    let sim = RaceSim::new(&step, chain, speeds)?;
    Ok(sim.race(start, t_max, &mut run_rng(seed, 0)))
}

/// Frequency of X meeting Y before either meets Z, from the product
/// stationary start. `t_max = None` uses the default cap.
pub fn estimate_collision(
    chain: &ChainSpec,
    speeds: &SpeedTriple,
    tie_rule: TieRule,
    n_samples: usize,
    seed: u64,
    t_max: Option<f64>,
) -> Result<McEstimate> {
    estimate_collision_from(chain, speeds, tie_rule, RaceStart::Stationary, n_samples, seed, t_max, DEFAULT_CENSOR_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_collision_from(
    chain: &ChainSpec,
    speeds: &SpeedTriple,
    tie_rule: TieRule,
    start: RaceStart,
    n_samples: usize,
    seed: u64,
    t_max: Option<f64>,
    censor_cap: f64,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    check_start(chain, start)?;
    let t_max = match t_max {
        Some(t) if t > 0.0 => t,
        Some(_) => return Err(Error::param("t_max must be positive")),
        None => default_t_max(chain, DEFAULT_T_MAX_MULT)?,
    };
    let step = StepSampler::new(chain);
    let sim = RaceSim::new(&step, chain, speeds)?;
    let values: Vec<Option<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|run| {
            let out = sim.race(start, t_max, &mut run_rng(seed, run));
            match out.winner {
                Winner::Good => Some(1.0),
                Winner::Bad => Some(0.0),
                Winner::Tie0 => Some(if tie_rule == TieRule::Weak { 1.0 } else { 0.0 }),
                Winner::Censored => None,
            }
        })
        .collect();
    McEstimate::binomial(&values, seed, t_max, censor_cap)
}
