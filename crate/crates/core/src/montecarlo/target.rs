use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::race::{McEstimate, DEFAULT_CENSOR_CAP, DEFAULT_T_MAX_MULT};
use super::sampler::{run_rng, StepSampler};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::exact::{hitting_moments, require_reversible};

/// The trajectory a walker chases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetPath {
    /// `h_t = z` for all `t`.
    Frozen { state: usize },
    /// One speed-1 sample path of the chain from `start`, fixed by `seed`
    /// and shared by every run.
    Random { start: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingTargetReport {
    pub start: usize,
    pub target: TargetPath,
    pub estimate: McEstimate,
    pub t_star_hit: f64,
    /// `11 t*_hit`.
    pub bound: f64,
    /// `E_x[tau_z]` when the target is frozen.
    pub exact_static: Option<f64>,
    /// `estimate <= bound + 3.5 SE`.
    pub within_bound: bool,
}

/// Piecewise-constant path: `jumps[k] = (time, state)`, starting at time 0.
fn sample_path(step: &StepSampler, start: usize, seed: u64, t_max: f64) -> Vec<(f64, usize)> {
    // the path gets its own stream so it never coincides with a walker's
    let mut rng = run_rng(seed, u64::MAX);
    let mut path = vec![(0.0, start)];
    let (mut t, mut x) = (0.0, start);
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e;
        if t > t_max {
            return path;
        }
        x = step.step(x, &mut rng);
        path.push((t, x));
    }
}

fn chase(step: &StepSampler, x0: usize, path: &[(f64, usize)], t_max: f64, rng: &mut impl Rng) -> Option<f64> {
    let (mut t, mut x, mut k) = (0.0, x0, 0);
    loop {
        if x == path[k].1 {
            return Some(t);
        }
        let e: f64 = rng.sample(Exp1);
        let next_x = t + e;
        let next_h = path.get(k + 1).map_or(f64::INFINITY, |p| p.0);
        if next_x.min(next_h) > t_max {
            return None;
        }
        if next_x < next_h {
            t = next_x;
            x = step.step(x, rng);
        } else {
            t = next_h;
            k += 1;
        }
    }
}

/// Mean first time a speed-1 walker from `x` sits on the target path,
/// against `11 t*_hit`.
pub fn moving_target_check(
    chain: &ChainSpec,
    x: usize,
    target: TargetPath,
    n_samples: usize,
    seed: u64,
) -> Result<MovingTargetReport> {
    require_reversible(chain)?;
    let n = chain.n();
    let target_start = match target {
        TargetPath::Frozen { state } => state,
        TargetPath::Random { start, .. } => start,
    };
    if x >= n || target_start >= n {
        return Err(Error::param("state out of range"));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    let hit = hitting_moments(chain)?;
    let t_max = DEFAULT_T_MAX_MULT * hit.t_star_hit;
    let step = StepSampler::new(chain);
    let path = match target {
        TargetPath::Frozen { state } => vec![(0.0, state)],
        TargetPath::Random { start, seed } => sample_path(&step, start, seed, t_max),
    };
    let values: Vec<Option<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|run| chase(&step, x, &path, t_max, &mut run_rng(seed, run)))
        .collect();
    let estimate = McEstimate::from_values(&values, seed, t_max, DEFAULT_CENSOR_CAP)?;
    let bound = 11.0 * hit.t_star_hit;
    let within_bound = estimate.mean <= bound + 3.5 * estimate.std_err;
    let exact_static = match target {
        TargetPath::Frozen { state } => Some(hit.expectations[x][state]),
        TargetPath::Random { .. } => None,
    };
    Ok(MovingTargetReport { start: x, target, estimate, t_star_hit: hit.t_star_hit, bound, exact_static, within_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_cycle, build_hypercube};

    #[test]
    fn frozen_target_matches_exact() {
        let c = build_cycle(8, false).unwrap();
        let r = moving_target_check(&c, 0, TargetPath::Frozen { state: 3 }, 20_000, 4).unwrap();
        let exact = r.exact_static.unwrap();
        assert!(r.estimate.z_score(exact) <= 3.5, "{} ± {} vs {exact}", r.estimate.mean, r.estimate.std_err);
    }

    #[test]
    fn random_target_within_bound() {
        let c = build_cycle(8, false).unwrap();
        for s in 0..3 {
            let r = moving_target_check(&c, 0, TargetPath::Random { start: 4, seed: s }, 5_000, 10 + s).unwrap();
            assert!(r.within_bound, "{r:?}");
        }
        let q = build_hypercube(4, Some(0.2)).unwrap();
        let r = moving_target_check(&q, 5, TargetPath::Random { start: 0, seed: 1 }, 5_000, 2).unwrap();
        assert!(r.within_bound);
    }

    #[test]
    fn starting_on_the_path_is_zero() {
        let c = build_cycle(6, false).unwrap();
        let r = moving_target_check(&c, 2, TargetPath::Random { start: 2, seed: 8 }, 50, 1).unwrap();
        assert_eq!((r.estimate.mean, r.estimate.std_err), (0.0, 0.0));
    }

    #[test]
    fn rejects_nonreversible() {
        let c = build_cycle(5, true).unwrap();
        assert!(matches!(
            moving_target_check(&c, 0, TargetPath::Frozen { state: 2 }, 10, 0),
            Err(Error::HypothesisViolation(_))
        ));
    }
}
