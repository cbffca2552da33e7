use serde::{Deserialize, Serialize};

use super::hitting::HittingSummary;
use super::spectral::{require_capacity, require_reversible, symmetrized};
use super::transient::hitting_survival;
use crate::chain::{ChainSpec, Transitivity};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_desc;

/// The set where a second eigenfunction is nonpositive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSet {
    pub lambda_2: f64,
    /// Right eigenfunction, `P phi = lambda_2 phi`.
    pub phi: Vec<f64>,
    /// States with `phi <= 0`, increasing.
    pub set_a: Vec<usize>,
    pub pi_a: f64,
    /// A state maximizing `phi`.
    pub anchor: usize,
}

impl NegativeSet {
    /// `max_x |(P phi)(x) - lambda_2 phi(x)|`.
    pub fn eigen_residual(&self, chain: &ChainSpec) -> f64 {
        let mut out = vec![0.0; chain.n()];
        chain.apply(&self.phi, &mut out);
        out.iter().zip(&self.phi).map(|(a, b)| (a - self.lambda_2 * b).abs()).fold(0.0, f64::max)
    }

    /// Image of the set under a state permutation.
    pub fn mapped(&self, phi: &[usize]) -> Vec<usize> {
        let mut s: Vec<usize> = self.set_a.iter().map(|&z| phi[z]).collect();
        s.sort_unstable();
        s
    }
}

/// Eigenfunction for the second-largest eigenvalue, oriented so that the
/// nonpositive set carries at least half of the stationary mass.
///
/// When that eigenvalue is repeated, each basis vector of the eigenspace is
/// sign-normalized (first non-negligible entry positive) and the
/// lexicographically largest one is used.
pub fn negative_set(chain: &ChainSpec) -> Result<NegativeSet> {
    let n = chain.n();
    require_capacity(n)?;
    require_reversible(chain)?;
    let pi = &chain.stationary()?.pi;
    let all: Vec<usize> = (0..n).collect();
    let (values, vectors) = sym_eigen_desc(symmetrized(chain, &all)?);
    let lambda_2 = values[1];

    let tol = 1e-9;
    let candidates: Vec<Vec<f64>> = (1..n)
        .filter(|&i| (values[i] - lambda_2).abs() <= tol)
        .map(|i| {
            let mut phi: Vec<f64> = (0..n).map(|x| vectors[(x, i)] / pi[x].sqrt()).collect();
            let scale = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
            phi.iter_mut().for_each(|v| *v /= scale);
            if let Some(first) = phi.iter().find(|v| v.abs() > 1e-12) {
                if *first < 0.0 {
                    phi.iter_mut().for_each(|v| *v = -*v);
                }
            }
            phi
        })
        .collect();
    let mut phi = candidates
        .into_iter()
        .max_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| round12(*x).total_cmp(&round12(*y)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::solver("no eigenvector for the second eigenvalue"))?;

    let zero = 1e-12;
    let mass = |phi: &[f64]| -> f64 { (0..n).filter(|&x| phi[x] <= zero).map(|x| pi[x]).sum() };
    if mass(&phi) < 0.5 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    let set_a: Vec<usize> = (0..n).filter(|&x| phi[x] <= zero).collect();
    let pi_a = set_a.iter().map(|&x| pi[x]).sum();
    let anchor = (0..n).max_by(|&a, &b| phi[a].total_cmp(&phi[b]).then(b.cmp(&a))).expect("n >= 2");
    Ok(NegativeSet { lambda_2, phi, set_a, pi_a, anchor })
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// `P_anchor(tau_A > t)` against `exp(-t / t_rel)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSetTail {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub bound: Vec<f64>,
    pub err_bound: f64,
}

impl NegativeSetTail {
    /// Smallest `survival - bound` over the grid, allowing for truncation error.
    pub fn worst_margin(&self) -> f64 {
        self.survival.iter().zip(&self.bound).map(|(s, b)| s - b + self.err_bound).fold(f64::INFINITY, f64::min)
    }
}

pub fn negative_set_tail(chain: &ChainSpec, set: &NegativeSet, t_rel: f64, grid: &[f64]) -> Result<NegativeSetTail> {
    let table = hitting_survival(chain, &set.set_a, 1.0, grid)?;
    Ok(NegativeSetTail {
        times: grid.to_vec(),
        survival: table.survival.iter().map(|s| s[set.anchor]).collect(),
        bound: grid.iter().map(|t| (-t / t_rel).exp()).collect(),
        err_bound: table.err_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallTimePoint {
    pub theta: f64,
    /// `(1/pi(A_x)) sum_{z in A_x} pi(z) P_x(tau_z <= theta t_hit)`.
    pub lhs: f64,
    /// `6 sqrt(theta)`.
    pub bound: f64,
    pub err_bound: f64,
}

impl SmallTimePoint {
    pub fn holds(&self) -> bool {
        self.lhs - self.err_bound <= self.bound
    }
}

/// The nonpositive set carried to `x` by an automorphism that sends the
/// anchor to `x`.
pub fn negative_set_at(set: &NegativeSet, transitivity: &Transitivity, x: usize) -> Result<Vec<usize>> {
    let map = transitivity
        .map_between(set.anchor, x)
        .ok_or_else(|| Error::hypothesis("small-time profile needs a transitive chain"))?;
    Ok(set.mapped(&map))
}

/// Averaged small-time hitting probabilities from `x` over its set `A_x`,
/// for each `theta`.
pub fn small_time_profile(
    chain: &ChainSpec,
    x: usize,
    thetas: &[f64],
    transitivity: &Transitivity,
    hitting: &HittingSummary,
) -> Result<Vec<SmallTimePoint>> {
    if thetas.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::param("theta must be positive"));
    }
    if !transitivity.is_transitive() {
        return Err(Error::hypothesis("small-time profile needs a transitive chain"));
    }
    let pi = &chain.stationary()?.pi;
    let set = negative_set(chain)?;
    let a_x = negative_set_at(&set, transitivity, x)?;
    let pi_a: f64 = a_x.iter().map(|&z| pi[z]).sum();
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
    let grid: Vec<f64> = order.iter().map(|&i| thetas[i] * hitting.t_hit).collect();

    let mut lhs = vec![0.0; thetas.len()];
    let mut err: f64 = 0.0;
    for &z in &a_x {
        let table = hitting_survival(chain, &[z], 1.0, &grid)?;
        err = err.max(table.err_bound);
        for (j, &i) in order.iter().enumerate() {
            lhs[i] += pi[z] * (1.0 - table.survival[j][x]) / pi_a;
        }
    }
    Ok(thetas
        .iter()
        .zip(lhs)
        .map(|(&theta, lhs)| SmallTimePoint { theta, lhs, bound: 6.0 * theta.sqrt(), err_bound: err })
        .collect())
}
