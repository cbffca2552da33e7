use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ChainSpec;
use crate::error::{Error, Result};

/// Residual bound `||pi P - pi||_inf` every returned distribution satisfies.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Largest chain solved with a dense LU factorization.
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDist {
    pub pi: Vec<f64>,
}

impl StationaryDist {
    /// `||pi P - pi||_inf`.
    pub fn residual(&self, chain: &ChainSpec) -> f64 {
        let mut flow = vec![0.0; chain.n()];
        for (x, row) in chain.rows().iter().enumerate() {
            for &(y, p) in row {
                flow[y] += self.pi[x] * p;
            }
        }
        flow.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn mass(&self, set: impl IntoIterator<Item = usize>) -> f64 {
        set.into_iter().map(|x| self.pi[x]).sum()
    }
}

/// Stationary distribution of an irreducible chain.
///
/// Reversible chains are handled exactly by propagating the ratios
/// `pi(y)/pi(x) = P(x,y)/P(y,x)` along a spanning tree; the result is
/// accepted only if it is actually stationary. Otherwise a dense solve (up
/// to 4096 states) or a lazy power iteration is used.
pub fn stationary(chain: &ChainSpec) -> Result<StationaryDist> {
    if let Some(pi) = tree_ratio(chain) {
        let dist = StationaryDist { pi };
        if dist.residual(chain) <= STATIONARY_RESIDUAL_TOL {
            return Ok(dist);
        }
    }
    if chain.n() <= DENSE_LIMIT {
        stationary_by_solve(chain)
    } else {
        power_iteration(chain)
    }
}

/// Dense LU solve of `pi (P - I) = 0`, `sum pi = 1`.
pub fn stationary_by_solve(chain: &ChainSpec) -> Result<StationaryDist> {
    let n = chain.n();
    let mut a: DMatrix<f64> = chain.to_dense().transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or_else(|| Error::solver("singular stationary system"))?;
    let mut pi: Vec<f64> = sol.iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    let dist = StationaryDist { pi };
    let r = dist.residual(chain);
    if r > STATIONARY_RESIDUAL_TOL {
        return Err(Error::solver(format!("stationary residual {r:e} too large")));
    }
    Ok(dist)
}

fn tree_ratio(chain: &ChainSpec) -> Option<Vec<f64>> {
    let n = chain.n();
    let mut logpi = vec![f64::NAN; n];
    logpi[0] = 0.0;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        for &(y, p) in chain.row(x) {
            if logpi[y].is_nan() {
                let back = chain.prob(y, x);
                if back == 0.0 {
                    return None;
                }
                logpi[y] = logpi[x] + p.ln() - back.ln();
                stack.push(y);
            }
        }
    }
    let top = logpi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = logpi.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Some(pi)
}

fn power_iteration(chain: &ChainSpec) -> Result<StationaryDist> {
    let n = chain.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..200_000 {
        next.iter_mut().zip(&pi).for_each(|(a, &b)| *a = 0.5 * b);
        for (x, row) in chain.rows().iter().enumerate() {
            for &(y, p) in row {
                next[y] += 0.5 * pi[x] * p;
            }
        }
        std::mem::swap(&mut pi, &mut next);
        let dist = StationaryDist { pi: pi.clone() };
        if dist.residual(chain) <= 0.1 * STATIONARY_RESIDUAL_TOL {
            return Ok(dist);
        }
    }
    Err(Error::solver("power iteration did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube, build_trap_graph};

    #[test]
    fn uniform_families() {
        for c in [build_complete(5).unwrap(), build_cycle(6, true).unwrap(), build_hypercube(3, Some(0.2)).unwrap()] {
            let pi = stationary(&c).unwrap();
            let n = c.n() as f64;
            assert!(pi.pi.iter().all(|&p| (p - 1.0 / n).abs() < 1e-14));
        }
    }

    #[test]
    fn trap_graph_matches_degrees_and_solve() {
        let (c, _) = build_trap_graph(4, 12.0).unwrap();
        let total: usize = (0..c.n()).map(|x| c.row(x).len()).sum();
        let by_tree = stationary(&c).unwrap();
        let by_solve = stationary_by_solve(&c).unwrap();
        for x in 0..c.n() {
            let deg = c.row(x).len() as f64 / total as f64;
            assert!((by_tree.pi[x] - deg).abs() < 1e-14);
            assert!((by_solve.pi[x] - deg).abs() < 1e-12);
        }
    }

    #[test]
    fn nonreversible_uses_solve() {
        // 3-state chain with a rotational drift.
        let c = ChainSpec::from_dense(&[vec![0.0, 0.7, 0.3], vec![0.3, 0.0, 0.7], vec![0.7, 0.3, 0.0]]).unwrap();
        let pi = stationary(&c).unwrap();
        assert!(pi.residual(&c) < 1e-14);
        let c = ChainSpec::from_dense(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.5, 0.5], vec![1.0, 0.0, 0.0]]).unwrap();
        let pi = stationary(&c).unwrap();
        assert!((pi.pi[1] - 0.5).abs() < 1e-14 && (pi.pi[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn power_iteration_agrees() {
        let c = build_cycle(7, true).unwrap();
        let p = power_iteration(&build_cycle(8, false).unwrap());
        // the lazy walk on an even cycle still converges
        assert!(p.is_ok());
        let pi = power_iteration(&c).unwrap();
        assert!(pi.pi.iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-10));
    }
}
