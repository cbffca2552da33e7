use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectral::require_capacity;
use crate::chain::ChainSpec;
use crate::error::{Error, Result};

/// Expected hitting times of a speed-1 chain.
///
/// Continuous time at rate one has the same expected hitting times as the
/// discrete chain; at speed `s` divide every value by `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSummary {
    /// `expectations[x][z] = E_x[tau_z]`.
    pub expectations: Vec<Vec<f64>>,
    /// `E_pi[tau_z]` for every target `z`.
    pub from_stationary: Vec<f64>,
    pub t_hit: f64,
    pub t_star_hit: f64,
}

/// All expected hitting times at once from the fundamental matrix
/// `Z = (I - P + 1 pi^T)^{-1}`: `E_x[tau_z] = (Z(z,z) - Z(x,z)) / pi(z)`.
pub fn hitting_moments(chain: &ChainSpec) -> Result<HittingSummary> {
    let n = chain.n();
    require_capacity(n)?;
    let pi = &chain.stationary()?.pi;
    let mut a: DMatrix<f64> = -chain.to_dense();
    for x in 0..n {
        a[(x, x)] += 1.0;
        for z in 0..n {
            a[(x, z)] += pi[z];
        }
    }
    let fundamental = a.try_inverse().ok_or_else(|| Error::solver("fundamental matrix is singular"))?;
    let mut f = vec![vec![0.0; n]; n];
    for (x, row) in f.iter_mut().enumerate() {
        for (z, v) in row.iter_mut().enumerate() {
            if x != z {
                *v = ((fundamental[(z, z)] - fundamental[(x, z)]) / pi[z]).max(0.0);
            }
        }
    }
    let from_stationary: Vec<f64> = (0..n).map(|z| (0..n).map(|x| pi[x] * f[x][z]).sum()).collect();
    let t_hit = f.iter().flatten().copied().fold(0.0, f64::max);
    let t_star_hit = from_stationary.iter().copied().fold(0.0, f64::max);
    Ok(HittingSummary { expectations: f, from_stationary, t_hit, t_star_hit })
}

/// Expected hitting times of a single target by solving
/// `(I - P) f = 1` off the target, `f(z) = 0`.
pub fn hitting_times_to(chain: &ChainSpec, z: usize) -> Result<Vec<f64>> {
    let n = chain.n();
    require_capacity(n)?;
    let idx: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in idx.iter().enumerate() {
        pos[x] = i;
    }
    let m = idx.len();
    let mut a = DMatrix::identity(m, m);
    for (i, &x) in idx.iter().enumerate() {
        for &(y, p) in chain.row(x) {
            if y != z {
                a[(i, pos[y])] -= p;
            }
        }
    }
    let sol = crate::linalg::lu_solve(a, &DVector::from_element(m, 1.0))?;
    let mut f = vec![0.0; n];
    for (i, &x) in idx.iter().enumerate() {
        f[x] = sol[i];
    }
    Ok(f)
}

impl HittingSummary {
    /// `max_{x != z} |sum_x' P(x,x') f(x',z) - f(x,z) + 1|`: the drift of
    /// `f(X_t, z) + t` before the hit.
    pub fn generator_residual(&self, chain: &ChainSpec) -> f64 {
        let f = &self.expectations;
        let n = chain.n();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for z in (0..n).filter(|&z| z != x) {
                let step: f64 = chain.row(x).iter().map(|&(y, p)| p * f[y][z]).sum();
                worst = worst.max((step - f[x][z] + 1.0).abs());
            }
        }
        worst
    }

    /// `max_{x != y} |sum P(x,x') f(x',y) + sum P(y,y') f(x,y') - 2 f(x,y) + 2|`:
    /// the drift of `f(X_t, Y_t) + 2t` for two independent walkers. Zero for
    /// transitive reversible chains.
    pub fn pair_residual(&self, chain: &ChainSpec) -> f64 {
        let f = &self.expectations;
        let n = chain.n();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                let mx: f64 = chain.row(x).iter().map(|&(a, p)| p * f[a][y]).sum();
                let my: f64 = chain.row(y).iter().map(|&(b, p)| p * f[x][b]).sum();
                worst = worst.max((mx + my - 2.0 * f[x][y] + 2.0).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube, build_trap_graph};

    #[test]
    fn complete_graph_closed_form() {
        for n in [2, 3, 5, 9] {
            let h = hitting_moments(&build_complete(n).unwrap()).unwrap();
            for x in 0..n {
                for z in 0..n {
                    let expect = if x == z { 0.0 } else { (n - 1) as f64 };
                    assert!((h.expectations[x][z] - expect).abs() < 1e-10);
                }
            }
        }
        let h = hitting_moments(&build_complete(3).unwrap()).unwrap();
        assert!((h.t_star_hit - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_gamblers_ruin() {
        for n in [3, 6, 11] {
            let h = hitting_moments(&build_cycle(n, false).unwrap()).unwrap();
            for x in 0..n {
                for z in 0..n {
                    let d = (x as i64 - z as i64).rem_euclid(n as i64) as f64;
                    assert!((h.expectations[x][z] - d * (n as f64 - d)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fundamental_matrix_matches_direct_solves() {
        let (trap, _) = build_trap_graph(3, 12.0).unwrap();
        for c in [trap, build_hypercube(3, Some(0.3)).unwrap(), build_cycle(7, true).unwrap()] {
            let h = hitting_moments(&c).unwrap();
            for z in 0..c.n() {
                let direct = hitting_times_to(&c, z).unwrap();
                for (x, d) in direct.iter().enumerate() {
                    assert!((h.expectations[x][z] - d).abs() <= 1e-9 * d.max(1.0));
                }
            }
            assert!(h.generator_residual(&c) < 1e-9);
        }
    }

    #[test]
    fn hit_bounds() {
        let (trap, _) = build_trap_graph(3, 12.0).unwrap();
        for c in [trap, build_cycle(8, false).unwrap(), build_hypercube(3, None).unwrap()] {
            let h = hitting_moments(&c).unwrap();
            assert!(h.t_hit > 0.0 && h.t_hit <= 2.0 * h.t_star_hit + 1e-9);
        }
    }
}
