use serde::{Deserialize, Serialize};

use super::spectral::{require_capacity, require_reversible, symmetrized, SpectralSummary};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_desc;

/// Weights below this are treated as absent modes.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Spectrum of the generator killed at one state.
///
/// From the stationary start conditioned off `z`,
/// `P(tau_z > t) = sum_i weights[i] * exp(-gammas[i] t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KilledSpectrum {
    pub target: usize,
    /// Distinct decay rates carrying positive weight, increasing.
    pub gammas: Vec<f64>,
    /// Nonnegative, summing to one.
    pub weights: Vec<f64>,
    /// Quasistationary distribution; `alpha[target] = 0`.
    pub alpha: Vec<f64>,
    /// `pi(complement of z)`, the mass the weights were normalized by.
    pub mass: f64,
}

impl KilledSpectrum {
    pub fn ground_rate(&self) -> f64 {
        self.gammas[0]
    }

    /// `P(tau_z > s)` from the conditioned stationary start.
    pub fn survival(&self, s: f64) -> f64 {
        self.gammas.iter().zip(&self.weights).map(|(g, p)| p * (-g * s).exp()).sum()
    }

    /// `E[tau_z - s | tau_z > s]` for the conditioned stationary start.
    pub fn mean_residual_life(&self, s: f64) -> f64 {
        let g1 = self.gammas[0];
        let (mut num, mut den) = (0.0, 0.0);
        for (g, p) in self.gammas.iter().zip(&self.weights) {
            // shifted by the slowest rate so large s does not underflow
            let w = p * (-(g - g1) * s).exp();
            num += w / g;
            den += w;
        }
        num / den
    }
}

/// Eigen-decomposition of `I - P` restricted to the states other than `z`.
pub fn killed_spectrum(chain: &ChainSpec, z: usize) -> Result<KilledSpectrum> {
    let n = chain.n();
    if z >= n {
        return Err(Error::param(format!("target {z} out of range")));
    }
    require_capacity(n)?;
    require_reversible(chain)?;
    let pi = &chain.stationary()?.pi;
    let keep: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let s = symmetrized(chain, &keep)?;
    let (values, vectors) = sym_eigen_desc(s);
    let root: Vec<f64> = keep.iter().map(|&x| pi[x].sqrt()).collect();
    let mass: f64 = keep.iter().map(|&x| pi[x]).sum();

    // eigenvalues of P_z in decreasing order give rates 1 - value increasing
    let mut modes: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let gamma = 1.0 - v;
        let overlap: f64 = (0..keep.len()).map(|r| vectors[(r, i)] * root[r]).sum();
        let w = (overlap * overlap / mass).max(0.0);
        match modes.last_mut() {
            Some(last) if (gamma - last.0).abs() <= 1e-9 * gamma.abs().max(1.0) => last.1 += w,
            _ => modes.push((gamma, w)),
        }
    }
    if !(modes[0].0 > 0.0) {
        return Err(Error::solver(format!("killed generator has non-positive ground rate {}", modes[0].0)));
    }
    let kept: Vec<(f64, f64)> = modes.into_iter().filter(|&(_, w)| w > WEIGHT_FLOOR).collect();
    let total: f64 = kept.iter().map(|m| m.1).sum();
    let gammas = kept.iter().map(|m| m.0).collect();
    let weights = kept.iter().map(|m| m.1 / total).collect();

    // left ground state of I - P_z is sqrt(pi) times the symmetric eigenvector
    let mut alpha = vec![0.0; n];
    let sign = if vectors[(0, 0)] < 0.0 { -1.0 } else { 1.0 };
    for (r, &x) in keep.iter().enumerate() {
        alpha[x] = (sign * vectors[(r, 0)] * root[r]).max(0.0);
    }
    let s: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= s);
    Ok(KilledSpectrum { target: z, gammas, weights, alpha, mass })
}

/// Mean residual hitting time `f(s) = E_pi[tau_z - s | tau_z > s]` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualLifeCurve {
    pub target: usize,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    /// `E_pi[tau_z]`.
    pub mean_from_stationary: f64,
    pub t_rel_cont: f64,
    /// `lim f(s) = 1 / gamma_1`.
    pub limit: f64,
}

impl ResidualLifeCurve {
    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        self.f.windows(2).all(|w| w[1] >= w[0] - slack)
    }

    pub fn sup(&self) -> f64 {
        self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(self.limit)
    }

    /// The ceiling `E_pi[tau_z] + t_rel`.
    pub fn ceiling(&self) -> f64 {
        self.mean_from_stationary + self.t_rel_cont
    }
}

pub fn residual_life_curve(
    chain: &ChainSpec,
    z: usize,
    s_grid: &[f64],
    spectral: &SpectralSummary,
) -> Result<ResidualLifeCurve> {
    let ks = killed_spectrum(chain, z)?;
    let f = s_grid.iter().map(|&s| ks.mean_residual_life(s)).collect();
    // E_pi[tau_z] includes the atom at zero: mass * E[tau | tau > 0]
    let mean_from_stationary = ks.mass * ks.mean_residual_life(0.0);
    Ok(ResidualLifeCurve {
        target: z,
        s: s_grid.to_vec(),
        f,
        mean_from_stationary,
        t_rel_cont: spectral.t_rel_cont,
        limit: 1.0 / ks.ground_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube, build_trap_graph};
    use crate::exact::{hitting_moments, hitting_survival, linear_grid, spectral_summary};

    #[test]
    fn complete_graph_single_mode() {
        for n in [3, 5, 8] {
            let ks = killed_spectrum(&build_complete(n).unwrap(), 0).unwrap();
            assert_eq!(ks.gammas.len(), 1);
            assert!((ks.gammas[0] - 1.0 / (n - 1) as f64).abs() < 1e-12);
            assert!((ks.weights[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn five_cycle_two_modes() {
        let c = build_cycle(5, false).unwrap();
        for z in 0..5 {
            let ks = killed_spectrum(&c, z).unwrap();
            assert_eq!(ks.gammas.len(), 2);
            assert!(ks.gammas.iter().all(|&g| g > 0.0));
        }
    }

    #[test]
    fn quasistationary_mean_is_inverse_rate() {
        let (trap, _) = build_trap_graph(3, 12.0).unwrap();
        for c in [build_cycle(7, false).unwrap(), build_hypercube(3, Some(0.4)).unwrap(), trap] {
            let h = hitting_moments(&c).unwrap();
            for z in [0, c.n() / 2] {
                let ks = killed_spectrum(&c, z).unwrap();
                let e_alpha: f64 = (0..c.n()).map(|x| ks.alpha[x] * h.expectations[x][z]).sum();
                let inv = 1.0 / ks.ground_rate();
                assert!((e_alpha - inv).abs() <= 1e-8 * inv, "{e_alpha} vs {inv}");
            }
        }
    }

    #[test]
    fn spectral_survival_matches_uniformization() {
        let c = build_cycle(6, false).unwrap();
        let pi = &c.stationary().unwrap().pi;
        let ks = killed_spectrum(&c, 2).unwrap();
        let grid = linear_grid(30.0, 16);
        let table = hitting_survival(&c, &[2], 1.0, &grid).unwrap();
        for (j, t) in grid.iter().enumerate() {
            let direct: f64 = (0..6).map(|x| pi[x] * table.survival[j][x]).sum::<f64>() / ks.mass;
            assert!((direct - ks.survival(*t)).abs() < 1e-11);
        }
    }

    #[test]
    fn residual_life_complete_is_constant() {
        let c = build_complete(5).unwrap();
        let sp = spectral_summary(&c).unwrap();
        let curve = residual_life_curve(&c, 0, &[0.0, 0.5, 3.0, 40.0], &sp).unwrap();
        for v in &curve.f {
            assert!((v - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_life_monotone_and_bounded() {
        let c = build_cycle(6, false).unwrap();
        let sp = spectral_summary(&c).unwrap();
        let h = hitting_moments(&c).unwrap();
        let grid = linear_grid(10.0 * h.t_star_hit, 50);
        let curve = residual_life_curve(&c, 0, &grid, &sp).unwrap();
        assert!(curve.is_nondecreasing(0.0));
        assert!(curve.f[0] >= h.from_stationary[0]);
        assert!((curve.mean_from_stationary - h.from_stationary[0]).abs() < 1e-9);
        assert!(curve.sup() <= curve.ceiling() + 1e-8);
    }
}
