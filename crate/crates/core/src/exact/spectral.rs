use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::{check_reversible, ChainSpec, DEFAULT_REVERSIBILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_desc;

/// Largest state space handed to the dense eigensolver.
pub const DENSE_CAPACITY: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Eigenvalues of `P` in decreasing order.
    pub eigenvalues: Vec<f64>,
    /// `max_{i>=2} |lambda_i|`.
    pub lambda_star: f64,
    pub lambda_2: f64,
    /// `1 / (1 - lambda_star)`; infinite for periodic chains.
    pub t_rel_discrete: f64,
    /// `1 / (1 - lambda_2)`, the decay time of `exp(t(P - I))`.
    pub t_rel_cont: f64,
}

pub(crate) fn require_reversible(chain: &ChainSpec) -> Result<()> {
    let r = check_reversible(chain, DEFAULT_REVERSIBILITY_TOL)?;
    if !r.reversible {
        return Err(Error::hypothesis(format!(
            "chain is not reversible (detailed-balance residual {:e})",
            r.max_residual
        )));
    }
    Ok(())
}

pub(crate) fn require_capacity(n: usize) -> Result<()> {
    if n > DENSE_CAPACITY {
        return Err(Error::CapacityExceeded { needed: n, capacity: DENSE_CAPACITY });
    }
    Ok(())
}

/// `D^{1/2} P D^{-1/2}` with `D = diag(pi)`, restricted to `keep` states.
pub(crate) fn symmetrized(chain: &ChainSpec, keep: &[usize]) -> Result<DMatrix<f64>> {
    let pi = &chain.stationary()?.pi;
    let mut pos = vec![usize::MAX; chain.n()];
    for (i, &x) in keep.iter().enumerate() {
        pos[x] = i;
    }
    let mut s = DMatrix::zeros(keep.len(), keep.len());
    for (i, &x) in keep.iter().enumerate() {
        for &(y, p) in chain.row(x) {
            if pos[y] != usize::MAX {
                s[(i, pos[y])] = (pi[x] / pi[y]).sqrt() * p;
            }
        }
    }
    Ok(s)
}

/// Eigenvalues of a reversible chain from its symmetrized matrix.
pub fn spectral_summary(chain: &ChainSpec) -> Result<SpectralSummary> {
    require_capacity(chain.n())?;
    require_reversible(chain)?;
    let all: Vec<usize> = (0..chain.n()).collect();
    let (eigenvalues, _) = sym_eigen_desc(symmetrized(chain, &all)?);
    Ok(summarize(eigenvalues))
}

pub(crate) fn summarize(eigenvalues: Vec<f64>) -> SpectralSummary {
    let lambda_2 = eigenvalues[1];
    let lambda_star = eigenvalues[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let inv_gap = |l: f64| if 1.0 - l <= 1e-12 { f64::INFINITY } else { 1.0 / (1.0 - l) };
    SpectralSummary {
        t_rel_discrete: inv_gap(lambda_star),
        t_rel_cont: inv_gap(lambda_2),
        eigenvalues,
        lambda_star,
        lambda_2,
    }
}
