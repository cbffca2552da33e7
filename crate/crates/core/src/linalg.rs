//! Dense and sparse linear solves shared by the exact solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// decreasing order; column `i` of the returned matrix belongs to value `i`.
pub(crate) fn sym_eigen_desc(mut m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let t = m.transpose();
    m += t;
    m *= 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn lu_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.lu().solve(b).ok_or_else(|| Error::solver("singular dense system"))
}

/// A sparse system `diag[i] h[i] - sum_j off[i] (j, a_ij) h[j] = rhs[i]`.
pub(crate) struct SparseSystem {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn residual(&self, h: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| {
                let lhs = self.diag[i] * h[i] - self.off[i].iter().map(|&(j, a)| a * h[j]).sum::<f64>();
                (lhs - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    fn to_dense(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] += self.diag[i];
            for &(j, v) in &self.off[i] {
                a[(i, j)] -= v;
            }
        }
        (a, DVector::from_vec(self.rhs.clone()))
    }

    /// Dense LU up to `dense_limit` unknowns, Gauss-Seidel sweeps beyond.
    /// Returns the solution and its max-norm residual.
    pub fn solve(&self, dense_limit: usize, tol: f64) -> Result<(Vec<f64>, f64)> {
        if self.len() == 0 {
            return Ok((Vec::new(), 0.0));
        }
        let h = if self.len() <= dense_limit {
            let (a, b) = self.to_dense();
            lu_solve(a, &b)?.iter().copied().collect()
        } else {
            self.gauss_seidel(tol, 1_000_000)?
        };
        let r = self.residual(&h);
        Ok((h, r))
    }

    fn gauss_seidel(&self, tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let mut h = vec![0.0; n];
        for sweep in 0..max_sweeps {
            let mut change: f64 = 0.0;
            for i in 0..n {
                let s: f64 = self.off[i].iter().map(|&(j, a)| a * h[j]).sum();
                let new = (self.rhs[i] + s) / self.diag[i];
                change = change.max((new - h[i]).abs());
                h[i] = new;
            }
            if change <= tol * 0.1 && (sweep % 16 == 15 || change == 0.0) && self.residual(&h) <= tol {
                return Ok(h);
            }
        }
        Err(Error::solver(format!("Gauss-Seidel did not reach residual {tol:e} in {max_sweeps} sweeps")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        let (v, vec) = sym_eigen_desc(m);
        assert_eq!(v, vec![5.0, 2.0, -1.0]);
        assert!((vec[(2, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sparse_paths_agree() {
        // 1D Poisson-like system
        let n = 40;
        let sys = SparseSystem {
            diag: vec![2.5; n],
            off: (0..n)
                .map(|i| {
                    let mut v = Vec::new();
                    if i > 0 {
                        v.push((i - 1, 1.0));
                    }
                    if i + 1 < n {
                        v.push((i + 1, 1.0));
                    }
                    v
                })
                .collect(),
            rhs: (0..n).map(|i| (i % 3) as f64).collect(),
        };
        let (dense, r1) = sys.solve(1000, 1e-13).unwrap();
        let (gs, r2) = sys.solve(0, 1e-13).unwrap();
        assert!(r1 < 1e-12 && r2 <= 1e-13);
        for (a, b) in dense.iter().zip(&gs) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
