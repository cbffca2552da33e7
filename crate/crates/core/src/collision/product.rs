use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

/// Classification of a three-walker state `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductClass {
    /// `x = y` while `x != z`: X and Y have met first.
    Good,
    /// `x = z` or `y = z`, including the triple point `x = y = z`.
    Bad,
    Transient,
}

pub fn classify(x: usize, y: usize, z: usize) -> ProductClass {
    if x == z || y == z {
        ProductClass::Bad
    } else if x == y {
        ProductClass::Good
    } else {
        ProductClass::Transient
    }
}

/// Independent walkers on the same chain viewed as one chain on `Omega^k`
/// (`k` = 2 or 3). States are indexed row-major: `x*n^2 + y*n + z` for three
/// walkers, `a*n + b` for two. Coordinate `i` jumps at `speeds[i]` times `P`.
#[derive(Debug, Clone)]
pub struct ProductGenerator<'a> {
    chain: &'a ChainSpec,
    speeds: Vec<f64>,
}

impl<'a> ProductGenerator<'a> {
    pub fn new(chain: &'a ChainSpec, speeds: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&speeds.len()) {
            return Err(Error::param("product chains have 2 or 3 coordinates"));
        }
        if speeds.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::param("speeds must be finite and nonnegative"));
        }
        Ok(ProductGenerator { chain, speeds: speeds.to_vec() })
    }

    pub fn dims(&self) -> usize {
        self.speeds.len()
    }

    pub fn base(&self) -> usize {
        self.chain.n()
    }

    pub fn len(&self) -> usize {
        self.base().pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_rate(&self) -> f64 {
        self.speeds.iter().sum()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.base() + c)
    }

    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        let n = self.base();
        let mut c = vec![0; self.dims()];
        for slot in c.iter_mut().rev() {
            *slot = v % n;
            v /= n;
        }
        c
    }

    pub fn class(&self, v: usize) -> ProductClass {
        let n = self.base();
        match self.dims() {
            3 => classify(v / (n * n), (v / n) % n, v % n),
            _ if v / n == v % n => ProductClass::Good,
            _ => ProductClass::Transient,
        }
    }

    /// Every jump out of `v` with its rate, self-loops of `P` included (they
    /// leave the state unchanged).
    pub fn for_each_jump(&self, v: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.base();
        let k = self.dims();
        for (i, &speed) in self.speeds.iter().enumerate() {
            if speed == 0.0 {
                continue;
            }
            let stride = n.pow((k - 1 - i) as u32);
            let c = (v / stride) % n;
            let rest = v - c * stride;
            for &(c2, p) in self.chain.row(c) {
                f(rest + c2 * stride, speed * p);
            }
        }
    }

    /// Off-diagonal rates out of `v`, merged by target.
    pub fn rate_row(&self, v: usize) -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = Vec::new();
        self.for_each_jump(v, |w, r| {
            if w != v {
                row.push((w, r));
            }
        });
        row.sort_by_key(|e| e.0);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        row
    }

    /// Generator diagonal: minus the off-diagonal row sum.
    pub fn diagonal(&self, v: usize) -> f64 {
        -self.rate_row(v).iter().map(|e| e.1).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle};

    #[test]
    fn indexing_roundtrip() {
        let c = build_cycle(5, false).unwrap();
        let g = ProductGenerator::new(&c, &[1.0, 0.5, 2.0]).unwrap();
        assert_eq!(g.len(), 125);
        for v in 0..g.len() {
            assert_eq!(g.index(&g.coords(v)), v);
        }
        assert_eq!(g.index(&[1, 2, 3]), 25 + 10 + 3);
    }

    #[test]
    fn single_coordinate_moves() {
        let c = build_complete(4).unwrap();
        let g = ProductGenerator::new(&c, &[1.0, 0.0, 3.0]).unwrap();
        for v in 0..g.len() {
            let from = g.coords(v);
            let row = g.rate_row(v);
            for &(w, r) in &row {
                assert!(r > 0.0);
                let to = g.coords(w);
                let changed = from.iter().zip(&to).filter(|(a, b)| a != b).count();
                assert_eq!(changed, 1);
                assert_eq!(from[1], to[1], "frozen walker moved");
            }
            assert!((g.diagonal(v) + 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classes() {
        assert_eq!(classify(1, 1, 2), ProductClass::Good);
        assert_eq!(classify(1, 2, 1), ProductClass::Bad);
        assert_eq!(classify(2, 2, 2), ProductClass::Bad);
        assert_eq!(classify(0, 1, 2), ProductClass::Transient);
    }
}
