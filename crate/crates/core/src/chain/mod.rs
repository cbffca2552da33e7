//! Finite transition matrices, the chain families used throughout the crate,
//! and structural checks (stationarity, reversibility, transitivity).
//!
//! A [`ChainSpec`] is validated once at construction: every row is a
//! probability vector and the support graph is strongly connected. After
//! that it is immutable and cheap to share between threads.

mod build;
pub mod io;
mod stationary;
mod structure;

pub use build::{build_complete, build_cycle, build_hypercube, build_trap_graph, hypercube_rates, TrapGraphLayout};
pub use stationary::{stationary, stationary_by_solve, StationaryDist};
pub use structure::{
    check_reversible, check_transitive, structure_report, Reversibility, StructureReport, Transitivity,
    DEFAULT_REVERSIBILITY_TOL, DEFAULT_TRANSITIVITY_BUDGET,
};

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Which construction produced a chain, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Complete { n: usize },
    Cycle { n: usize },
    DirectedCycle { n: usize },
    Hypercube { d: usize, eps: Option<f64> },
    Trap { n: usize, c: f64 },
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Complete { .. } => "complete",
            Family::Cycle { .. } => "cycle",
            Family::DirectedCycle { .. } => "directed-cycle",
            Family::Hypercube { .. } => "hypercube",
            Family::Trap { .. } => "trap",
            Family::Custom => "custom",
        }
    }

    /// `key=value` pairs as written to chain files.
    pub fn params(&self) -> Vec<(String, String)> {
        match *self {
            Family::Complete { n } | Family::Cycle { n } | Family::DirectedCycle { n } => {
                vec![("n".into(), n.to_string())]
            }
            Family::Hypercube { d, eps } => {
                let mut p = vec![("d".into(), d.to_string())];
                if let Some(e) = eps {
                    p.push(("eps".into(), format!("{e:.17e}")));
                }
                p
            }
            Family::Trap { n, c } => vec![("n".into(), n.to_string()), ("c".into(), format!("{c:.17e}"))],
            Family::Custom => Vec::new(),
        }
    }

    /// Families whose members are transitive by construction.
    pub fn is_transitive_family(&self) -> bool {
        matches!(
            self,
            Family::Complete { .. } | Family::Cycle { .. } | Family::DirectedCycle { .. } | Family::Hypercube { .. }
        )
    }
}

impl Family {
    /// Builds the chain this family describes. `Custom` has no recipe.
    pub fn build(&self) -> Result<ChainSpec> {
        match *self {
            Family::Complete { n } => build_complete(n),
            Family::Cycle { n } => build_cycle(n, false),
            Family::DirectedCycle { n } => build_cycle(n, true),
            Family::Hypercube { d, eps } => build_hypercube(d, eps),
            Family::Trap { n, c } => build_trap_graph(n, c).map(|(chain, _)| chain),
            Family::Custom => Err(Error::param("custom chains are read from a file, not built")),
        }
    }

    /// Parses a comma-separated list such as
    /// `cycle:3..10,complete:2..8,hypercube:2..4@0.3,trap:20@12`.
    /// Ranges are inclusive; `@x` sets `eps` for hypercubes and `C` for trap
    /// graphs.
    pub fn parse_list(spec: &str) -> Result<Vec<Family>> {
        let mut out = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, rest) = item
                .split_once(':')
                .ok_or_else(|| Error::param(format!("family `{item}` needs the form name:range")))?;
            let (range, extra) = match rest.split_once('@') {
                Some((r, e)) => {
                    let v: f64 = e.parse().map_err(|_| Error::param(format!("bad parameter `{e}` in `{item}`")))?;
                    (r, Some(v))
                }
                None => (rest, None),
            };
            let bad = || Error::param(format!("bad range `{range}` in `{item}`"));
            let (lo, hi) = match range.split_once("..") {
                Some((a, b)) => (a.parse::<usize>().map_err(|_| bad())?, b.parse::<usize>().map_err(|_| bad())?),
                None => {
                    let v = range.parse::<usize>().map_err(|_| bad())?;
                    (v, v)
                }
            };
            if lo > hi {
                return Err(bad());
            }
            for k in lo..=hi {
                out.push(match name {
                    "complete" => Family::Complete { n: k },
                    "cycle" => Family::Cycle { n: k },
                    "directed-cycle" => Family::DirectedCycle { n: k },
                    "hypercube" => Family::Hypercube { d: k, eps: extra },
                    "trap" => Family::Trap { n: k, c: extra.unwrap_or(12.0) },
                    other => return Err(Error::param(format!("unknown family `{other}`"))),
                });
            }
        }
        if out.is_empty() {
            return Err(Error::param("empty family list"));
        }
        Ok(out)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Family::Complete { n } => write!(f, "complete(n={n})"),
            Family::Cycle { n } => write!(f, "cycle(n={n})"),
            Family::DirectedCycle { n } => write!(f, "directed-cycle(n={n})"),
            Family::Hypercube { d, eps: None } => write!(f, "hypercube(d={d})"),
            Family::Hypercube { d, eps: Some(e) } => write!(f, "hypercube(d={d}, eps={e})"),
            Family::Trap { n, c } => write!(f, "trap(n={n}, C={c})"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

/// A finite, irreducible transition matrix stored by rows.
///
/// Each row holds `(target, probability)` pairs sorted by target with
/// strictly positive probabilities; a self-loop is stored like any other
/// entry.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Option<Vec<String>>,
    family: Family,
    stationary: OnceLock<StationaryDist>,
}

impl PartialEq for ChainSpec {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.labels == other.labels && self.family == other.family
    }
}

impl ChainSpec {
    /// Validate and build a chain from sparse rows.
    ///
    /// Duplicate targets within a row are rejected; zero entries are dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>, labels: Option<Vec<String>>, family: Family) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidChain(format!("need at least 2 states, got {n}")));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidChain(format!("{} labels for {n} states", l.len())));
            }
        }
        let mut clean = Vec::with_capacity(n);
        for (x, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(_, p)| p != 0.0).collect();
            row.sort_by_key(|&(y, _)| y);
            let mut sum = 0.0;
            for (i, &(y, p)) in row.iter().enumerate() {
                if y >= n {
                    return Err(Error::InvalidChain(format!("row {x}: target {y} out of range")));
                }
                if i > 0 && row[i - 1].0 == y {
                    return Err(Error::InvalidChain(format!("row {x}: duplicate target {y}")));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidChain(format!("row {x}: probability {p} outside [0,1]")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChain(format!("row {x} sums to {sum}, not 1")));
            }
            clean.push(row);
        }
        let chain = ChainSpec { rows: clean, labels, family, stationary: OnceLock::new() };
        if !chain.is_irreducible() {
            return Err(Error::InvalidChain("support graph is not strongly connected".into()));
        }
        Ok(chain)
    }

    /// Build a custom chain from a dense row-major matrix.
    pub fn from_dense(matrix: &[Vec<f64>]) -> Result<Self> {
        let rows = matrix.iter().map(|r| r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect()).collect();
        Self::from_rows(rows, None, Family::Custom)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        let row = &self.rows[x];
        match row.binary_search_by_key(&y, |&(t, _)| t) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                m[(x, y)] = p;
            }
        }
        m
    }

    /// `(P v)(x) = sum_y P(x,y) v(y)`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (x, row) in self.rows.iter().enumerate() {
            out[x] = row.iter().map(|&(y, p)| p * v[y]).sum();
        }
    }

    /// Stationary distribution, computed on first use and cached.
    pub fn stationary(&self) -> Result<&StationaryDist> {
        if let Some(pi) = self.stationary.get() {
            return Ok(pi);
        }
        let pi = stationary(self)?;
        Ok(self.stationary.get_or_init(|| pi))
    }

    fn is_irreducible(&self) -> bool {
        let n = self.n();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, _) in row {
                rev[y].push(x);
            }
        }
        let forward = reach(n, |x| self.rows[x].iter().map(|&(y, _)| y).collect());
        let backward = reach(n, |x| rev[x].clone());
        forward && backward
    }
}

fn reach(n: usize, next: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for y in next(x) {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}

/// Jump rates of the three walkers X, Y and Z.
///
/// A walker with speed zero never moves; it carries no clock at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedTriple {
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub lambda_z: f64,
}

impl SpeedTriple {
    pub fn new(lambda_x: f64, lambda_y: f64, lambda_z: f64) -> Result<Self> {
        for (name, v) in [("lambda_x", lambda_x), ("lambda_y", lambda_y), ("lambda_z", lambda_z)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if lambda_x + lambda_y + lambda_z <= 0.0 {
            return Err(Error::param("at least one speed must be positive"));
        }
        Ok(SpeedTriple { lambda_x, lambda_y, lambda_z })
    }

    pub fn total(&self) -> f64 {
        self.lambda_x + self.lambda_y + self.lambda_z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lambda_x, self.lambda_y, self.lambda_z]
    }
}

impl std::fmt::Display for SpeedTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.lambda_x, self.lambda_y, self.lambda_z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        let err = ChainSpec::from_dense(&[vec![0.5, 0.4], vec![1.0, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("row 0"), "{err}");
        assert!(ChainSpec::from_dense(&[vec![1.5, -0.5], vec![1.0, 0.0]]).is_err());
        assert!(ChainSpec::from_dense(&[vec![1.0]]).is_err());
    }

    #[test]
    fn rejects_reducible() {
        let err = ChainSpec::from_dense(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::InvalidChain(_)));
    }

    #[test]
    fn family_lists() {
        let f = Family::parse_list("cycle:3..5,hypercube:2@0.25,trap:20@6").unwrap();
        assert_eq!(f.len(), 5);
        assert_eq!(f[3], Family::Hypercube { d: 2, eps: Some(0.25) });
        assert_eq!(f[4], Family::Trap { n: 20, c: 6.0 });
        for fam in &f {
            assert_eq!(fam.build().unwrap().family(), fam);
        }
        assert!(Family::parse_list("cycle:5..3").is_err());
        assert!(Family::parse_list("torus:3").is_err());
        assert!(Family::parse_list("cycle").is_err());
    }

    #[test]
    fn speed_validation() {
        assert!(SpeedTriple::new(1.0, -1.0, 0.0).is_err());
        assert!(SpeedTriple::new(0.0, 0.0, 0.0).is_err());
        assert!(SpeedTriple::new(f64::NAN, 1.0, 0.0).is_err());
        assert_eq!(SpeedTriple::new(1.0, 0.5, 2.0).unwrap().total(), 3.5);
    }

    #[test]
    fn apply_matches_dense() {
        let c = build_cycle(5, false).unwrap();
        let v: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let mut out = vec![0.0; 5];
        c.apply(&v, &mut out);
        let d = c.to_dense() * nalgebra::DVector::from_vec(v);
        for i in 0..5 {
            assert!((out[i] - d[i]).abs() < 1e-15);
        }
    }
}
