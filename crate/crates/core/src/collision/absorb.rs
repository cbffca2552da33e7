use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::product::{ProductClass, ProductGenerator};
use crate::chain::{ChainSpec, SpeedTriple};
use crate::error::{Error, Result};
use crate::linalg::SparseSystem;

/// Default ceiling on `n^3` for exact three-walker solves.
pub const DEFAULT_CAPACITY: usize = 300_000;

/// Transient blocks up to this size are solved by dense LU.
const DENSE_LIMIT: usize = 1500;
const SOLVE_TOL: f64 = 1e-14;

/// How a time-0 triple point `x = y = z` is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// `M_good < M_bad`: the triple point is a failure.
    #[default]
    Strict,
    /// `M_good <= M_bad`: the triple point is a success.
    Weak,
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::Strict => "strict",
            TieRule::Weak => "weak",
        })
    }
}

impl FromStr for TieRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(TieRule::Strict),
            "weak" => Ok(TieRule::Weak),
            other => Err(Error::param(format!("tie rule must be strict or weak, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Stationary mass of the product start by time-0 class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartBreakdown {
    pub good: f64,
    /// Includes the triple points.
    pub bad: f64,
    /// The part of `bad` with `x = y = z`.
    pub triple: f64,
    pub transient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    /// Probability that X meets Y before either meets Z, from the product
    /// stationary start.
    pub probability: f64,
    pub tie_rule: TieRule,
    pub method: Method,
    pub speeds: SpeedTriple,
    pub start_breakdown: StartBreakdown,
    /// Max-norm residual of the absorption system.
    pub residual: f64,
    pub product_states: usize,
}

/// Absorption probabilities into Good for every product state; Good states
/// hold 1 and Bad states 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Absorption {
    pub n: usize,
    pub h: Vec<f64>,
    pub residual: f64,
}

impl Absorption {
    pub fn at(&self, x: usize, y: usize, z: usize, tie_rule: TieRule) -> f64 {
        if tie_rule == TieRule::Weak && x == y && y == z {
            1.0
        } else {
            self.h[(x * self.n + y) * self.n + z]
        }
    }
}

pub fn absorption(chain: &ChainSpec, speeds: &SpeedTriple, capacity: usize) -> Result<Absorption> {
    let n = chain.n();
    let states = n.checked_pow(3).unwrap_or(usize::MAX);
    if states > capacity {
        return Err(Error::CapacityExceeded { needed: states, capacity });
    }
    let gen = ProductGenerator::new(chain, &speeds.as_array())?;
    let total = speeds.total();

    let mut slot = vec![usize::MAX; states];
    let mut transient = Vec::new();
    for (v, s) in slot.iter_mut().enumerate() {
        if gen.class(v) == ProductClass::Transient {
            *s = transient.len();
            transient.push(v);
        }
    }
    let mut sys = SparseSystem {
        diag: vec![1.0; transient.len()],
        off: vec![Vec::new(); transient.len()],
        rhs: vec![0.0; transient.len()],
    };
    // embedded jump chain at uniform rate `total`; self-loops stay on the diagonal
    for (i, &v) in transient.iter().enumerate() {
        gen.for_each_jump(v, |w, r| {
            let p = r / total;
            if w == v {
                sys.diag[i] -= p;
            } else {
                match gen.class(w) {
                    ProductClass::Good => sys.rhs[i] += p,
                    ProductClass::Bad => {}
                    ProductClass::Transient => sys.off[i].push((slot[w], p)),
                }
            }
        });
        if sys.diag[i] <= 0.0 && sys.rhs[i] == 0.0 && sys.off[i].is_empty() {
            // every coordinate that could move is frozen or self-looping
            return Err(Error::solver(format!("product state {v} is absorbing but neither good nor bad")));
        }
    }
    let (sol, residual) = sys.solve(DENSE_LIMIT, SOLVE_TOL)?;
    let mut h = vec![0.0; states];
    for v in 0..states {
        h[v] = match gen.class(v) {
            ProductClass::Good => 1.0,
            ProductClass::Bad => 0.0,
            ProductClass::Transient => sol[slot[v]].clamp(0.0, 1.0),
        };
    }
    Ok(Absorption { n, h, residual })
}

pub fn collision_exact(chain: &ChainSpec, speeds: &SpeedTriple, tie_rule: TieRule) -> Result<CollisionReport> {
    collision_exact_with_capacity(chain, speeds, tie_rule, DEFAULT_CAPACITY)
}

pub fn collision_exact_with_capacity(
    chain: &ChainSpec,
    speeds: &SpeedTriple,
    tie_rule: TieRule,
    capacity: usize,
) -> Result<CollisionReport> {
    let abs = absorption(chain, speeds, capacity)?;
    let pi = &chain.stationary()?.pi;
    let n = chain.n();
    let mut probability = 0.0;
    let mut b = StartBreakdown { good: 0.0, bad: 0.0, triple: 0.0, transient: 0.0 };
    for x in 0..n {
        for y in 0..n {
            let pxy = pi[x] * pi[y];
            for (z, &pz) in pi.iter().enumerate() {
                let w = pxy * pz;
                probability += w * abs.at(x, y, z, tie_rule);
                match super::product::classify(x, y, z) {
                    ProductClass::Good => b.good += w,
                    ProductClass::Bad => {
                        b.bad += w;
                        if x == y {
                            b.triple += w;
                        }
                    }
                    ProductClass::Transient => b.transient += w,
                }
            }
        }
    }
    Ok(CollisionReport {
        probability,
        tie_rule,
        method: Method::Exact,
        speeds: *speeds,
        start_breakdown: b,
        residual: abs.residual,
        product_states: n * n * n,
    })
}

pub fn collision_from(
    chain: &ChainSpec,
    speeds: &SpeedTriple,
    start: (usize, usize, usize),
    tie_rule: TieRule,
) -> Result<f64> {
    let n = chain.n();
    let (x, y, z) = start;
    if x >= n || y >= n || z >= n {
        return Err(Error::param("start state out of range"));
    }
    Ok(absorption(chain, speeds, DEFAULT_CAPACITY)?.at(x, y, z, tie_rule))
}
