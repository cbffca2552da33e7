//! Detailed balance and transitivity.
//!
//! Transitivity is decided by searching, for every state `y`, for a bijection
//! `phi` with `phi(0) = y` and `P(a,b) = P(phi(a), phi(b))` for all pairs.
//! The search individualizes `0` on one side and `y` on the other, refines
//! both colorings with a shared signature table (out- and in-neighbour
//! colors paired with exact transition weights) and backtracks on the first
//! smallest non-singleton cell. Every map that is reported has been checked
//! entry by entry.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::ChainSpec;
use crate::error::Result;

pub const DEFAULT_REVERSIBILITY_TOL: f64 = 1e-10;
pub const DEFAULT_TRANSITIVITY_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reversibility {
    pub reversible: bool,
    /// `max |pi(x)P(x,y) - pi(y)P(y,x)|` over all pairs.
    pub max_residual: f64,
    /// `max_x sum_y |pi(x)P(x,y) - pi(y)P(y,x)|`.
    pub max_row_residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Transitivity {
    /// `automorphisms[y]` maps state 0 to `y`.
    Transitive {
        automorphisms: Vec<Vec<usize>>,
    },
    /// No automorphism maps `witness.0` to `witness.1`.
    NotTransitive {
        witness: (usize, usize),
    },
    Unknown {
        expansions: u64,
    },
}

impl Transitivity {
    pub fn is_transitive(&self) -> bool {
        matches!(self, Transitivity::Transitive { .. })
    }

    /// An automorphism sending `from` to `to`, composed from the stored maps.
    pub fn map_between(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let Transitivity::Transitive { automorphisms } = self else {
            return None;
        };
        let a = &automorphisms[from];
        let b = &automorphisms[to];
        let mut a_inv = vec![0; a.len()];
        for (i, &v) in a.iter().enumerate() {
            a_inv[v] = i;
        }
        Some(a_inv.iter().map(|&i| b[i]).collect())
    }

    pub fn label(&self) -> &'static str {
        match self {
            Transitivity::Transitive { .. } => "transitive",
            Transitivity::NotTransitive { .. } => "not-transitive",
            Transitivity::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub reversibility: Reversibility,
    pub transitivity: Transitivity,
}

pub fn structure_report(chain: &ChainSpec, tol: f64, budget: u64) -> Result<StructureReport> {
    Ok(StructureReport { reversibility: check_reversible(chain, tol)?, transitivity: check_transitive(chain, budget) })
}

pub fn check_reversible(chain: &ChainSpec, tol: f64) -> Result<Reversibility> {
    let pi = &chain.stationary()?.pi;
    let n = chain.n();
    let mut row_res = vec![0.0; n];
    let mut max_residual: f64 = 0.0;
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            let back = chain.prob(y, x);
            let r = (pi[x] * p - pi[y] * back).abs();
            max_residual = max_residual.max(r);
            row_res[x] += r;
            if back == 0.0 {
                row_res[y] += r;
            }
        }
    }
    let max_row_residual = row_res.iter().copied().fold(0.0, f64::max);
    Ok(Reversibility { reversible: max_residual <= tol, max_residual, max_row_residual, tol })
}

pub fn check_transitive(chain: &ChainSpec, budget: u64) -> Transitivity {
    let graph = Graph::new(chain);
    let n = chain.n();
    let mut maps: Vec<Option<Vec<usize>>> = vec![None; n];
    maps[0] = Some((0..n).collect());
    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut expansions = 0u64;

    for y in 1..n {
        if maps[y].is_some() {
            continue;
        }
        let mut left = vec![0u32; n];
        let mut right = vec![0u32; n];
        left[0] = 1;
        right[y] = 1;
        match graph.search(left, right, &mut expansions, budget) {
            Search::Found(phi) => {
                debug_assert_eq!(phi[0], y);
                if !graph.verify(&phi) {
                    // refinement bug; treat as inconclusive rather than lie
                    return Transitivity::Unknown { expansions };
                }
                generators.push(phi);
                close_orbit(&mut maps, &generators);
            }
            Search::Exhausted => return Transitivity::NotTransitive { witness: (0, y) },
            Search::Budget => return Transitivity::Unknown { expansions },
        }
    }
    let automorphisms: Vec<Vec<usize>> = maps.into_iter().map(|m| m.expect("orbit covers all states")).collect();
    if automorphisms.iter().enumerate().all(|(y, phi)| phi[0] == y && graph.verify(phi)) {
        Transitivity::Transitive { automorphisms }
    } else {
        Transitivity::Unknown { expansions }
    }
}

/// Extend `maps` with every composition `g o maps[w]`.
fn close_orbit(maps: &mut [Option<Vec<usize>>], generators: &[Vec<usize>]) {
    let mut queue: VecDeque<usize> = (0..maps.len()).filter(|&y| maps[y].is_some()).collect();
    while let Some(w) = queue.pop_front() {
        let base = maps[w].clone().expect("queued states have maps");
        for g in generators {
            let target = g[w];
            if maps[target].is_none() {
                maps[target] = Some(base.iter().map(|&i| g[i]).collect());
                queue.push_back(target);
            }
        }
    }
}

enum Search {
    Found(Vec<usize>),
    Exhausted,
    Budget,
}

type Signature = (u32, Vec<(u64, u32)>, Vec<(u64, u32)>);

struct Graph<'a> {
    chain: &'a ChainSpec,
    incoming: Vec<Vec<(usize, u64)>>,
}

impl<'a> Graph<'a> {
    fn new(chain: &'a ChainSpec) -> Self {
        let mut incoming = vec![Vec::new(); chain.n()];
        for x in 0..chain.n() {
            for &(y, p) in chain.row(x) {
                incoming[y].push((x, p.to_bits()));
            }
        }
        Graph { chain, incoming }
    }

    fn signature(&self, v: usize, colors: &[u32]) -> Signature {
        let mut out: Vec<(u64, u32)> = self.chain.row(v).iter().map(|&(y, p)| (p.to_bits(), colors[y])).collect();
        let mut inc: Vec<(u64, u32)> = self.incoming[v].iter().map(|&(x, w)| (w, colors[x])).collect();
        out.sort_unstable();
        inc.sort_unstable();
        (colors[v], out, inc)
    }

    /// Refine both colorings to a common stable partition. Returns false if
    /// the two sides stop being compatible.
    fn refine(&self, left: &mut [u32], right: &mut [u32]) -> bool {
        let n = left.len();
        let mut classes = count_classes(left);
        loop {
            let ls: Vec<Signature> = (0..n).map(|v| self.signature(v, left)).collect();
            let rs: Vec<Signature> = (0..n).map(|v| self.signature(v, right)).collect();
            let mut table: BTreeMap<&Signature, u32> = BTreeMap::new();
            for s in ls.iter().chain(&rs) {
                table.insert(s, 0);
            }
            for (i, c) in table.values_mut().enumerate() {
                *c = i as u32;
            }
            for v in 0..n {
                left[v] = table[&ls[v]];
                right[v] = table[&rs[v]];
            }
            let mut lc = left.to_vec();
            let mut rc = right.to_vec();
            lc.sort_unstable();
            rc.sort_unstable();
            if lc != rc {
                return false;
            }
            let now = count_classes(left);
            if now == classes {
                return true;
            }
            classes = now;
        }
    }

    fn search(&self, mut left: Vec<u32>, mut right: Vec<u32>, expansions: &mut u64, budget: u64) -> Search {
        *expansions += 1;
        if *expansions > budget {
            return Search::Budget;
        }
        if !self.refine(&mut left, &mut right) {
            return Search::Exhausted;
        }
        let n = left.len();
        let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &left {
            *sizes.entry(c).or_default() += 1;
        }
        let cell = sizes.iter().filter(|(_, &s)| s > 1).min_by_key(|(&c, &s)| (s, c)).map(|(&c, _)| c);
        let Some(cell) = cell else {
            let mut phi = vec![0; n];
            for u in 0..n {
                phi[u] = right.iter().position(|&c| c == left[u]).expect("matching class");
            }
            return if self.verify(&phi) { Search::Found(phi) } else { Search::Exhausted };
        };
        let fresh = left.iter().chain(&right).copied().max().unwrap_or(0) + 1;
        let u = left.iter().position(|&c| c == cell).expect("cell is non-empty");
        for v in (0..n).filter(|&v| right[v] == cell) {
            let mut l = left.clone();
            let mut r = right.clone();
            l[u] = fresh;
            r[v] = fresh;
            match self.search(l, r, expansions, budget) {
                Search::Exhausted => continue,
                other => return other,
            }
        }
        Search::Exhausted
    }

    fn verify(&self, phi: &[usize]) -> bool {
        let n = self.chain.n();
        let mut seen = vec![false; n];
        for &v in phi {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        (0..n).all(|x| {
            let row = self.chain.row(x);
            row.len() == self.chain.row(phi[x]).len()
                && row.iter().all(|&(y, p)| self.chain.prob(phi[x], phi[y]).to_bits() == p.to_bits())
        })
    }
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube, build_trap_graph};

    #[test]
    fn reversibility_residuals() {
        let r = check_reversible(&build_complete(4).unwrap(), 1e-10).unwrap();
        assert!(r.reversible);
        assert_eq!(r.max_residual, 0.0);

        let r = check_reversible(&build_cycle(5, true).unwrap(), 1e-10).unwrap();
        assert!(!r.reversible);
        // one-way flux pi(x) * 1 on each arc; each state has one arc in and one out
        assert!((r.max_residual - 0.2).abs() < 1e-15);
        assert!((r.max_row_residual - 0.4).abs() < 1e-15);

        let (trap, _) = build_trap_graph(3, 12.0).unwrap();
        assert!(check_reversible(&trap, 1e-10).unwrap().reversible);
    }

    #[test]
    fn transitive_families() {
        for c in [
            build_hypercube(3, None).unwrap(),
            build_cycle(6, false).unwrap(),
            build_cycle(7, true).unwrap(),
            build_complete(6).unwrap(),
            build_hypercube(4, Some(0.3)).unwrap(),
        ] {
            let t = check_transitive(&c, DEFAULT_TRANSITIVITY_BUDGET);
            let Transitivity::Transitive { automorphisms } = &t else { panic!("{} not transitive: {t:?}", c.family()) };
            for (y, phi) in automorphisms.iter().enumerate() {
                assert_eq!(phi[0], y);
                for x in 0..c.n() {
                    for z in 0..c.n() {
                        assert_eq!(c.prob(x, z), c.prob(phi[x], phi[z]));
                    }
                }
            }
            let m = t.map_between(2, 1).unwrap();
            assert_eq!(m[2], 1);
        }
    }

    #[test]
    fn trap_graph_is_not_transitive() {
        let (c, _) = build_trap_graph(3, 12.0).unwrap();
        assert!(matches!(check_transitive(&c, DEFAULT_TRANSITIVITY_BUDGET), Transitivity::NotTransitive { .. }));
    }

    #[test]
    fn weighted_asymmetry_detected() {
        // path 0-1-2 with a self loop at one end only
        let c = ChainSpec::from_dense(&[vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(!check_transitive(&c, 1000).is_transitive());
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let c = build_complete(6).unwrap();
        assert!(matches!(check_transitive(&c, 1), Transitivity::Unknown { .. }));
    }

    #[test]
    fn all_small_transitive_families_within_budget() {
        let mut chains = Vec::new();
        for n in 2..=64 {
            chains.push(build_complete(n).unwrap());
        }
        for n in 3..=64 {
            chains.push(build_cycle(n, false).unwrap());
            chains.push(build_cycle(n, true).unwrap());
        }
        for d in 1..=6 {
            chains.push(build_hypercube(d, None).unwrap());
            chains.push(build_hypercube(d, Some(0.1)).unwrap());
        }
        for c in chains {
            assert!(check_transitive(&c, DEFAULT_TRANSITIVITY_BUDGET).is_transitive(), "{}", c.family());
        }
    }
}
