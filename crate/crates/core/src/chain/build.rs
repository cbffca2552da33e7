use serde::{Deserialize, Serialize};

use super::{ChainSpec, Family};
use crate::error::{Error, Result};

/// Simple random walk on the complete graph `K_n`.
pub fn build_complete(n: usize) -> Result<ChainSpec> {
    if n < 2 {
        return Err(Error::param(format!("complete graph needs n >= 2, got {n}")));
    }
    let p = 1.0 / (n - 1) as f64;
    let rows = (0..n).map(|x| (0..n).filter(|&y| y != x).map(|y| (y, p)).collect()).collect();
    ChainSpec::from_rows(rows, None, Family::Complete { n })
}

/// Walk on the cycle `Z_n`: `+-1` with probability 1/2 each, or always `+1`
/// when `directed`.
pub fn build_cycle(n: usize, directed: bool) -> Result<ChainSpec> {
    if n < 3 {
        return Err(Error::param(format!("cycle needs n >= 3, got {n}")));
    }
    let rows = (0..n)
        .map(|i| if directed { vec![((i + 1) % n, 1.0)] } else { vec![((i + n - 1) % n, 0.5), ((i + 1) % n, 0.5)] })
        .collect();
    let family = if directed { Family::DirectedCycle { n } } else { Family::Cycle { n } };
    ChainSpec::from_rows(rows, None, family)
}

/// Flip rates of the hypercube coordinates.
///
/// Uniform `1/d` without `eps`; otherwise the geometric profile
/// `q_j = eps^(j-1) (1 - eps) / (1 - eps^d)`, which sums to one.
pub fn hypercube_rates(d: usize, eps: Option<f64>) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::param("hypercube dimension must be >= 1"));
    }
    match eps {
        None => Ok(vec![1.0 / d as f64; d]),
        Some(e) => {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::param(format!("eps must lie in (0,1), got {e}")));
            }
            let denom = 1.0 - e.powi(d as i32);
            Ok((0..d).map(|j| e.powi(j as i32) * (1.0 - e) / denom).collect())
        }
    }
}

/// Walk on `{0,1}^d`: coordinate `j` (bit `j-1` of the state index) flips
/// with probability `q_j`.
pub fn build_hypercube(d: usize, eps: Option<f64>) -> Result<ChainSpec> {
    let q = hypercube_rates(d, eps)?;
    if d > 24 {
        return Err(Error::param(format!("hypercube dimension {d} is too large")));
    }
    let n = 1usize << d;
    let rows = (0..n).map(|u| q.iter().enumerate().map(|(j, &qj)| (u ^ (1 << j), qj)).collect()).collect();
    ChainSpec::from_rows(rows, None, Family::Hypercube { d, eps })
}

/// Index layout of the trap graph.
///
/// Vertex 0 is the hub; `0..=n` is the big clique ("down"); clique `i` of the
/// "up" part occupies `n + 1 + i*k .. n + 1 + (i+1)*k` and its first vertex is
/// the one joined to the hub.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapGraphLayout {
    pub hub: usize,
    pub down: Vec<usize>,
    pub up: Vec<usize>,
    /// Clique id of each up vertex, indexed by `vertex - (n + 1)`.
    pub clique_of: Vec<usize>,
    pub k: usize,
    pub c_param: f64,
    pub n: usize,
}

impl TrapGraphLayout {
    pub fn contact(&self, clique: usize) -> usize {
        self.n + 1 + clique * self.k
    }

    pub fn clique_members(&self, clique: usize) -> std::ops::Range<usize> {
        let start = self.contact(clique);
        start..start + self.k
    }

    pub fn is_down(&self, v: usize) -> bool {
        v <= self.n
    }

    pub fn clique(&self, v: usize) -> Option<usize> {
        (v > self.n).then(|| self.clique_of[v - self.n - 1])
    }
}

/// Smallest integer `k` with `k^2 >= c*n`.
fn clique_size(n: usize, c: f64) -> usize {
    let target = c * n as f64;
    let mut k = target.sqrt().ceil() as usize;
    while k > 0 && ((k - 1) * (k - 1)) as f64 >= target {
        k -= 1;
    }
    while ((k * k) as f64) < target {
        k += 1;
    }
    k
}

/// Simple random walk on the trap graph: a clique on `n + 1` vertices plus
/// `n` disjoint cliques of size `k = ceil(sqrt(C n))`, each joined to the hub
/// by one edge.
pub fn build_trap_graph(n: usize, c_param: f64) -> Result<(ChainSpec, TrapGraphLayout)> {
    if n < 2 {
        return Err(Error::param(format!("trap graph needs n >= 2, got {n}")));
    }
    if !(c_param > 0.0) || !c_param.is_finite() {
        return Err(Error::param(format!("C must be positive, got {c_param}")));
    }
    let k = clique_size(n, c_param);
    if k < 2 {
        return Err(Error::param(format!("clique size k = {k} < 2 for n={n}, C={c_param}")));
    }
    let total = n + 1 + n * k;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut link = |a: usize, b: usize| {
        adj[a].push(b);
        adj[b].push(a);
    };
    for a in 0..=n {
        for b in a + 1..=n {
            link(a, b);
        }
    }
    let mut clique_of = Vec::with_capacity(n * k);
    for i in 0..n {
        let base = n + 1 + i * k;
        for a in 0..k {
            clique_of.push(i);
            for b in a + 1..k {
                link(base + a, base + b);
            }
        }
        link(0, base);
    }
    let rows = adj
        .into_iter()
        .map(|nb| {
            let p = 1.0 / nb.len() as f64;
            nb.into_iter().map(|y| (y, p)).collect()
        })
        .collect();
    let chain = ChainSpec::from_rows(rows, None, Family::Trap { n, c: c_param })?;
    let layout =
        TrapGraphLayout { hub: 0, down: (0..=n).collect(), up: (n + 1..total).collect(), clique_of, k, c_param, n };
    Ok((chain, layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_sums_ok(c: &ChainSpec) {
        for x in 0..c.n() {
            let s: f64 = c.row(x).iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn complete_entries() {
        let k3 = build_complete(3).unwrap();
        assert_eq!(k3.prob(0, 1), 0.5);
        assert_eq!(k3.prob(0, 0), 0.0);
        let k2 = build_complete(2).unwrap();
        assert_eq!(k2.prob(0, 1), 1.0);
        assert_eq!(k2.prob(1, 0), 1.0);
        let k8 = build_complete(8).unwrap();
        row_sums_ok(&k8);
        assert!(k8.stationary().unwrap().pi.iter().all(|&p| (p - 0.125).abs() < 1e-15));
        assert!(matches!(build_complete(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn cycle_entries() {
        let c4 = build_cycle(4, false).unwrap();
        assert_eq!(c4.prob(0, 1), 0.5);
        assert_eq!(c4.prob(0, 3), 0.5);
        let d5 = build_cycle(5, true).unwrap();
        for i in 0..5 {
            assert_eq!(d5.prob(i, (i + 1) % 5), 1.0);
        }
        assert_eq!(build_cycle(3, false).unwrap().rows(), build_complete(3).unwrap().rows());
        assert!(build_cycle(2, false).is_err());
    }

    #[test]
    fn hypercube_entries() {
        let h2 = build_hypercube(2, None).unwrap();
        assert_eq!(h2.prob(0b00, 0b01), 0.5);
        assert_eq!(h2.prob(0b00, 0b10), 0.5);
        let q = hypercube_rates(3, Some(0.5)).unwrap();
        let expect = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (a, b) in q.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        for eps in [0.3, 0.9] {
            let h1 = build_hypercube(1, Some(eps)).unwrap();
            assert_eq!(h1.prob(0, 1), 1.0);
            assert_eq!(h1.prob(1, 0), 1.0);
        }
        assert!(build_hypercube(2, Some(1.0)).is_err());
        assert!(build_hypercube(2, Some(0.0)).is_err());
    }

    #[test]
    fn rate_sums() {
        for d in 1..=20 {
            for eps in [0.01, 0.1, 0.5, 0.9] {
                let s: f64 = hypercube_rates(d, Some(eps)).unwrap().iter().sum();
                assert!((s - 1.0).abs() <= 1e-14, "d={d} eps={eps} sum={s}");
            }
        }
    }

    #[test]
    fn trap_layout() {
        let (c, l) = build_trap_graph(4, 12.0).unwrap();
        assert_eq!(l.k, 7);
        assert_eq!(c.n(), 33);
        assert_eq!(c.row(l.hub).len(), 8);
        assert_eq!(l.down.len(), 5);
        for i in 0..4 {
            for v in l.clique_members(i) {
                let expect = if v == l.contact(i) { l.k } else { l.k - 1 };
                assert_eq!(c.row(v).len(), expect);
                assert_eq!(l.clique(v), Some(i));
            }
        }
        row_sums_ok(&c);
    }

    #[test]
    fn clique_size_is_ceiling() {
        assert_eq!(clique_size(4, 12.0), 7);
        assert_eq!(clique_size(3, 12.0), 6);
        assert_eq!(clique_size(4, 16.0), 8);
        assert!(matches!(build_trap_graph(2, 0.5), Err(Error::InvalidParameter(_))));
    }
}
