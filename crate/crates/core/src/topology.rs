//! Graph semantics of a multi-reservoir: which encoders feed which, which
//! encoders ever see the external input, and the order in which they have to
//! be updated inside one time step.
//!
//! Indices are 0-based throughout. `A[i][j] = true` means the output of
//! encoder `i` is an input of encoder `j`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("graph still contains a cycle through encoder {0}")]
    CyclicGraph(usize),
}

/// Square boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    k: usize,
    bits: Vec<bool>,
}

impl BitMatrix {
    pub fn new(k: usize) -> Self {
        BitMatrix { k, bits: vec![false; k * k] }
    }

    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Self {
        let mut m = BitMatrix::new(k);
        for &(i, j) in edges {
            m.set(i, j, true);
        }
        m
    }

    /// Every off-diagonal entry set.
    pub fn complete(k: usize) -> Self {
        let mut m = BitMatrix::new(k);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.k + j] = v;
    }

    /// Set entries in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.k * self.k).filter(|&idx| self.bits[idx]).map(move |idx| (idx / self.k, idx % self.k))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.k).any(|i| self.get(i, i))
    }

    pub fn clear_diagonal(&mut self) {
        for i in 0..self.k {
            self.set(i, i, false);
        }
    }

    /// True if every set entry of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitMatrix) -> bool {
        self.k == other.k && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_acyclic(&self) -> bool {
        topo_order(self).is_ok()
    }
}

/// Reflexive transitive closure of an adjacency matrix: entry `(i, j)` is set
/// iff `j` can be reached from `i` by a path of length zero or more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityMatrix(BitMatrix);

impl ReachabilityMatrix {
    #[inline]
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.0.get(from, to)
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    pub fn as_bits(&self) -> &BitMatrix {
        &self.0
    }
}

/// Boolean Floyd–Warshall, O(k³).
pub fn closure(a: &BitMatrix) -> ReachabilityMatrix {
    let k = a.k;
    let mut r = a.clone();
    for i in 0..k {
        r.set(i, i, true);
    }
    for via in 0..k {
        for i in 0..k {
            if !r.get(i, via) {
                continue;
            }
            for j in 0..k {
                if r.get(via, j) {
                    r.set(i, j, true);
                }
            }
        }
    }
    ReachabilityMatrix(r)
}

/// Validity and rank of a configured multi-reservoir, plus what DAG repair
/// had to do to make it steppable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyReport {
    pub reachability: ReachabilityMatrix,
    pub valid_mask: Vec<bool>,
    pub rank: usize,
    pub eval_order: Vec<usize>,
    pub removed_edges: Vec<(usize, usize)>,
}

/// An encoder is valid when some externally driven encoder reaches it
/// (itself included).
pub fn rank_and_validity(a: &BitMatrix, d: &[bool]) -> (ReachabilityMatrix, Vec<bool>, usize) {
    assert_eq!(a.k, d.len(), "adjacency and input mask disagree on k");
    let r = closure(a);
    let valid: Vec<bool> = (0..a.k).map(|i| (0..a.k).any(|j| d[j] && r.reaches(j, i))).collect();
    let rank = valid.iter().filter(|&&v| v).count();
    (r, valid, rank)
}

/// Full analysis: repair cycles, then compute order, reachability and rank
/// on the repaired graph.
pub fn analyze(a: &BitMatrix, d: &[bool]) -> (BitMatrix, TopologyReport) {
    let (repaired, removed_edges) = repair_dag(a);
    let eval_order = topo_order(&repaired).expect("repaired graph is acyclic");
    let (reachability, valid_mask, rank) = rank_and_validity(&repaired, d);
    let report = TopologyReport { reachability, valid_mask, rank, eval_order, removed_edges };
    (repaired, report)
}

/// Greedy row-major cycle removal: edges are visited `(0,0), (0,1), …` and
/// kept unless they close a directed cycle among the edges already kept.
pub fn repair_dag(a: &BitMatrix) -> (BitMatrix, Vec<(usize, usize)>) {
    let k = a.k;
    let mut kept = BitMatrix::new(k);
    let mut removed = Vec::new();
    for (i, j) in a.edges() {
        if i == j || reachable(&kept, j, i) {
            removed.push((i, j));
        } else {
            kept.set(i, j, true);
        }
    }
    (kept, removed)
}

fn reachable(a: &BitMatrix, from: usize, to: usize) -> bool {
    let mut seen = vec![false; a.k];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for w in 0..a.k {
            if a.get(v, w) && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Kahn's algorithm, always releasing the smallest available index first.
pub fn topo_order(a: &BitMatrix) -> Result<Vec<usize>, TopologyError> {
    let k = a.k;
    let mut indegree = vec![0usize; k];
    for (_, j) in a.edges() {
        indegree[j] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..k).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for w in 0..k {
            if a.get(v, w) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
    }
    if order.len() < k {
        let stuck = (0..k).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(TopologyError::CyclicGraph(stuck));
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedTopology {
    /// Deep stack: only the first encoder is driven, each feeds the next.
    Chain,
    /// Independent parallel encoders, all driven.
    Grouped,
}

/// Input mask and adjacency of the fixed baseline topologies.
pub fn fixed_topology(kind: FixedTopology, k: usize) -> (Vec<bool>, BitMatrix) {
    assert!(k >= 1);
    match kind {
        FixedTopology::Chain => {
            let mut d = vec![false; k];
            d[0] = true;
            let edges: Vec<_> = (0..k - 1).map(|i| (i, i + 1)).collect();
            (d, BitMatrix::from_edges(k, &edges))
        }
        FixedTopology::Grouped => (vec![true; k], BitMatrix::new(k)),
    }
}
