//! Vertex connectivity of the underlying graph, and a digraph showing that
//! underlying connectivity says nothing useful about robustness.
//!
//! Connectivity is found by brute force: removal sets are tried in order of
//! increasing size, so the first set whose removal disconnects the underlying
//! graph (or leaves a single vertex) gives the answer. No max-flow machinery;
//! the cap is small enough that `sum C(n, c)` stays trivial.

use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Digraph, NodeId, NodeSubset};
use crate::robustness::{max_r_robustness, Strategy, SubsetPair};

/// Node cap for the brute-force connectivity search.
pub const CONNECTIVITY_NODE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectivityError {
    GraphTooLarge { n: usize, cap: usize },
}

impl fmt::Display for ConnectivityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectivityError::GraphTooLarge { n, cap } => {
                write!(f, "graph has {n} nodes; brute-force connectivity is capped at {cap}")
            }
        }
    }
}

fn mask_connected(adj: &[u64], remaining: u64) -> bool {
    let start = remaining.trailing_zeros() as usize;
    let mut visited = 1u64 << start;
    loop {
        let mut next = visited;
        let mut rem = visited;
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            next |= adj[i] & remaining;
        }
        if next == visited {
            return visited == remaining;
        }
        visited = next;
    }
}

/// Ascending masks of exactly `ones` set bits below bit `n` (Gosper's hack).
fn combinations(n: usize, ones: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let mut next = if ones == 0 { Some(0u64) } else { Some((1u64 << ones) - 1) };
    core::iter::from_fn(move || {
        let v = next?;
        if v >= limit {
            next = None;
            return None;
        }
        next = if v == 0 {
            None
        } else {
            let low = v & v.wrapping_neg();
            let carry = v + low;
            Some(carry | ((v ^ carry) / low) >> 2)
        };
        Some(v)
    })
}

/// Vertex connectivity of the underlying (symmetric-closure) graph: the
/// least number of removals leaving a disconnected graph or a single vertex.
/// A complete underlying graph therefore reports `n - 1`.
pub fn underlying_vertex_connectivity(g: &Digraph) -> Result<usize, ConnectivityError> {
    let n = g.node_count();
    if n > CONNECTIVITY_NODE_CAP {
        return Err(ConnectivityError::GraphTooLarge { n, cap: CONNECTIVITY_NODE_CAP });
    }
    let und = g.underlying_graph();
    let adj: Vec<u64> = und.in_masks().expect("cap is below mask width").to_vec();
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    for c in 0..n {
        for removal in combinations(n, c) {
            let remaining = full & !removal;
            if remaining.count_ones() == 1 || !mask_connected(&adj, remaining) {
                return Ok(c);
            }
        }
    }
    unreachable!("removing n-1 nodes always leaves a single vertex")
}

/// The two defining groups of [`build_connectivity_counterexample`].
pub fn counterexample_groups() -> SubsetPair {
    SubsetPair {
        s1: NodeSubset::from_mask(8, 0x0f),
        s2: NodeSubset::from_mask(8, 0xf0),
    }
}

/// A digraph whose underlying graph is 4-connected yet which is only
/// 1-robust, so undirected connectivity cannot certify robustness.
///
/// Two complete groups of four, {0..3} and {4..7}, with a two-way perfect
/// matching between them: every node sees exactly one in-neighbor outside
/// its own group, so the group pair is never 2-reachable, while the
/// underlying graph needs four removals to split. The stated properties are
/// re-checked on every build; a failure is a defect, not an input error.
pub fn build_connectivity_counterexample() -> Digraph {
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for group in [0u32, 4] {
        for i in group..group + 4 {
            for j in group..group + 4 {
                if i != j {
                    edges.push((i, j));
                }
            }
        }
    }
    for i in 0u32..4 {
        edges.push((i, i + 4));
        edges.push((i + 4, i));
    }
    let g = Digraph::new(8, edges).expect("fixed edge list is valid");

    let kappa = underlying_vertex_connectivity(&g).expect("8 nodes is within the cap");
    assert_eq!(kappa, 4, "counterexample self-validation: connectivity");
    let report = max_r_robustness(&g, Strategy::PartitionsOnly).expect("8 nodes fits the budget");
    assert_eq!(report.max_r, 1, "counterexample self-validation: robustness");
    let groups = counterexample_groups();
    for (own, _other) in [(&groups.s1, &groups.s2), (&groups.s2, &groups.s1)] {
        for i in own.iter() {
            let outside = g
                .in_neighbor_list(i)
                .expect("node in range")
                .iter()
                .filter(|&&j| !own.contains(j))
                .count();
            assert_eq!(outside, 1, "counterexample self-validation: cross in-neighbors of {i}");
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_k_circulant;

    #[test]
    fn complete_graphs_report_n_minus_one() {
        for n in [2usize, 4, 5] {
            let g = make_k_circulant(n, n - 1).unwrap();
            assert_eq!(underlying_vertex_connectivity(&g).unwrap(), n - 1);
        }
    }

    #[test]
    fn two_cycle_has_connectivity_one() {
        let g = make_k_circulant(2, 1).unwrap();
        assert_eq!(underlying_vertex_connectivity(&g).unwrap(), 1);
    }

    #[test]
    fn disconnected_and_trivial_graphs() {
        let edgeless = Digraph::new(3, []).unwrap();
        assert_eq!(underlying_vertex_connectivity(&edgeless).unwrap(), 0);
        let single = Digraph::new(1, []).unwrap();
        assert_eq!(underlying_vertex_connectivity(&single).unwrap(), 0);
    }

    #[test]
    fn directed_cycle_needs_one_removal() {
        // Underlying graph is the undirected cycle: connectivity 2.
        let g = make_k_circulant(5, 1).unwrap();
        assert_eq!(underlying_vertex_connectivity(&g).unwrap(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Digraph::new(21, []).unwrap();
        assert_eq!(
            underlying_vertex_connectivity(&g),
            Err(ConnectivityError::GraphTooLarge { n: 21, cap: CONNECTIVITY_NODE_CAP })
        );
    }

    #[test]
    fn counterexample_has_the_advertised_gap() {
        let g = build_connectivity_counterexample();
        assert_eq!(underlying_vertex_connectivity(&g).unwrap(), 4);
        let report = max_r_robustness(&g, Strategy::PartitionsOnly).unwrap();
        assert_eq!(report.max_r, 1);
    }
}
