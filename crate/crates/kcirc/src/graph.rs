//! Immutable digraphs and the circulant family.
//!
//! Nodes are `0..n` and an edge `(i, j)` means node `j` receives from node
//! `i`. Graphs are immutable after construction: the edge set, per-node
//! neighbor lists, and (for `n <= 64`) per-node in-neighbor bitmasks are all
//! built once, so a graph can be shared freely across worker threads.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Node identifier, always in `[0, n)` for the owning graph.
pub type NodeId = u32;

/// Node count above which per-node `u64` in-neighbor masks are unavailable
/// and the exhaustive robustness enumeration refuses to run.
pub const MASK_WIDTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// A graph must have at least one node (circulant families need two).
    InvalidNodeCount { n: usize, min: usize },
    /// Edge endpoint or queried node is not in `[0, n)`.
    NodeOutOfRange { node: NodeId, n: usize },
    /// Self-loops are not representable.
    SelfLoop { node: NodeId },
    /// Circulant offset list must be nonempty.
    NoOffsets,
    /// Offsets must be strictly increasing; this one is not above its predecessor.
    OffsetNotIncreasing { offset: u32 },
    /// Offsets must lie in the open interval `(0, n)`.
    OffsetOutOfRange { offset: u32, n: usize },
    /// `k` for a k-circulant digraph must lie in `[1, n-1]`.
    KOutOfRange { k: usize, n: usize },
    /// Subset was built for a different node count than the graph it is used with.
    SubsetSizeMismatch { subset_n: usize, graph_n: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::InvalidNodeCount { n, min } => {
                write!(f, "node count {n} is below the minimum of {min}")
            }
            GraphError::NodeOutOfRange { node, n } => {
                write!(f, "node {node} out of range for a graph on {n} nodes")
            }
            GraphError::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            GraphError::NoOffsets => write!(f, "circulant offset list is empty"),
            GraphError::OffsetNotIncreasing { offset } => {
                write!(f, "offset {offset} breaks the strictly increasing order")
            }
            GraphError::OffsetOutOfRange { offset, n } => {
                write!(f, "offset {offset} outside the legal interval (0, {n})")
            }
            GraphError::KOutOfRange { k, n } => {
                write!(f, "k = {k} outside the legal interval [1, {}]", n - 1)
            }
            GraphError::SubsetSizeMismatch { subset_n, graph_n } => {
                write!(f, "subset over {subset_n} nodes used with a graph on {graph_n} nodes")
            }
        }
    }
}

/// Specification of a circulant digraph: `n` nodes, out-edges `i -> (i+a) mod n`
/// for every offset `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantSpec {
    pub n: usize,
    /// Strictly increasing, each in `(0, n)`.
    pub offsets: Vec<u32>,
}

impl CirculantSpec {
    pub fn new(n: usize, offsets: Vec<u32>) -> Result<Self, GraphError> {
        let spec = CirculantSpec { n, offsets };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.n < 2 {
            return Err(GraphError::InvalidNodeCount { n: self.n, min: 2 });
        }
        if self.offsets.is_empty() {
            return Err(GraphError::NoOffsets);
        }
        let mut prev = 0u32; // offsets start strictly above zero
        for &a in &self.offsets {
            if a as usize >= self.n || a == 0 {
                return Err(GraphError::OffsetOutOfRange { offset: a, n: self.n });
            }
            if a <= prev && prev != 0 {
                return Err(GraphError::OffsetNotIncreasing { offset: a });
            }
            prev = a;
        }
        Ok(())
    }
}

/// A set of nodes over a fixed node count, stored as a bitmask.
///
/// Supports any `n`; the exhaustive enumeration in [`crate::robustness`]
/// additionally requires `n <= 64` so that a set fits one machine word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSubset {
    n: usize,
    words: Vec<u64>,
}

impl NodeSubset {
    pub fn empty(n: usize) -> Self {
        NodeSubset { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for node in 0..n {
            s.insert(node as NodeId);
        }
        s
    }

    /// Build from a `u64` mask; only valid for `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= MASK_WIDTH);
        debug_assert!(n == MASK_WIDTH || mask >> n == 0);
        NodeSubset { n, words: vec![mask] }
    }

    pub fn from_nodes(n: usize, nodes: &[NodeId]) -> Result<Self, GraphError> {
        let mut s = Self::empty(n);
        for &node in nodes {
            if (node as usize) >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
            s.insert(node);
        }
        Ok(s)
    }

    /// The single-word mask when `n <= 64`.
    pub fn as_mask(&self) -> Option<u64> {
        if self.n <= MASK_WIDTH {
            Some(self.words[0])
        } else {
            None
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, node: NodeId) {
        debug_assert!((node as usize) < self.n);
        self.words[node as usize / 64] |= 1u64 << (node % 64);
    }

    pub fn contains(&self, node: NodeId) -> bool {
        (node as usize) < self.n && self.words[node as usize / 64] >> (node % 64) & 1 == 1
    }

    /// Cardinality |S|.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection_len(&self, other: &NodeSubset) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &NodeSubset) -> bool {
        self.intersection_len(other) == 0
    }

    /// Member nodes in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(w as NodeId * 64 + b)
            })
        })
    }
}

/// An immutable digraph on nodes `0..n`.
///
/// Equality and serialization are defined by `(n, edges)`; the neighbor
/// lists and masks are derived at construction.
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    /// Sorted lexicographically, deduplicated.
    edges: Vec<(NodeId, NodeId)>,
    in_lists: Vec<Vec<NodeId>>,
    out_lists: Vec<Vec<NodeId>>,
    /// Per-node in-neighbor masks, present when `n <= 64`.
    in_masks: Option<Vec<u64>>,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}
impl Eq for Digraph {}

impl Digraph {
    /// Build a digraph from an edge iterator. Duplicate edges collapse;
    /// out-of-range endpoints and self-loops are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, GraphError> {
        if n < 1 {
            return Err(GraphError::InvalidNodeCount { n, min: 1 });
        }
        let mut list: Vec<(NodeId, NodeId)> = Vec::new();
        for (src, dst) in edges {
            if (src as usize) >= n {
                return Err(GraphError::NodeOutOfRange { node: src, n });
            }
            if (dst as usize) >= n {
                return Err(GraphError::NodeOutOfRange { node: dst, n });
            }
            if src == dst {
                return Err(GraphError::SelfLoop { node: src });
            }
            list.push((src, dst));
        }
        list.sort_unstable();
        list.dedup();

        let mut in_lists = vec![Vec::new(); n];
        let mut out_lists = vec![Vec::new(); n];
        for &(src, dst) in &list {
            in_lists[dst as usize].push(src);
            out_lists[src as usize].push(dst);
        }
        for l in &mut in_lists {
            l.sort_unstable();
        }
        // out_lists are already sorted: edges are sorted by (src, dst).

        let in_masks = (n <= MASK_WIDTH).then(|| {
            let mut masks = vec![0u64; n];
            for &(src, dst) in &list {
                masks[dst as usize] |= 1u64 << src;
            }
            masks
        });

        Ok(Digraph { n, edges: list, in_lists, out_lists, in_masks })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted lexicographically.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        (src as usize) < self.n && self.out_lists[src as usize].binary_search(&dst).is_ok()
    }

    /// The in-neighbor set K_j as a subset value.
    pub fn in_neighbors(&self, j: NodeId) -> Result<NodeSubset, GraphError> {
        let list = self.in_neighbor_list(j)?;
        NodeSubset::from_nodes(self.n, list)
    }

    pub fn in_neighbor_list(&self, j: NodeId) -> Result<&[NodeId], GraphError> {
        self.in_lists
            .get(j as usize)
            .map(Vec::as_slice)
            .ok_or(GraphError::NodeOutOfRange { node: j, n: self.n })
    }

    pub fn out_neighbor_list(&self, i: NodeId) -> Result<&[NodeId], GraphError> {
        self.out_lists
            .get(i as usize)
            .map(Vec::as_slice)
            .ok_or(GraphError::NodeOutOfRange { node: i, n: self.n })
    }

    pub fn in_degree(&self, j: NodeId) -> Result<usize, GraphError> {
        Ok(self.in_neighbor_list(j)?.len())
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_lists.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Per-node in-neighbor masks; `None` when `n > 64`.
    pub(crate) fn in_masks(&self) -> Option<&[u64]> {
        self.in_masks.as_deref()
    }

    /// Symmetric closure: `(i, j)` present iff `(i, j)` or `(j, i)` is an
    /// edge here. Idempotent.
    pub fn underlying_graph(&self) -> Digraph {
        let both = self
            .edges
            .iter()
            .flat_map(|&(i, j)| [(i, j), (j, i)])
            .collect::<Vec<_>>();
        Digraph::new(self.n, both).expect("closure of a valid graph is valid")
    }

    /// Offsets `a` such that this graph is exactly the circulant digraph on
    /// them, or `None` if the edge set is not circulant.
    pub fn circulant_offsets(&self) -> Option<Vec<u32>> {
        if self.n < 2 {
            return None;
        }
        let offsets: Vec<u32> = self.out_lists[0].iter().map(|&j| j).collect();
        if offsets.is_empty() {
            return None;
        }
        if self.edges.len() != self.n * offsets.len() {
            return None;
        }
        for &(src, dst) in &self.edges {
            let diff = (dst as usize + self.n - src as usize) % self.n;
            if offsets.binary_search(&(diff as u32)).is_err() {
                return None;
            }
        }
        Some(offsets)
    }

    /// `Some(k)` when this graph is the k-circulant digraph on its node count.
    pub fn k_circulant_k(&self) -> Option<usize> {
        let offsets = self.circulant_offsets()?;
        let k = offsets.len();
        offsets.iter().enumerate().all(|(idx, &a)| a as usize == idx + 1).then_some(k)
    }
}

/// Build the circulant digraph with edges `i -> (i+a) mod n` for each offset.
pub fn make_circulant(spec: &CirculantSpec) -> Result<Digraph, GraphError> {
    spec.validate()?;
    let n = spec.n;
    let mut edges = Vec::with_capacity(n * spec.offsets.len());
    for i in 0..n {
        for &a in &spec.offsets {
            edges.push((i as NodeId, ((i + a as usize) % n) as NodeId));
        }
    }
    Digraph::new(n, edges)
}

/// Build the k-circulant digraph: offsets `1..=k`, in-neighbors
/// `K_i = {i-k, ..., i-1} mod n`.
pub fn make_k_circulant(n: usize, k: usize) -> Result<Digraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidNodeCount { n, min: 2 });
    }
    if k < 1 || k > n - 1 {
        return Err(GraphError::KOutOfRange { k, n });
    }
    let offsets = (1..=k as u32).collect();
    make_circulant(&CirculantSpec { n, offsets })
}
