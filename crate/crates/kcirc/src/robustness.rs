//! Exact r-robustness and (r,s)-robustness by exhaustive enumeration.
//!
//! Both checks walk pairs of nonempty disjoint node subsets, represented as
//! single `u64` masks (so `n <= 64`). Two strategies are shipped:
//!
//! - [`Strategy::PartitionsOnly`] walks only pairs with `S1 ∪ S2 = V`,
//!   `2^(n-1) - 1` pairs. Partitions are a subset of all pairs, so this
//!   never underestimates robustness. It is exact on the k-circulant family
//!   (cross-validated against the full enumeration in the test suite), but
//!   not on arbitrary digraphs: with edges {1->0, 2->0} the pair ({1},{2})
//!   is unreachable at r = 1 while every partition is reachable, so the
//!   partition figure can exceed the true maximum.
//! - [`Strategy::FullPairs`] walks every unordered pair of nonempty disjoint
//!   subsets (`(3^n - 2^(n+1) + 1) / 2` pairs, counted once via the rule
//!   that the lowest-numbered node of the pair lies in `S1`); this is the
//!   definition verbatim. The (r,s) check always uses it: its third
//!   condition counts reaching nodes, so it cannot be restricted to
//!   partitions.
//!
//! Under the default budget the practical caps are `n <= 29` for
//! partitions-only and `n <= 18` for full pairs. Enumeration is in ascending
//! mask order and the first witness wins, so results are deterministic; the
//! index space can be split into contiguous ranges (see
//! [`enumeration_domain`] and the `*_in_range` functions) and searched
//! concurrently, merging by taking the witness from the lowest range.

use core::fmt;
use core::ops::Range;

use crate::graph::{Digraph, GraphError, NodeSubset, MASK_WIDTH};

/// Maximum number of subset pairs an exhaustive check may visit.
pub const MAX_ENUMERATED_PAIRS: u128 = 1 << 28;

/// Enumeration strategy for the exhaustive robustness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Only pairs with `S1 ∪ S2 = V`. Never underestimates; exact on the
    /// k-circulant family but an upper bound on arbitrary digraphs.
    PartitionsOnly,
    /// Every unordered pair of nonempty disjoint subsets; definitionally exact.
    FullPairs,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::PartitionsOnly => "partitions-only",
            Strategy::FullPairs => "full-pairs",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobustnessError {
    Graph(GraphError),
    /// r-reachability is defined only for nonempty subsets.
    EmptySubset,
    /// Masks are one machine word; larger graphs cannot be enumerated.
    GraphTooLarge { n: usize },
    /// The pair space is beyond the enumeration budget.
    BudgetExceeded { estimated_pairs: u128, budget: u128, strategy: Strategy },
    /// The s parameter of (r,s)-robustness must lie in `[1, n]`.
    InvalidSParameter { s: usize, n: usize },
}

impl From<GraphError> for RobustnessError {
    fn from(e: GraphError) -> Self {
        RobustnessError::Graph(e)
    }
}

impl fmt::Display for RobustnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobustnessError::Graph(e) => e.fmt(f),
            RobustnessError::EmptySubset => write!(f, "reachability requires a nonempty subset"),
            RobustnessError::GraphTooLarge { n } => {
                write!(f, "graph has {n} nodes; exhaustive checks are capped at {MASK_WIDTH}")
            }
            RobustnessError::BudgetExceeded { estimated_pairs, budget, strategy } => {
                write!(
                    f,
                    "{strategy} enumeration would visit ~{estimated_pairs} pairs (budget {budget})"
                )?;
                if *strategy == Strategy::FullPairs {
                    write!(f, "; try the partitions-only strategy or a smaller graph")
                } else {
                    write!(f, "; try a smaller graph")
                }
            }
            RobustnessError::InvalidSParameter { s, n } => {
                write!(f, "s = {s} outside the legal interval [1, {n}]")
            }
        }
    }
}

/// A pair of nonempty disjoint subsets certifying a robustness failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPair {
    pub s1: NodeSubset,
    pub s2: NodeSubset,
}

/// Result of the exact maximum-robustness search.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    /// Largest r for which the graph is r-robust.
    pub max_r: usize,
    /// Pair where neither subset is `(max_r + 1)`-reachable; `None` only
    /// when no valid pair exists at all (single-node graph).
    pub witness: Option<SubsetPair>,
    pub method: Strategy,
}

/// Witness that all three (r,s) conditions fail, with the reaching-set sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RsWitness {
    pub pair: SubsetPair,
    /// |X^r_{S1}|: members of S1 with at least r in-neighbors outside S1.
    pub x1_size: usize,
    pub x2_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsReport {
    pub r: usize,
    pub s: usize,
    pub holds: bool,
    pub witness: Option<RsWitness>,
}

/// True iff some node of `subset` has at least `r` in-neighbors outside it.
///
/// Works for any graph size; the enumeration cap applies only to the
/// exhaustive pair checks.
pub fn is_r_reachable(g: &Digraph, subset: &NodeSubset, r: usize) -> Result<bool, RobustnessError> {
    if subset.node_count() != g.node_count() {
        return Err(GraphError::SubsetSizeMismatch {
            subset_n: subset.node_count(),
            graph_n: g.node_count(),
        }
        .into());
    }
    if subset.is_empty() {
        return Err(RobustnessError::EmptySubset);
    }
    for i in subset.iter() {
        let mut outside = 0usize;
        for &j in g.in_neighbor_list(i)? {
            if !subset.contains(j) {
                outside += 1;
                if outside >= r {
                    return Ok(true);
                }
            }
        }
        if outside >= r {
            // r == 0 lands here: zero outside neighbors suffice.
            return Ok(true);
        }
    }
    Ok(false)
}

fn mask_is_r_reachable(in_masks: &[u64], s: u64, r: usize) -> bool {
    let mut rem = s;
    while rem != 0 {
        let i = rem.trailing_zeros() as usize;
        rem &= rem - 1;
        if (in_masks[i] & !s).count_ones() as usize >= r {
            return true;
        }
    }
    false
}

/// |X^r_S|: how many members of `s` have at least `r` in-neighbors outside `s`.
fn mask_reaching_count(in_masks: &[u64], s: u64, r: usize) -> usize {
    let mut count = 0;
    let mut rem = s;
    while rem != 0 {
        let i = rem.trailing_zeros() as usize;
        rem &= rem - 1;
        if (in_masks[i] & !s).count_ones() as usize >= r {
            count += 1;
        }
    }
    count
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn pair_count(n: usize, strategy: Strategy) -> u128 {
    match strategy {
        Strategy::PartitionsOnly => (1u128 << (n - 1)) - 1,
        Strategy::FullPairs => {
            let assignments = 3u128.pow(n as u32);
            (assignments - (1u128 << (n + 1)) + 1) / 2
        }
    }
}

fn masks_of(g: &Digraph) -> Result<&[u64], RobustnessError> {
    g.in_masks().ok_or(RobustnessError::GraphTooLarge { n: g.node_count() })
}

/// Length of the splittable index space for `strategy` on `g`, after
/// checking the graph fits the enumeration budget.
///
/// Partitions-only indexes the `2^(n-1) - 1` sets containing node 0;
/// full-pairs indexes the `2^n - 1` candidate first subsets (the inner
/// subset loop is part of each index).
pub fn enumeration_domain(g: &Digraph, strategy: Strategy) -> Result<u64, RobustnessError> {
    masks_of(g)?;
    let n = g.node_count();
    let pairs = pair_count(n, strategy);
    if pairs > MAX_ENUMERATED_PAIRS {
        return Err(RobustnessError::BudgetExceeded {
            estimated_pairs: pairs,
            budget: MAX_ENUMERATED_PAIRS,
            strategy,
        });
    }
    Ok(match strategy {
        Strategy::PartitionsOnly => (1u64 << (n - 1)) - 1,
        Strategy::FullPairs => full_mask(n),
    })
}

fn pair_from_masks(n: usize, s1: u64, s2: u64) -> SubsetPair {
    SubsetPair { s1: NodeSubset::from_mask(n, s1), s2: NodeSubset::from_mask(n, s2) }
}

/// Search one contiguous index range for a pair where neither subset is
/// r-reachable. Returns the first witness in ascending index order.
pub fn r_witness_in_range(
    g: &Digraph,
    r: usize,
    strategy: Strategy,
    range: Range<u64>,
) -> Result<Option<SubsetPair>, RobustnessError> {
    let in_masks = masks_of(g)?;
    let n = g.node_count();
    let full = full_mask(n);
    match strategy {
        Strategy::PartitionsOnly => {
            for idx in range {
                let s1 = (idx << 1) | 1;
                let s2 = full & !s1;
                if s2 == 0 {
                    break;
                }
                if !mask_is_r_reachable(in_masks, s1, r) && !mask_is_r_reachable(in_masks, s2, r) {
                    return Ok(Some(pair_from_masks(n, s1, s2)));
                }
            }
            Ok(None)
        }
        Strategy::FullPairs => {
            for idx in range {
                let s1 = idx + 1;
                if s1 > full {
                    break;
                }
                if mask_is_r_reachable(in_masks, s1, r) {
                    continue;
                }
                // Keep each unordered pair once: the lowest node overall is in S1,
                // so S2 draws only from bits above S1's lowest bit.
                let candidates = full & !s1 & !((1u64 << s1.trailing_zeros()) - 1);
                let mut s2 = 0u64;
                loop {
                    s2 = s2.wrapping_sub(candidates) & candidates;
                    if s2 == 0 {
                        break;
                    }
                    if !mask_is_r_reachable(in_masks, s2, r) {
                        return Ok(Some(pair_from_masks(n, s1, s2)));
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Exhaustively decide r-robustness; on failure returns the first witness
/// pair in enumeration order.
pub fn is_r_robust(
    g: &Digraph,
    r: usize,
    strategy: Strategy,
) -> Result<(bool, Option<SubsetPair>), RobustnessError> {
    let domain = enumeration_domain(g, strategy)?;
    let witness = r_witness_in_range(g, r, strategy, 0..domain)?;
    Ok((witness.is_none(), witness))
}

/// Largest r for which `g` is r-robust, by linear ascent from r = 0.
///
/// No graph on `n >= 2` nodes is `(ceil(n/2) + 1)`-robust (a balanced
/// partition leaves every node fewer outside in-neighbors than that), so the
/// ascent always terminates with a witness; the single-node graph is
/// vacuously robust at every level and reports the `ceil(n/2)` cap with no
/// witness.
pub fn max_r_robustness(g: &Digraph, strategy: Strategy) -> Result<RobustnessReport, RobustnessError> {
    let cap = g.node_count().div_ceil(2);
    for r in 0..=cap + 1 {
        let (robust, witness) = is_r_robust(g, r, strategy)?;
        if !robust {
            return Ok(RobustnessReport { max_r: r - 1, witness, method: strategy });
        }
    }
    Ok(RobustnessReport { max_r: cap, witness: None, method: strategy })
}

/// Search one contiguous index range of the full-pair space for a pair
/// violating all three (r,s) conditions.
pub fn rs_witness_in_range(
    g: &Digraph,
    r: usize,
    s: usize,
    range: Range<u64>,
) -> Result<Option<RsWitness>, RobustnessError> {
    let in_masks = masks_of(g)?;
    let n = g.node_count();
    let full = full_mask(n);
    for idx in range {
        let s1 = idx + 1;
        if s1 > full {
            break;
        }
        let x1 = mask_reaching_count(in_masks, s1, r);
        if x1 == s1.count_ones() as usize {
            continue; // condition 1 holds for every pair built on this S1
        }
        let candidates = full & !s1 & !((1u64 << s1.trailing_zeros()) - 1);
        let mut s2 = 0u64;
        loop {
            s2 = s2.wrapping_sub(candidates) & candidates;
            if s2 == 0 {
                break;
            }
            let x2 = mask_reaching_count(in_masks, s2, r);
            if x2 == s2.count_ones() as usize {
                continue;
            }
            if x1 + x2 >= s {
                continue;
            }
            return Ok(Some(RsWitness { pair: pair_from_masks(n, s1, s2), x1_size: x1, x2_size: x2 }));
        }
    }
    Ok(None)
}

/// Exhaustively decide (r,s)-robustness over every nonempty disjoint pair.
pub fn is_rs_robust(g: &Digraph, r: usize, s: usize) -> Result<RsReport, RobustnessError> {
    let n = g.node_count();
    if s < 1 || s > n {
        return Err(RobustnessError::InvalidSParameter { s, n });
    }
    let domain = enumeration_domain(g, Strategy::FullPairs)?;
    let witness = rs_witness_in_range(g, r, s, 0..domain)?;
    Ok(RsReport { r, s, holds: witness.is_none(), witness })
}

/// Largest F certified for a local malicious adversary model: the filter
/// update tolerates F locally misbehaving in-neighbors when the graph is
/// (2F+1)-robust, so F = floor((max_r - 1) / 2), clamped at zero.
///
/// Uses the partition strategy, which is exact on the circulant family this
/// crate targets; certify arbitrary digraphs through
/// `max_r_robustness(g, Strategy::FullPairs)` instead, since the partition
/// figure can overestimate there.
pub fn max_f_local_tolerance(g: &Digraph) -> Result<usize, RobustnessError> {
    let report = max_r_robustness(g, Strategy::PartitionsOnly)?;
    Ok(report.max_r.saturating_sub(1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_k_circulant, Digraph, NodeSubset};
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn full_vertex_set_is_never_one_reachable() {
        let g = make_k_circulant(5, 2).unwrap();
        let all = NodeSubset::full(5);
        assert!(!is_r_reachable(&g, &all, 1).unwrap());
        assert!(is_r_reachable(&g, &all, 0).unwrap());
    }

    #[test]
    fn singleton_reachability_counts_all_in_neighbors() {
        let g = make_k_circulant(7, 3).unwrap();
        let s = NodeSubset::from_nodes(7, &[0]).unwrap();
        assert!(is_r_reachable(&g, &s, 3).unwrap());
        assert!(!is_r_reachable(&g, &s, 4).unwrap());
    }

    #[test]
    fn empty_subset_is_rejected() {
        let g = make_k_circulant(4, 1).unwrap();
        let s = NodeSubset::empty(4);
        assert_eq!(is_r_reachable(&g, &s, 1), Err(RobustnessError::EmptySubset));
    }

    #[test]
    fn zero_robustness_is_vacuous() {
        let g = Digraph::new(3, []).unwrap();
        for strategy in [Strategy::PartitionsOnly, Strategy::FullPairs] {
            let (ok, w) = is_r_robust(&g, 0, strategy).unwrap();
            assert!(ok);
            assert!(w.is_none());
        }
    }

    #[test]
    fn edgeless_two_node_graph_fails_at_one_with_first_witness() {
        let g = Digraph::new(2, []).unwrap();
        let (ok, w) = is_r_robust(&g, 1, Strategy::PartitionsOnly).unwrap();
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(w.s1.iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(w.s2.iter().collect::<Vec<_>>(), vec![1]);

        let report = max_r_robustness(&g, Strategy::PartitionsOnly).unwrap();
        assert_eq!(report.max_r, 0);
        assert!(report.witness.is_some());
    }

    #[test]
    fn complete_digraph_on_four_nodes_is_exactly_two_robust() {
        let g = make_k_circulant(4, 3).unwrap();
        for strategy in [Strategy::PartitionsOnly, Strategy::FullPairs] {
            let report = max_r_robustness(&g, strategy).unwrap();
            assert_eq!(report.max_r, 2, "{strategy}");
            // The witness certifies failure at max_r + 1.
            let w = report.witness.unwrap();
            assert!(!is_r_reachable(&g, &w.s1, 3).unwrap());
            assert!(!is_r_reachable(&g, &w.s2, 3).unwrap());
            assert!(w.s1.is_disjoint(&w.s2));
        }
    }

    #[test]
    fn d1_meets_its_closed_form_bound_and_tops_out_at_four() {
        // ceil(6/2) = 3 is the guaranteed level; the exact maximum is 4
        // (frozen from this enumeration and an independent brute force).
        let g = make_k_circulant(15, 6).unwrap();
        let (ok, _) = is_r_robust(&g, 3, Strategy::PartitionsOnly).unwrap();
        assert!(ok);
        let report = max_r_robustness(&g, Strategy::PartitionsOnly).unwrap();
        assert_eq!(report.max_r, 4);
        let w = report.witness.unwrap();
        assert!(!is_r_reachable(&g, &w.s1, 5).unwrap());
        assert!(!is_r_reachable(&g, &w.s2, 5).unwrap());
    }

    #[test]
    fn rs_with_r_zero_always_holds() {
        // X^0_S = S, so condition 1 is automatic.
        let g = Digraph::new(4, []).unwrap();
        let report = is_rs_robust(&g, 0, 1).unwrap();
        assert!(report.holds);
        assert!(report.witness.is_none());
    }

    #[test]
    fn rs_parameter_range_is_enforced() {
        let g = make_k_circulant(4, 2).unwrap();
        assert_eq!(is_rs_robust(&g, 1, 0), Err(RobustnessError::InvalidSParameter { s: 0, n: 4 }));
        assert_eq!(is_rs_robust(&g, 1, 5), Err(RobustnessError::InvalidSParameter { s: 5, n: 4 }));
    }

    #[test]
    fn rs_witness_reports_reaching_sizes() {
        // Edgeless pairs have empty reaching sets, so (1,1) must fail with
        // the lexicographically first pair ({0},{1}).
        let g = Digraph::new(3, []).unwrap();
        let report = is_rs_robust(&g, 1, 1).unwrap();
        assert!(!report.holds);
        let w = report.witness.unwrap();
        assert_eq!(w.x1_size, 0);
        assert_eq!(w.x2_size, 0);
        assert_eq!(w.pair.s1.iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(w.pair.s2.iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn f_local_tolerance_clamps_at_zero() {
        let edgeless = Digraph::new(3, []).unwrap();
        assert_eq!(max_f_local_tolerance(&edgeless).unwrap(), 0);
        let complete = make_k_circulant(4, 3).unwrap();
        // max_r = 2 -> floor(1/2) = 0; a 2-robust graph certifies no F >= 1.
        assert_eq!(max_f_local_tolerance(&complete).unwrap(), 0);
    }

    #[test]
    fn budget_and_width_rejections() {
        let wide = Digraph::new(70, []).unwrap();
        assert_eq!(
            enumeration_domain(&wide, Strategy::PartitionsOnly),
            Err(RobustnessError::GraphTooLarge { n: 70 })
        );
        let partitions_too_big = Digraph::new(31, []).unwrap();
        assert!(matches!(
            enumeration_domain(&partitions_too_big, Strategy::PartitionsOnly),
            Err(RobustnessError::BudgetExceeded { strategy: Strategy::PartitionsOnly, .. })
        ));
        let full_too_big = Digraph::new(20, []).unwrap();
        assert!(matches!(
            enumeration_domain(&full_too_big, Strategy::FullPairs),
            Err(RobustnessError::BudgetExceeded { strategy: Strategy::FullPairs, .. })
        ));
        // Partitions still fit at n = 20.
        assert!(enumeration_domain(&full_too_big, Strategy::PartitionsOnly).is_ok());
    }

    #[test]
    fn single_node_graph_reports_the_cap_without_witness() {
        let g = Digraph::new(1, []).unwrap();
        let report = max_r_robustness(&g, Strategy::PartitionsOnly).unwrap();
        assert_eq!(report.max_r, 1);
        assert!(report.witness.is_none());
    }

    #[test]
    fn range_split_agrees_with_whole_domain() {
        let g = make_k_circulant(9, 3).unwrap();
        let r = 3;
        let domain = enumeration_domain(&g, Strategy::PartitionsOnly).unwrap();
        let whole = r_witness_in_range(&g, r, Strategy::PartitionsOnly, 0..domain).unwrap();
        let mid = domain / 3;
        let lo = r_witness_in_range(&g, r, Strategy::PartitionsOnly, 0..mid).unwrap();
        let hi = r_witness_in_range(&g, r, Strategy::PartitionsOnly, mid..domain).unwrap();
        let merged = lo.or(hi);
        assert_eq!(whole, merged);
    }
}
