//! The trimmed-mean (W-MSR) filter and state update.
//!
//! Each agent sorts the values received from its in-neighbors against its own
//! state, discards up to F values strictly above and up to F strictly below
//! (all of them if there are F or fewer on that side), and moves to a convex
//! combination of its own state and the survivors. Values equal to the
//! agent's own state are never removed.

use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Digraph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub enum WmsrError {
    /// The weight floor must lie strictly between 0 and 1.
    InvalidAlpha { alpha: f64 },
    /// `(retained + 1) * alpha` exceeds 1: the uniform rule cannot keep every
    /// weight at or above the floor for this many survivors.
    AlphaInfeasible { retained: usize, max_retained: usize },
    StateLengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for WmsrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WmsrError::InvalidAlpha { alpha } => {
                write!(f, "alpha = {alpha} outside the open interval (0, 1)")
            }
            WmsrError::AlphaInfeasible { retained, max_retained } => write!(
                f,
                "{retained} retained values infeasible for this alpha; at most {max_retained} are"
            ),
            WmsrError::StateLengthMismatch { expected, got } => {
                write!(f, "state vector has {got} entries, graph has {expected} nodes")
            }
        }
    }
}

/// How surviving values are weighted. Kept as an enum so alternative
/// compliant rules can slot in without touching the update path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// `1 / (|P_i| + 1)` on every survivor and on the agent itself.
    UniformOverRetained,
}

/// Weight assignment satisfying the consensus conditions: zero off
/// `P_i ∪ {i}`, at least `alpha` on it, row sum one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    alpha: f64,
    rule: WeightRule,
}

impl WeightScheme {
    pub fn uniform(alpha: f64) -> Result<Self, WmsrError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(WmsrError::InvalidAlpha { alpha });
        }
        Ok(WeightScheme { alpha, rule: WeightRule::UniformOverRetained })
    }

    /// Uniform rule with `alpha = 1 / (2 * max_in_degree)`, which stays
    /// feasible for every retained-set size the graph can produce.
    pub fn uniform_for_graph(g: &Digraph) -> Self {
        let d = g.max_in_degree().max(1);
        WeightScheme { alpha: 1.0 / (2.0 * d as f64), rule: WeightRule::UniformOverRetained }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rule(&self) -> WeightRule {
        self.rule
    }

    /// The weight given to each of `retained + 1` participants.
    pub fn weight(&self, retained: usize) -> f64 {
        match self.rule {
            WeightRule::UniformOverRetained => 1.0 / (retained + 1) as f64,
        }
    }

    pub fn is_feasible_for(&self, retained: usize) -> bool {
        (retained + 1) as f64 * self.alpha <= 1.0
    }

    /// Largest retained-set size the floor permits.
    pub fn max_feasible_retained(&self) -> usize {
        let mut m = (1.0 / self.alpha) as usize;
        while !self.is_feasible_for(m) {
            m -= 1;
        }
        while self.is_feasible_for(m + 1) {
            m += 1;
        }
        m
    }

    fn check_feasible(&self, retained: usize) -> Result<(), WmsrError> {
        if self.is_feasible_for(retained) {
            Ok(())
        } else {
            Err(WmsrError::AlphaInfeasible { retained, max_retained: self.max_feasible_retained() })
        }
    }
}

/// Apply the two-sided trim to the received values and return the survivors
/// `P_i`, sorted by neighbor id.
///
/// If at most `f` values are strictly greater than `own` they are all
/// removed, otherwise exactly the `f` largest; symmetrically below. Ties on
/// value are broken by neighbor id (higher id trimmed first on the high
/// side, lower id first on the low side) so that exactly `f` go.
pub fn wmsr_filter(own: f64, received: &[(NodeId, f64)], f: usize) -> Vec<(NodeId, f64)> {
    let mut above: Vec<usize> = (0..received.len()).filter(|&i| received[i].1 > own).collect();
    let mut below: Vec<usize> = (0..received.len()).filter(|&i| received[i].1 < own).collect();
    above.sort_unstable_by(|&a, &b| {
        (received[b].1, received[b].0).partial_cmp(&(received[a].1, received[a].0)).expect("finite")
    });
    below.sort_unstable_by(|&a, &b| {
        (received[a].1, received[a].0).partial_cmp(&(received[b].1, received[b].0)).expect("finite")
    });

    let mut removed = alloc::vec![false; received.len()];
    for &i in above.iter().take(f) {
        removed[i] = true;
    }
    for &i in below.iter().take(f) {
        removed[i] = true;
    }

    let mut retained: Vec<(NodeId, f64)> =
        (0..received.len()).filter(|&i| !removed[i]).map(|i| received[i]).collect();
    retained.sort_unstable_by_key(|&(id, _)| id);
    retained
}

/// One state update: the weighted combination of `own` and the retained
/// values. The result is clamped to their span, which the exact arithmetic
/// already implies but floating-point rounding does not.
pub fn wmsr_update(own: f64, retained: &[(NodeId, f64)], scheme: &WeightScheme) -> Result<f64, WmsrError> {
    scheme.check_feasible(retained.len())?;
    let mut sum = own;
    let mut lo = own;
    let mut hi = own;
    for &(_, v) in retained {
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let next = sum * scheme.weight(retained.len());
    Ok(next.clamp(lo, hi))
}

/// The unfiltered linear consensus update for every node at once:
/// `x_i' = sum over K_i ∪ {i} of w_ij x_j`. Identical to one simulation step
/// with a zero filter parameter and no adversaries.
pub fn linear_consensus_step(
    g: &Digraph,
    states: &[f64],
    scheme: &WeightScheme,
) -> Result<Vec<f64>, WmsrError> {
    if states.len() != g.node_count() {
        return Err(WmsrError::StateLengthMismatch { expected: g.node_count(), got: states.len() });
    }
    let mut next = Vec::with_capacity(states.len());
    for i in 0..g.node_count() {
        let received: Vec<(NodeId, f64)> = g
            .in_neighbor_list(i as NodeId)
            .expect("node in range")
            .iter()
            .map(|&j| (j, states[j as usize]))
            .collect();
        next.push(wmsr_update(states[i], &received, scheme)?);
    }
    Ok(next)
}
