//! Closed-form robustness bounds for k-circulant digraphs.
//!
//! These are the cheap side of the dual setup: [`crate::robustness`] gives
//! exact answers by enumeration, the functions here give guaranteed lower
//! bounds in O(1) from the connection parameter alone. The test suites sweep
//! both and require `exact >= bound` everywhere.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundError {
    InvalidN { n: usize },
    KOutOfRange { k: usize, n: usize },
    InvalidK { k: usize },
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundError::InvalidN { n } => write!(f, "node count {n} is below the minimum of 2"),
            BoundError::KOutOfRange { k, n } => {
                write!(f, "k = {k} outside the legal interval [1, {}]", n - 1)
            }
            BoundError::InvalidK { k } => write!(f, "k = {k} must be at least 1"),
        }
    }
}

/// Guaranteed r-robustness of the k-circulant digraph on n nodes:
/// `ceil(k/2)`, strengthening to `ceil(n/2)` for the complete case
/// `k = n - 1`.
pub fn theorem1_lower_bound(n: usize, k: usize) -> Result<usize, BoundError> {
    if n < 2 {
        return Err(BoundError::InvalidN { n });
    }
    if k < 1 || k > n - 1 {
        return Err(BoundError::KOutOfRange { k, n });
    }
    Ok(if k == n - 1 { n.div_ceil(2) } else { k.div_ceil(2) })
}

/// The t such that a k-circulant digraph is at least (t,t)-robust:
/// `floor((k+2)/4)` for even k, `floor((k+3)/4)` for odd k.
pub fn corollary1_rs_bound(k: usize) -> Result<usize, BoundError> {
    if k < 1 {
        return Err(BoundError::InvalidK { k });
    }
    Ok(if k % 2 == 0 { (k + 2) / 4 } else { (k + 3) / 4 })
}

/// Whether the sufficient condition "(r+s-1)-robust implies (r,s)-robust"
/// applies: requires `1 <= r+s-1 <= ceil(n/2)` and an observed robustness of
/// at least `r+s-1`. A `false` means the condition is silent, not that the
/// graph fails to be (r,s)-robust.
pub fn lemma1_implies_rs(r: usize, s: usize, n: usize, observed_robustness: usize) -> bool {
    if s < 1 {
        return false;
    }
    let level = r + s - 1;
    level >= 1 && level <= n.div_ceil(2) && observed_robustness >= level
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem1_values() {
        assert_eq!(theorem1_lower_bound(15, 6).unwrap(), 3);
        assert_eq!(theorem1_lower_bound(15, 9).unwrap(), 5);
        assert_eq!(theorem1_lower_bound(8, 7).unwrap(), 4);
        assert_eq!(theorem1_lower_bound(4, 1).unwrap(), 1);
        // Complete case dominates the generic ceil(k/2).
        assert_eq!(theorem1_lower_bound(5, 4).unwrap(), 3);
    }

    #[test]
    fn theorem1_rejects_bad_parameters() {
        assert_eq!(theorem1_lower_bound(1, 1), Err(BoundError::InvalidN { n: 1 }));
        assert_eq!(theorem1_lower_bound(5, 0), Err(BoundError::KOutOfRange { k: 0, n: 5 }));
        assert_eq!(theorem1_lower_bound(5, 5), Err(BoundError::KOutOfRange { k: 5, n: 5 }));
    }

    #[test]
    fn corollary1_values() {
        assert_eq!(corollary1_rs_bound(6).unwrap(), 2);
        assert_eq!(corollary1_rs_bound(9).unwrap(), 3);
        assert_eq!(corollary1_rs_bound(1).unwrap(), 1);
        assert_eq!(corollary1_rs_bound(2).unwrap(), 1);
        assert_eq!(corollary1_rs_bound(0), Err(BoundError::InvalidK { k: 0 }));
    }

    #[test]
    fn lemma1_range_gate() {
        assert!(lemma1_implies_rs(2, 2, 15, 3));
        assert!(lemma1_implies_rs(1, 1, 4, 1));
        assert!(!lemma1_implies_rs(5, 5, 10, 9), "r+s-1 = 9 exceeds ceil(10/2)");
        assert!(!lemma1_implies_rs(2, 2, 15, 2), "observed robustness below r+s-1");
        assert!(!lemma1_implies_rs(0, 1, 6, 5), "r+s-1 = 0 is below the lemma range");
        assert!(!lemma1_implies_rs(3, 0, 6, 5), "s must be positive");
    }
}
