//! Thread fan-out over the enumeration index space.
//!
//! The space is split into contiguous ranges searched independently; the
//! merged answer is the witness from the lowest range, which is exactly the
//! first witness of a sequential scan. Results are therefore identical for
//! every worker count.

use std::num::NonZeroUsize;

use kcirc::graph::Digraph;
use kcirc::robustness::{
    enumeration_domain, r_witness_in_range, rs_witness_in_range, RobustnessError,
    RobustnessReport, RsReport, RsWitness, Strategy, SubsetPair,
};

/// Worker count: explicit flag, else the `KCIRC_THREADS` environment
/// variable, else available parallelism.
pub fn effective_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("KCIRC_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or_else(|| std::thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1))
        .max(1)
}

fn split(domain: u64, threads: usize) -> Vec<std::ops::Range<u64>> {
    let threads = threads.max(1) as u64;
    let chunk = domain.div_ceil(threads).max(1);
    (0..threads)
        .map(|t| {
            let lo = (t * chunk).min(domain);
            let hi = ((t + 1) * chunk).min(domain);
            lo..hi
        })
        .filter(|r| !r.is_empty())
        .collect()
}

pub fn r_witness_parallel(
    g: &Digraph,
    r: usize,
    strategy: Strategy,
    threads: usize,
) -> Result<Option<SubsetPair>, RobustnessError> {
    let domain = enumeration_domain(g, strategy)?;
    if threads <= 1 || domain < 4096 {
        return r_witness_in_range(g, r, strategy, 0..domain);
    }
    let ranges = split(domain, threads);
    let results: Vec<Result<Option<SubsetPair>, RobustnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| scope.spawn(move || r_witness_in_range(g, r, strategy, range)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    for result in results {
        if let Some(w) = result? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

pub fn is_r_robust_parallel(
    g: &Digraph,
    r: usize,
    strategy: Strategy,
    threads: usize,
) -> Result<(bool, Option<SubsetPair>), RobustnessError> {
    let witness = r_witness_parallel(g, r, strategy, threads)?;
    Ok((witness.is_none(), witness))
}

/// Parallel twin of `max_r_robustness`: same ascent, same report.
pub fn max_r_robustness_parallel(
    g: &Digraph,
    strategy: Strategy,
    threads: usize,
) -> Result<RobustnessReport, RobustnessError> {
    let cap = g.node_count().div_ceil(2);
    for r in 0..=cap + 1 {
        let (robust, witness) = is_r_robust_parallel(g, r, strategy, threads)?;
        if !robust {
            return Ok(RobustnessReport { max_r: r - 1, witness, method: strategy });
        }
    }
    Ok(RobustnessReport { max_r: cap, witness: None, method: strategy })
}

pub fn is_rs_robust_parallel(
    g: &Digraph,
    r: usize,
    s: usize,
    threads: usize,
) -> Result<RsReport, RobustnessError> {
    let n = g.node_count();
    if s < 1 || s > n {
        return Err(RobustnessError::InvalidSParameter { s, n });
    }
    let domain = enumeration_domain(g, Strategy::FullPairs)?;
    if threads <= 1 || domain < 4096 {
        let witness = rs_witness_in_range(g, r, s, 0..domain)?;
        return Ok(RsReport { r, s, holds: witness.is_none(), witness });
    }
    let ranges = split(domain, threads);
    let results: Vec<Result<Option<RsWitness>, RobustnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| scope.spawn(move || rs_witness_in_range(g, r, s, range)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    for result in results {
        if let Some(w) = result? {
            return Ok(RsReport { r, s, holds: false, witness: Some(w) });
        }
    }
    Ok(RsReport { r, s, holds: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use kcirc::graph::make_k_circulant;
    use kcirc::robustness::{is_rs_robust, max_r_robustness};

    #[test]
    fn parallel_reports_match_sequential_for_every_worker_count() {
        let g = make_k_circulant(12, 5).unwrap();
        let sequential = max_r_robustness(&g, Strategy::PartitionsOnly).unwrap();
        for threads in [1, 2, 3, 8] {
            let parallel = max_r_robustness_parallel(&g, Strategy::PartitionsOnly, threads).unwrap();
            assert_eq!(parallel, sequential, "threads = {threads}");
        }
    }

    #[test]
    fn parallel_rs_matches_sequential_including_witnesses() {
        let g = make_k_circulant(10, 3).unwrap();
        for (r, s) in [(1usize, 1usize), (2, 2), (3, 2), (4, 1)] {
            let sequential = is_rs_robust(&g, r, s).unwrap();
            for threads in [2, 5] {
                let parallel = is_rs_robust_parallel(&g, r, s, threads).unwrap();
                assert_eq!(parallel, sequential, "r={r} s={s} threads={threads}");
            }
        }
    }

    #[test]
    fn thread_count_resolution_order() {
        assert_eq!(effective_threads(Some(3)), 3);
        assert!(effective_threads(None) >= 1);
        assert_eq!(effective_threads(Some(0)), 1);
    }
}
