//! Core library for k-circulant digraphs and resilient consensus.
//!
//! The crate is split along the workload's natural seams:
//!
//! - [`graph`]: immutable digraphs, circulant-family constructors, neighbor
//!   queries, and the symmetric-closure (underlying) graph.
//! - [`robustness`]: exact r- and (r,s)-robustness by exhaustive subset-pair
//!   enumeration, with deterministic witnesses and range-splittable search.
//! - [`bounds`]: closed-form robustness bounds for k-circulant digraphs.
//! - [`connectivity`]: brute-force vertex connectivity of the underlying
//!   graph, plus a digraph that is 4-connected underneath but only 1-robust.
//! - [`wmsr`]: the trimmed-mean (W-MSR) filter and state update.
//! - [`sim`]: a deterministic synchronous simulator with malicious and
//!   byzantine adversaries.
//!
//! Everything here is `no_std` + `alloc`; file formats, CSV emission, and the
//! command-line front end live in the companion `kcirc-cli` crate.

#![no_std]

extern crate alloc;

pub mod bounds;
pub mod connectivity;
pub mod graph;
pub mod robustness;
pub mod sim;
pub mod wmsr;

pub use graph::{make_circulant, make_k_circulant, CirculantSpec, Digraph, GraphError, NodeId, NodeSubset};
pub use robustness::{
    is_r_reachable, is_r_robust, is_rs_robust, max_f_local_tolerance, max_r_robustness,
    RobustnessError, RobustnessReport, RsReport, Strategy, SubsetPair,
};
