//! Deterministic synchronous simulation of consensus under adversaries.
//!
//! Rounds are synchronous: at step `t` every normal agent reads the values
//! its in-neighbors sent for `t`, applies the trimmed-mean filter and update,
//! and all agents move to `t + 1` together. Misbehaving agents ignore the
//! protocol: a malicious agent sends one signal-driven value to all its
//! out-neighbors, a byzantine agent may send a different value per out-edge.
//! Every byzantine send is logged per edge.
//!
//! All randomness (initial states, random signals, per-edge draws) comes
//! from a single seeded stream consumed in a fixed order, so a seed plus a
//! configuration reproduces trajectories bit for bit.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::graph::{Digraph, NodeId};
use crate::wmsr::{wmsr_filter, wmsr_update, WeightScheme, WmsrError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryModel {
    /// Sends the same (arbitrary) value to every out-neighbor each step.
    Malicious,
    /// May send different values to different out-neighbors each step.
    Byzantine,
}

impl AdversaryModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryModel::Malicious => "malicious",
            AdversaryModel::Byzantine => "byzantine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryScope {
    /// At most f misbehaving agents in the whole network.
    FTotal,
    /// Every normal agent has at most f misbehaving in-neighbors.
    FLocal,
}

impl AdversaryScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryScope::FTotal => "f-total",
            AdversaryScope::FLocal => "f-local",
        }
    }
}

/// What a misbehaving agent emits over time. Deterministic signals get a
/// per-adversary phase shift so several adversaries do not collapse onto one
/// trajectory; random signals draw from the simulation stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversarySignal {
    Constant(f64),
    Ramp { start: f64, slope: f64 },
    Sinusoid { center: f64, amplitude: f64, period: f64 },
    RandomInRange { lo: f64, hi: f64 },
    /// Byzantine only: an independent draw per out-edge per step.
    PerEdgeDistinct { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarySpec {
    pub model: AdversaryModel,
    pub scope: AdversaryScope,
    pub f: usize,
    pub members: Vec<NodeId>,
    pub signal: AdversarySignal,
}

impl AdversarySpec {
    /// No adversaries at all; model/scope fields are then inert.
    pub fn none() -> Self {
        AdversarySpec {
            model: AdversaryModel::Malicious,
            scope: AdversaryScope::FLocal,
            f: 0,
            members: Vec::new(),
            signal: AdversarySignal::Constant(0.0),
        }
    }

    fn sorted_members(&self) -> Vec<NodeId> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m.dedup();
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementViolation {
    MemberOutOfRange { node: NodeId },
    /// f-total: more adversaries than the scope allows.
    TotalBoundExceeded { adversary_count: usize, limit: usize },
    /// f-local: a normal node with too many adversarial in-neighbors.
    LocalBoundExceeded { node: NodeId, adversarial_in_neighbors: usize, limit: usize },
}

impl fmt::Display for PlacementViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementViolation::MemberOutOfRange { node } => {
                write!(f, "adversary {node} is not a node of the graph")
            }
            PlacementViolation::TotalBoundExceeded { adversary_count, limit } => {
                write!(f, "{adversary_count} adversaries exceed the f-total limit of {limit}")
            }
            PlacementViolation::LocalBoundExceeded { node, adversarial_in_neighbors, limit } => {
                write!(
                    f,
                    "node {node} has {adversarial_in_neighbors} adversarial in-neighbors (limit {limit})"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementReport {
    pub valid: bool,
    pub violations: Vec<PlacementViolation>,
}

/// Check the scope constraint; violations are reported, not thrown.
pub fn validate_adversary_placement(g: &Digraph, spec: &AdversarySpec) -> PlacementReport {
    let n = g.node_count();
    let members = spec.sorted_members();
    let mut violations = Vec::new();
    for &m in &members {
        if (m as usize) >= n {
            violations.push(PlacementViolation::MemberOutOfRange { node: m });
        }
    }
    if violations.is_empty() {
        match spec.scope {
            AdversaryScope::FTotal => {
                if members.len() > spec.f {
                    violations.push(PlacementViolation::TotalBoundExceeded {
                        adversary_count: members.len(),
                        limit: spec.f,
                    });
                }
            }
            AdversaryScope::FLocal => {
                for i in 0..n as NodeId {
                    if members.binary_search(&i).is_ok() {
                        continue;
                    }
                    let count = g
                        .in_neighbor_list(i)
                        .expect("node in range")
                        .iter()
                        .filter(|j| members.binary_search(j).is_ok())
                        .count();
                    if count > spec.f {
                        violations.push(PlacementViolation::LocalBoundExceeded {
                            node: i,
                            adversarial_in_neighbors: count,
                            limit: spec.f,
                        });
                    }
                }
            }
        }
    }
    PlacementReport { valid: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Normal,
    Malicious,
    Byzantine,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Normal => "normal",
            Role::Malicious => "malicious",
            Role::Byzantine => "byzantine",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// One value per agent, index = node id.
    Explicit(Vec<f64>),
    /// Seeded uniform draw per agent from `[lo, hi)`.
    UniformRange { lo: f64, hi: f64 },
}

/// One byzantine per-edge emission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerEdgeSend {
    pub step: usize,
    pub dst: NodeId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrajectory {
    pub agent: NodeId,
    pub role: Role,
    /// `values[t]` is the agent's state at step t.
    pub values: Vec<f64>,
    /// For byzantine agents, everything they actually sent, per edge.
    pub per_edge_sends: Vec<PerEdgeSend>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trajectories: Vec<AgentTrajectory>,
    pub converged: bool,
    /// First step at which the normal spread fell to the tolerance.
    pub converged_at: Option<usize>,
    /// Mean of the normal agents' final states, when converged.
    pub consensus_value: Option<f64>,
    /// Max minus min over normal agents, one entry per recorded step.
    pub spread_series: Vec<f64>,
    /// Closed interval spanned by the normal agents' initial states.
    pub safety_interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Placement(PlacementReport),
    Wmsr(WmsrError),
    NonFiniteState { agent: NodeId, step: usize },
    InitialLengthMismatch { expected: usize, got: usize },
    NonFiniteInitial { agent: NodeId },
    EmptyRange { lo: f64, hi: f64 },
    ZeroHorizon,
    NonPositiveTolerance { tol: f64 },
    NoNormalAgents,
    PerEdgeSignalNeedsByzantine,
}

impl From<WmsrError> for SimError {
    fn from(e: WmsrError) -> Self {
        SimError::Wmsr(e)
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Placement(report) => {
                write!(f, "adversary placement invalid:")?;
                for v in &report.violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            SimError::Wmsr(e) => e.fmt(f),
            SimError::NonFiniteState { agent, step } => {
                write!(f, "agent {agent} reached a non-finite state at step {step}")
            }
            SimError::InitialLengthMismatch { expected, got } => {
                write!(f, "{got} initial values for a graph on {expected} nodes")
            }
            SimError::NonFiniteInitial { agent } => {
                write!(f, "initial value for agent {agent} is not finite")
            }
            SimError::EmptyRange { lo, hi } => write!(f, "empty value range [{lo}, {hi})"),
            SimError::ZeroHorizon => write!(f, "horizon must be at least 1"),
            SimError::NonPositiveTolerance { tol } => {
                write!(f, "tolerance {tol} must be positive")
            }
            SimError::NoNormalAgents => write!(f, "every agent is adversarial"),
            SimError::PerEdgeSignalNeedsByzantine => {
                write!(f, "per-edge-distinct signal requires the byzantine model")
            }
        }
    }
}

/// Map 53 random bits into `[lo, hi)`.
fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 * SCALE)
}

struct SignalEval<'a> {
    signal: &'a AdversarySignal,
    member_count: usize,
}

impl SignalEval<'_> {
    /// The adversary's own state at step `t >= 1`; `member_idx` fixes the
    /// phase shift of deterministic signals.
    fn own_value(&self, t: usize, member_idx: usize, rng: &mut ChaCha8Rng) -> f64 {
        let phase =
            core::f64::consts::TAU * member_idx as f64 / self.member_count.max(1) as f64;
        match *self.signal {
            AdversarySignal::Constant(c) => c,
            AdversarySignal::Ramp { start, slope } => start + slope * t as f64,
            AdversarySignal::Sinusoid { center, amplitude, period } => {
                center + amplitude * libm::sin(core::f64::consts::TAU * t as f64 / period + phase)
            }
            AdversarySignal::RandomInRange { lo, hi }
            | AdversarySignal::PerEdgeDistinct { lo, hi } => uniform(rng, lo, hi),
        }
    }
}

fn validate_signal(spec: &AdversarySpec) -> Result<(), SimError> {
    match spec.signal {
        AdversarySignal::RandomInRange { lo, hi } if lo >= hi => {
            Err(SimError::EmptyRange { lo, hi })
        }
        AdversarySignal::PerEdgeDistinct { lo, hi } => {
            if spec.model != AdversaryModel::Byzantine && !spec.members.is_empty() {
                Err(SimError::PerEdgeSignalNeedsByzantine)
            } else if lo >= hi {
                Err(SimError::EmptyRange { lo, hi })
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Run the synchronous protocol until the normal agents' spread reaches
/// `tol` or `horizon` update steps have been taken, whichever comes first.
///
/// Normal agents follow filter-then-update with parameter `f_filter`;
/// adversaries follow their signal from step 1 on (step 0 is the drawn or
/// given initial state for everyone). Fully deterministic in `seed`.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    g: &Digraph,
    spec: &AdversarySpec,
    scheme: &WeightScheme,
    init: &InitialCondition,
    f_filter: usize,
    horizon: usize,
    tol: f64,
    seed: u64,
) -> Result<SimulationResult, SimError> {
    let n = g.node_count();
    if horizon < 1 {
        return Err(SimError::ZeroHorizon);
    }
    if !(tol > 0.0) {
        return Err(SimError::NonPositiveTolerance { tol });
    }
    validate_signal(spec)?;
    let placement = validate_adversary_placement(g, spec);
    if !placement.valid {
        return Err(SimError::Placement(placement));
    }
    let members = spec.sorted_members();
    if members.len() == n {
        return Err(SimError::NoNormalAgents);
    }

    let mut roles = alloc::vec![Role::Normal; n];
    for &m in &members {
        roles[m as usize] = match spec.model {
            AdversaryModel::Malicious => Role::Malicious,
            AdversaryModel::Byzantine => Role::Byzantine,
        };
    }
    let normals: Vec<usize> = (0..n).filter(|&i| roles[i] == Role::Normal).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = match init {
        InitialCondition::Explicit(values) => {
            if values.len() != n {
                return Err(SimError::InitialLengthMismatch { expected: n, got: values.len() });
            }
            values.clone()
        }
        InitialCondition::UniformRange { lo, hi } => {
            if lo >= hi {
                return Err(SimError::EmptyRange { lo: *lo, hi: *hi });
            }
            (0..n).map(|_| uniform(&mut rng, *lo, *hi)).collect()
        }
    };
    for (i, v) in x0.iter().enumerate() {
        if !v.is_finite() {
            return Err(SimError::NonFiniteInitial { agent: i as NodeId });
        }
    }

    let eval = SignalEval { signal: &spec.signal, member_count: members.len() };
    let spread_of = |x: &[f64]| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in &normals {
            lo = lo.min(x[i]);
            hi = hi.max(x[i]);
        }
        hi - lo
    };
    let safety_interval = {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in &normals {
            lo = lo.min(x0[i]);
            hi = hi.max(x0[i]);
        }
        (lo, hi)
    };

    let mut history: Vec<Vec<f64>> = alloc::vec![x0];
    let mut per_edge_logs: BTreeMap<NodeId, Vec<PerEdgeSend>> = members
        .iter()
        .filter(|_| spec.model == AdversaryModel::Byzantine)
        .map(|&m| (m, Vec::new()))
        .collect();
    let mut spread_series = Vec::new();
    let mut converged_at = None;

    let mut t = 0usize;
    loop {
        let x = history.last().expect("nonempty").clone();
        let spread = spread_of(&x);
        spread_series.push(spread);
        if spread <= tol {
            converged_at = Some(t);
            break;
        }
        if t == horizon {
            break;
        }

        // Byzantine emissions for this step, drawn in fixed order:
        // members ascending, out-neighbors ascending.
        let mut byz_sends: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        if spec.model == AdversaryModel::Byzantine {
            for &a in &members {
                for &dst in g.out_neighbor_list(a).expect("node in range") {
                    let v = match spec.signal {
                        AdversarySignal::PerEdgeDistinct { lo, hi } => uniform(&mut rng, lo, hi),
                        _ => x[a as usize],
                    };
                    byz_sends.insert((a, dst), v);
                    per_edge_logs
                        .get_mut(&a)
                        .expect("log preallocated")
                        .push(PerEdgeSend { step: t, dst, value: v });
                }
            }
        }

        let mut next = x.clone();
        for &i in &normals {
            let received: Vec<(NodeId, f64)> = g
                .in_neighbor_list(i as NodeId)
                .expect("node in range")
                .iter()
                .map(|&j| {
                    let v = match byz_sends.get(&(j, i as NodeId)) {
                        Some(&b) => b,
                        None => x[j as usize],
                    };
                    (j, v)
                })
                .collect();
            let retained = wmsr_filter(x[i], &received, f_filter);
            let updated = wmsr_update(x[i], &retained, scheme)?;
            if !updated.is_finite() {
                return Err(SimError::NonFiniteState { agent: i as NodeId, step: t + 1 });
            }
            next[i] = updated;
        }
        for (idx, &a) in members.iter().enumerate() {
            let v = eval.own_value(t + 1, idx, &mut rng);
            if !v.is_finite() {
                return Err(SimError::NonFiniteState { agent: a, step: t + 1 });
            }
            next[a as usize] = v;
        }
        history.push(next);
        t += 1;
    }

    let last = history.last().expect("nonempty");
    let consensus_value = converged_at.map(|_| {
        normals.iter().map(|&i| last[i]).sum::<f64>() / normals.len() as f64
    });

    let trajectories = (0..n as NodeId)
        .map(|agent| AgentTrajectory {
            agent,
            role: roles[agent as usize],
            values: history.iter().map(|x| x[agent as usize]).collect(),
            per_edge_sends: per_edge_logs.get(&agent).cloned().unwrap_or_default(),
        })
        .collect();

    Ok(SimulationResult {
        trajectories,
        converged: converged_at.is_some(),
        converged_at,
        consensus_value,
        spread_series,
        safety_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_k_circulant;
    use alloc::vec;

    fn d1() -> Digraph {
        make_k_circulant(15, 6).unwrap()
    }

    fn local_spec(members: Vec<NodeId>, f: usize) -> AdversarySpec {
        AdversarySpec {
            model: AdversaryModel::Malicious,
            scope: AdversaryScope::FLocal,
            f,
            members,
            signal: AdversarySignal::Sinusoid { center: 0.0, amplitude: 50.0, period: 20.0 },
        }
    }

    #[test]
    fn paper_placements_are_valid() {
        let report = validate_adversary_placement(&d1(), &local_spec(vec![0, 6], 1));
        assert!(report.valid, "{:?}", report.violations);

        let d2 = make_k_circulant(15, 9).unwrap();
        let report = validate_adversary_placement(&d2, &local_spec(vec![0, 6, 12], 2));
        assert!(report.valid, "{:?}", report.violations);
    }

    #[test]
    fn adjacent_adversaries_violate_f_local_at_node_two() {
        let report = validate_adversary_placement(&d1(), &local_spec(vec![0, 1], 1));
        assert!(!report.valid);
        assert!(report.violations.contains(&PlacementViolation::LocalBoundExceeded {
            node: 2,
            adversarial_in_neighbors: 2,
            limit: 1,
        }));
    }

    #[test]
    fn f_total_counts_members() {
        let mut spec = local_spec(vec![0, 6, 12], 2);
        spec.scope = AdversaryScope::FTotal;
        let report = validate_adversary_placement(&d1(), &spec);
        assert_eq!(
            report.violations,
            vec![PlacementViolation::TotalBoundExceeded { adversary_count: 3, limit: 2 }]
        );
    }

    #[test]
    fn out_of_range_member_is_reported() {
        let report = validate_adversary_placement(&d1(), &local_spec(vec![40], 1));
        assert_eq!(report.violations, vec![PlacementViolation::MemberOutOfRange { node: 40 }]);
    }

    #[test]
    fn equal_initial_states_converge_immediately() {
        let g = d1();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let result = simulate(
            &g,
            &AdversarySpec::none(),
            &scheme,
            &InitialCondition::Explicit(vec![7.25; 15]),
            0,
            500,
            1e-6,
            1,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.converged_at, Some(0));
        assert_eq!(result.consensus_value, Some(7.25));
        for traj in &result.trajectories {
            assert_eq!(traj.values, vec![7.25]);
        }
    }

    #[test]
    fn invalid_placement_is_rejected_with_the_nodes() {
        let g = d1();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let err = simulate(
            &g,
            &local_spec(vec![0, 1], 1),
            &scheme,
            &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
            1,
            500,
            1e-6,
            1,
        )
        .unwrap_err();
        match err {
            SimError::Placement(report) => {
                assert!(report
                    .violations
                    .iter()
                    .any(|v| matches!(v, PlacementViolation::LocalBoundExceeded { node: 2, .. })));
            }
            other => panic!("expected placement error, got {other:?}"),
        }
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let g = d1();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let run = || {
            simulate(
                &g,
                &local_spec(vec![0, 6], 1),
                &scheme,
                &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
                1,
                500,
                1e-6,
                12345,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn per_edge_signal_requires_byzantine_model() {
        let g = d1();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let mut spec = local_spec(vec![0], 1);
        spec.signal = AdversarySignal::PerEdgeDistinct { lo: -50.0, hi: 50.0 };
        let err = simulate(
            &g,
            &spec,
            &scheme,
            &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
            1,
            10,
            1e-6,
            1,
        )
        .unwrap_err();
        assert_eq!(err, SimError::PerEdgeSignalNeedsByzantine);
    }

    #[test]
    fn all_adversarial_is_rejected() {
        let g = make_k_circulant(3, 1).unwrap();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let mut spec = local_spec(vec![0, 1, 2], 3);
        spec.scope = AdversaryScope::FTotal;
        let err = simulate(
            &g,
            &spec,
            &scheme,
            &InitialCondition::Explicit(vec![0.0, 1.0, 2.0]),
            0,
            10,
            1e-6,
            1,
        )
        .unwrap_err();
        assert_eq!(err, SimError::NoNormalAgents);
    }

    #[test]
    fn one_step_with_zero_filter_matches_the_linear_update() {
        let g = make_k_circulant(5, 2).unwrap();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let init = vec![-3.0, 8.0, 0.5, 2.0, -1.0];
        let result = simulate(
            &g,
            &AdversarySpec::none(),
            &scheme,
            &InitialCondition::Explicit(init.clone()),
            0,
            1,
            1e-12,
            1,
        )
        .unwrap();
        let linear = crate::wmsr::linear_consensus_step(&g, &init, &scheme).unwrap();
        let after_one: Vec<f64> =
            result.trajectories.iter().map(|tr| tr.values[1]).collect();
        assert_eq!(after_one, linear);
    }
}
