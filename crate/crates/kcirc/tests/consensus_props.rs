//! Behavioral invariants of the filter, the update, and whole simulations:
//! per-step safety against adversarial values, the trajectory recurrence,
//! the weight contract, and spread contraction without adversaries.

use proptest::prelude::*;

use kcirc::graph::{make_k_circulant, NodeId};
use kcirc::sim::{
    simulate, AdversaryModel, AdversaryScope, AdversarySignal, AdversarySpec, InitialCondition,
    Role, SimulationResult,
};
use kcirc::wmsr::{wmsr_filter, wmsr_update, WeightScheme};

fn finite_value() -> impl Strategy<Value = f64> {
    -1e6f64..1e6f64
}

proptest! {
    /// A normal agent with at most F adversarial in-neighbors never leaves
    /// the interval spanned by the current normal states, whatever the
    /// adversaries send.
    #[test]
    fn per_step_safety_under_f_local_adversaries(
        own in finite_value(),
        normals in proptest::collection::vec(finite_value(), 0..12),
        advs in proptest::collection::vec(finite_value(), 0..4),
        extra_f in 0usize..3,
    ) {
        let f = advs.len() + extra_f;
        let mut received: Vec<(NodeId, f64)> = Vec::new();
        for (i, &v) in normals.iter().enumerate() {
            received.push((i as NodeId, v));
        }
        for (i, &v) in advs.iter().enumerate() {
            received.push(((normals.len() + i) as NodeId, v));
        }
        let retained = wmsr_filter(own, &received, f);
        let scheme = WeightScheme::uniform(1e-3).unwrap();
        let next = wmsr_update(own, &retained, &scheme).unwrap();

        let lo = normals.iter().copied().fold(own, f64::min);
        let hi = normals.iter().copied().fold(own, f64::max);
        prop_assert!(next >= lo && next <= hi, "next={next} outside [{lo}, {hi}]");
    }

    /// |received| - 2F <= |P_i| <= |received|.
    #[test]
    fn filter_cardinality_bounds(
        own in finite_value(),
        values in proptest::collection::vec(finite_value(), 0..16),
        f in 0usize..5,
    ) {
        let received: Vec<(NodeId, f64)> =
            values.iter().enumerate().map(|(i, &v)| (i as NodeId, v)).collect();
        let kept = wmsr_filter(own, &received, f).len();
        prop_assert!(kept <= received.len());
        prop_assert!(kept + 2 * f >= received.len());
    }

    /// Without adversaries and without filtering, the normal spread never
    /// grows and reaches the tolerance on a strongly connected circulant.
    #[test]
    fn unfiltered_consensus_contracts_spread(
        n in 3usize..9,
        k_offset in 0usize..3,
        seed in any::<u64>(),
    ) {
        let k = 1 + k_offset.min(n - 2);
        let g = make_k_circulant(n, k).unwrap();
        let scheme = WeightScheme::uniform_for_graph(&g);
        let result = simulate(
            &g,
            &AdversarySpec::none(),
            &scheme,
            &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
            0,
            2000,
            1e-6,
            seed,
        )
        .unwrap();
        prop_assert!(result.converged, "spread series tail: {:?}", result.spread_series.last());
        for pair in result.spread_series.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9, "spread grew: {} -> {}", pair[0], pair[1]);
        }
        let c = result.consensus_value.unwrap();
        let (lo, hi) = result.safety_interval;
        prop_assert!(c >= lo && c <= hi);
    }
}

/// Recompute every normal agent's update from the recorded trajectories and
/// byzantine per-edge logs; the stored series must satisfy the recurrence
/// exactly, and the implied weights must satisfy the weight contract.
fn replay_and_check(g: &kcirc::graph::Digraph, spec: &AdversarySpec, result: &SimulationResult, f_filter: usize, scheme: &WeightScheme) {
    let n = g.node_count();
    let steps = result.trajectories[0].values.len() - 1;
    let by_agent = &result.trajectories;
    for t in 0..steps {
        for i in 0..n {
            if by_agent[i].role != Role::Normal {
                continue;
            }
            let own = by_agent[i].values[t];
            let received: Vec<(NodeId, f64)> = g
                .in_neighbor_list(i as NodeId)
                .unwrap()
                .iter()
                .map(|&j| {
                    let v = if by_agent[j as usize].role == Role::Byzantine {
                        by_agent[j as usize]
                            .per_edge_sends
                            .iter()
                            .find(|s| s.step == t && s.dst == i as NodeId)
                            .expect("byzantine sends are logged per edge")
                            .value
                    } else {
                        by_agent[j as usize].values[t]
                    };
                    (j, v)
                })
                .collect();
            let retained = wmsr_filter(own, &received, f_filter);

            // Weight contract: only P_i ∪ {i} weighted, each at least alpha,
            // row sum one.
            let w = scheme.weight(retained.len());
            assert!(w >= scheme.alpha());
            let sum = w * (retained.len() + 1) as f64;
            assert!((sum - 1.0).abs() <= 1e-12, "weights sum to {sum}");

            let expected = wmsr_update(own, &retained, scheme).unwrap();
            assert_eq!(
                expected,
                by_agent[i].values[t + 1],
                "agent {i} at step {t} violates the recurrence"
            );
        }
    }
    let _ = spec;
}

#[test]
fn byzantine_per_edge_sends_are_what_receivers_consumed() {
    let g = make_k_circulant(15, 6).unwrap();
    let spec = AdversarySpec {
        model: AdversaryModel::Byzantine,
        scope: AdversaryScope::FLocal,
        f: 1,
        members: vec![0, 6],
        signal: AdversarySignal::PerEdgeDistinct { lo: -50.0, hi: 50.0 },
    };
    let scheme = WeightScheme::uniform_for_graph(&g);
    let result = simulate(
        &g,
        &spec,
        &scheme,
        &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
        1,
        200,
        1e-6,
        7,
    )
    .unwrap();

    // Every byzantine agent logs one send per out-edge per executed step,
    // and distinct per-edge values actually occur.
    let steps = result.trajectories[0].values.len() - 1;
    let mut saw_distinct = false;
    for tr in &result.trajectories {
        match tr.role {
            Role::Byzantine => {
                let out_degree = g.out_neighbor_list(tr.agent).unwrap().len();
                assert_eq!(tr.per_edge_sends.len(), steps * out_degree);
                for t in 0..steps {
                    let at_t: Vec<f64> = tr
                        .per_edge_sends
                        .iter()
                        .filter(|s| s.step == t)
                        .map(|s| s.value)
                        .collect();
                    assert_eq!(at_t.len(), out_degree);
                    if at_t.windows(2).any(|w| w[0] != w[1]) {
                        saw_distinct = true;
                    }
                }
            }
            _ => assert!(tr.per_edge_sends.is_empty()),
        }
    }
    assert!(saw_distinct, "per-edge signal never produced distinct values");

    replay_and_check(&g, &spec, &result, 1, &scheme);
}

#[test]
fn malicious_simulation_satisfies_the_recurrence_and_safety() {
    let g = make_k_circulant(15, 6).unwrap();
    let spec = AdversarySpec {
        model: AdversaryModel::Malicious,
        scope: AdversaryScope::FLocal,
        f: 1,
        members: vec![0, 6],
        signal: AdversarySignal::Sinusoid { center: 0.0, amplitude: 50.0, period: 20.0 },
    };
    let scheme = WeightScheme::uniform_for_graph(&g);
    let result = simulate(
        &g,
        &spec,
        &scheme,
        &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
        1,
        500,
        1e-6,
        11,
    )
    .unwrap();
    assert!(result.converged, "normal agents should agree despite the adversaries");
    let c = result.consensus_value.unwrap();
    let (lo, hi) = result.safety_interval;
    assert!(c >= lo && c <= hi, "consensus {c} escaped [{lo}, {hi}]");
    replay_and_check(&g, &spec, &result, 1, &scheme);
}

#[test]
fn ramp_and_constant_adversaries_are_filtered_too() {
    let g = make_k_circulant(15, 9).unwrap();
    let scheme = WeightScheme::uniform_for_graph(&g);
    for signal in [
        AdversarySignal::Constant(120.0),
        AdversarySignal::Ramp { start: -60.0, slope: 0.5 },
        AdversarySignal::RandomInRange { lo: -80.0, hi: 80.0 },
    ] {
        let spec = AdversarySpec {
            model: AdversaryModel::Malicious,
            scope: AdversaryScope::FLocal,
            f: 2,
            members: vec![0, 6, 12],
            signal,
        };
        let result = simulate(
            &g,
            &spec,
            &scheme,
            &InitialCondition::UniformRange { lo: -50.0, hi: 50.0 },
            2,
            500,
            1e-6,
            3,
        )
        .unwrap();
        assert!(result.converged, "{signal:?}");
        let c = result.consensus_value.unwrap();
        let (lo, hi) = result.safety_interval;
        assert!(c >= lo && c <= hi, "{signal:?}: consensus {c} outside [{lo}, {hi}]");
        replay_and_check(&g, &spec, &result, 2, &scheme);
    }
}
