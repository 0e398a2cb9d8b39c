//! Randomized invariants of the net model, relaxations, oracle and reductions.

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wfsound_core::generators::random::{inject_redex, random_free_choice_net, random_workflow_net, RandomNetParams};
use wfsound_core::io::{load_json, load_pnml, to_json, to_pnml};
use wfsound_core::marking::RationalMarking;
use wfsound_core::net::{Net, NetSpec, PlaceId, TransitionId};
use wfsound_core::oracle::{explore, live_and_quasi_live, oracle_bounded, oracle_k_quasi_sound, Bounded};
use wfsound_core::rational::{int, ratio};
use wfsound_core::reductions::{apply_rule, reduce_fixpoint, RuleId};
use wfsound_core::relaxations::{
    check_integer_boundedness, decide_creach, is_unboundedness_witness, max_fireable_set, verify_creach_certificate,
    Boundedness,
};
use wfsound_core::workflow::{is_free_choice, validate_workflow};

fn small_net(seed: u64) -> Net {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_workflow_net(&mut rng, RandomNetParams::default())
}

fn weighted_net(seed: u64) -> Net {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_workflow_net(
        &mut rng,
        RandomNetParams {
            max_weight: 3,
            ..RandomNetParams::default()
        },
    )
}

fn free_choice_net(seed: u64, steps: usize) -> Net {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_free_choice_net(&mut rng, steps, 0.3)
}

fn initial(net: &Net, k: u64) -> wfsound_core::Marking {
    net.unit_marking(net.initial().unwrap(), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_and_pnml_round_trip(seed in any::<u64>()) {
        let net = weighted_net(seed);
        let back = load_json(&to_json(&net)).unwrap();
        prop_assert_eq!(&back, &net);
        let back = load_pnml(&to_pnml(&net)).unwrap().renamed(net.name());
        prop_assert_eq!(back.to_spec().places, net.to_spec().places);
        prop_assert_eq!(back.to_spec().transitions, net.to_spec().transitions);
    }

    #[test]
    fn explored_edges_follow_effects(seed in any::<u64>()) {
        let net = weighted_net(seed);
        let graph = explore(&net, &initial(&net, 2), 2_000);
        for &(a, t, b) in &graph.edges {
            let m = &graph.nodes[a];
            prop_assert!(m.enables(&net, t));
            let mut expected: Vec<i128> = m.as_slice().iter().map(|&v| v as i128).collect();
            for (p, d) in net.effect(t) {
                expected[p.0] += d;
            }
            let got: Vec<i128> = graph.nodes[b].as_slice().iter().map(|&v| v as i128).collect();
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn free_choice_ignores_transition_order_and_names(seed in any::<u64>(), rot in 0usize..6) {
        let net = small_net(seed);
        let mut spec = net.to_spec();
        let len = spec.transitions.len();
        spec.transitions.rotate_left(rot % len);
        for (k, t) in spec.transitions.iter_mut().enumerate() {
            t.id = format!("renamed{k}");
        }
        prop_assert_eq!(is_free_choice(&spec.build().unwrap()), is_free_choice(&net));
    }

    #[test]
    fn maxfs_is_monotone(seed in any::<u64>(), extra in any::<u64>(), mask in any::<u64>(), more in any::<u64>()) {
        let net = small_net(seed);
        let places: Vec<PlaceId> = net.place_ids().collect();
        let marked: Vec<PlaceId> = places.iter().copied().filter(|p| extra >> p.0 & 1 == 1).collect();
        let mut larger_marked = marked.clone();
        larger_marked.extend(places.iter().copied().filter(|p| more >> p.0 & 1 == 1));
        let candidates: Vec<bool> = net.transition_ids().map(|t| mask >> t.0 & 1 == 1).collect();
        let larger_candidates: Vec<bool> =
            candidates.iter().enumerate().map(|(k, &c)| c || more >> (k + 8) & 1 == 1).collect();
        let base = max_fireable_set(&net, &marked, &candidates);
        for bigger in [
            max_fireable_set(&net, &larger_marked, &candidates),
            max_fireable_set(&net, &marked, &larger_candidates),
        ] {
            for t in net.transition_ids() {
                prop_assert!(!base.contains(t) || bigger.contains(t));
            }
        }
    }

    #[test]
    fn scaled_discrete_runs_are_continuous_runs(seed in any::<u64>(), b in 1u64..=3) {
        // b·m →σ b·m′ implies m →Q* m′.
        let net = small_net(seed);
        let graph = explore(&net, &initial(&net, b), 300);
        let m = RationalMarking::unit(net.num_places(), net.initial().unwrap(), int(1));
        for node in graph.nodes.iter().take(40) {
            let target = RationalMarking::from_vec(node.as_slice().iter().map(|&v| ratio(v as i64, b as i64)).collect());
            let result = decide_creach(&net, &m, &target);
            prop_assert!(result.reachable, "{} not reached", target.display(&net));
            prop_assert!(verify_creach_certificate(&net, &m, &target, &result.certificate));
        }
    }

    #[test]
    fn creach_certificates_verify(seed in any::<u64>(), bits in any::<u64>()) {
        let net = small_net(seed);
        let m = RationalMarking::unit(net.num_places(), net.initial().unwrap(), int(1));
        let target = RationalMarking::from_vec(
            net.place_ids().map(|p| ratio((bits >> (2 * p.0) & 3) as i64, 2)).collect(),
        );
        let result = decide_creach(&net, &m, &target);
        prop_assert_eq!(verify_creach_certificate(&net, &m, &target, &result.certificate), result.reachable);
    }

    #[test]
    fn quasi_soundness_implies_continuous_reachability(seed in any::<u64>(), k in 1u64..=3) {
        let net = small_net(seed);
        if oracle_k_quasi_sound(&net, k, 5_000).holds() == Some(true) {
            let (i, f) = net.endpoints().unwrap();
            let m = RationalMarking::unit(net.num_places(), i, int(1));
            let target = RationalMarking::unit(net.num_places(), f, int(1));
            prop_assert!(decide_creach(&net, &m, &target).reachable);
        }
    }

    #[test]
    fn boundedness_witnesses_check_and_agree_with_growth(seed in any::<u64>()) {
        let net = weighted_net(seed);
        match check_integer_boundedness(&net) {
            Boundedness::Unbounded(x) => prop_assert!(is_unboundedness_witness(&net, &x)),
            Boundedness::Bounded => {
                // No marking can strictly grow: the effect of any cycle would be a witness.
                if let Bounded::Growth { from, to } = oracle_bounded(&net, &initial(&net, 1), 5_000) {
                    prop_assert!(false, "growth {} -> {} on a bounded net", from.display(&net), to.display(&net));
                }
            }
        }
    }

    #[test]
    fn reductions_preserve_boundedness_and_shape(seed in any::<u64>(), inject in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = random_workflow_net(&mut rng, RandomNetParams::default());
        for _ in 0..inject {
            net = inject_redex(&mut rng, &net);
        }
        let mut current = net.clone();
        'outer: loop {
            for rule in RuleId::FIXPOINT_ORDER {
                if let Some((next, _)) = apply_rule(&current, rule).unwrap() {
                    prop_assert!(validate_workflow(&next).is_ok());
                    prop_assert!(next.size() <= current.size());
                    prop_assert_eq!(
                        check_integer_boundedness(&next).is_bounded(),
                        check_integer_boundedness(&current).is_bounded(),
                        "{} changed boundedness", rule
                    );
                    current = next;
                    continue 'outer;
                }
            }
            break;
        }
        let (reduced, trace) = reduce_fixpoint(&net).unwrap();
        prop_assert_eq!(&reduced, &current);
        prop_assert_eq!(trace.replay(&net).unwrap(), reduced);
    }

    #[test]
    fn duplicate_place_tracks_its_original(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_workflow_net(&mut rng, RandomNetParams::default());
        let Some((reduced, step)) = apply_rule(&with_copy(&net), RuleId::R1).unwrap() else {
            return Ok(());
        };
        let original = with_copy(&net);
        let (gone, kept) = &step.merged[0];
        let (gone, kept) = (original.place(gone).unwrap(), original.place(kept).unwrap());
        let graph = explore(&original, &initial(&original, 1), 2_000);
        for m in &graph.nodes {
            prop_assert_eq!(m.get(gone), m.get(kept));
        }
        prop_assert_eq!(reduced.num_places() + 1, original.num_places());
    }
}

/// Adds a copy of the first inner place, if there is one.
fn with_copy(net: &Net) -> Net {
    let (i, f) = net.endpoints().unwrap();
    let Some(p) = net.place_ids().find(|&p| p != i && p != f) else {
        return net.clone();
    };
    let name = net.place_name(p).to_string();
    let mut spec = net.to_spec();
    spec.places.push("copy".into());
    for t in spec.transitions.iter_mut() {
        if let Some(&w) = t.pre.get(&name) {
            t.pre.insert("copy".into(), w);
        }
        if let Some(&w) = t.post.get(&name) {
            t.post.insert("copy".into(), w);
        }
    }
    spec.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn free_choice_nets_reach_live_markings(seed in any::<u64>(), steps in 0usize..6) {
        // From any reachable marking some reachable marking has L = F.
        let net = free_choice_net(seed, steps);
        let graph = explore(&net, &initial(&net, 1), 200);
        prop_assume!(graph.is_complete());
        for start in graph.nodes.iter().take(15) {
            let sub = explore(&net, start, 200);
            let found = sub.nodes.iter().any(|m| {
                let (live, quasi) = live_and_quasi_live(&net, m, 200).unwrap();
                live == quasi
            });
            prop_assert!(found, "from {}", start.display(&net));
        }
    }

    #[test]
    fn free_choice_live_sets_scale(seed in any::<u64>(), steps in 0usize..5, c in 2u64..=3) {
        // L(m) = F(m) implies L(c·m) = F(c·m) = F(m).
        let net = free_choice_net(seed, steps);
        let graph = explore(&net, &initial(&net, 1), 100);
        prop_assume!(graph.is_complete());
        for m in graph.nodes.iter().take(10) {
            let (live, quasi) = live_and_quasi_live(&net, m, 100).unwrap();
            if live != quasi {
                continue;
            }
            let Ok((live_c, quasi_c)) = live_and_quasi_live(&net, &m.scale(c), 5_000) else {
                continue;
            };
            prop_assert_eq!(&live_c, &quasi_c);
            prop_assert_eq!(&quasi_c, &quasi);
        }
    }
}

#[test]
fn transition_subsets_are_tracked() {
    // Sanity check for the helpers used above.
    let net = NetSpec::new("n")
        .with_places(&["i", "f"])
        .with_transition("t", &[("i", 1)], &[("f", 1)])
        .with_initial("i")
        .with_final("f")
        .build()
        .unwrap();
    let keep: HashSet<TransitionId> = net.transition_ids().collect();
    let places: HashSet<PlaceId> = net.place_ids().collect();
    let (restricted, _, _) = net.restrict(&places, &keep);
    assert_eq!(restricted, net);
}
