//! Randomized invariants of the analysis pipelines. Each case calls z3, so
//! case counts are small.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wfsound::{analyze, analyze_structural, continuous_soundness, verify_verdict, AnalysisOptions, Outcome, Property};
use wfsound_core::generators::chain;
use wfsound_core::generators::random::{random_free_choice_net, random_workflow_net, RandomNetParams};
use wfsound_core::Net;
use wfsound_smt::{solver_available, ContinuousSoundness, SolverConfig};

fn random_net(seed: u64, max_weight: u64) -> Net {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_workflow_net(
        &mut rng,
        RandomNetParams {
            max_weight,
            ..RandomNetParams::default()
        },
    )
}

fn free_choice_chain(seed: u64, parts: usize) -> Net {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let toys: Vec<Net> = (0..parts).map(|_| random_free_choice_net(&mut rng, 4, 0.3)).collect();
    chain(&toys).unwrap()
}

fn opts() -> AnalysisOptions {
    AnalysisOptions {
        explore_cap: 200_000,
        ..AnalysisOptions::default()
    }
}

fn is_sound(c: &ContinuousSoundness) -> Option<bool> {
    match c {
        ContinuousSoundness::Sound => Some(true),
        ContinuousSoundness::Unsound(_) => Some(false),
        ContinuousSoundness::Unknown(_) => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unsound_verdicts_carry_valid_certificates(seed in any::<u64>(), weighted in any::<bool>(), which in 0..4usize) {
        if !solver_available(&SolverConfig::default()) {
            return Ok(());
        }
        let net = random_net(seed, if weighted { 2 } else { 1 });
        let property = [Property::GenSound, Property::IntBounded, Property::KSound { k: 2 }, Property::QuasiSound { k: 2 }][which];
        let Ok(v) = analyze(&net, property, &opts()) else { return Ok(()) };
        if v.outcome == Outcome::Unsound {
            prop_assert!(verify_verdict(&net, &v), "{}: {:?}", net.name(), v.certificate);
        }
    }

    #[test]
    fn structural_bounds_are_ordered(seed in any::<u64>()) {
        if !solver_available(&SolverConfig::default()) {
            return Ok(());
        }
        let net = random_net(seed, 2);
        let Ok(v) = analyze_structural(&net, &opts()) else { return Ok(()) };
        if let Some(report) = v.k_bounds {
            prop_assert!(report.is_ordered(), "{report:?}");
        }
    }

    #[test]
    fn decomposition_and_reduction_keep_the_answer(seed in any::<u64>(), parts in 1..4usize) {
        if !solver_available(&SolverConfig::default()) {
            return Ok(());
        }
        let net = free_choice_chain(seed, parts);
        let plain = AnalysisOptions { decompose: false, reduce: false, ..opts() };
        let split = AnalysisOptions { decompose: true, reduce: true, ..opts() };
        let a = is_sound(&continuous_soundness(&net, &plain).unwrap());
        let b = is_sound(&continuous_soundness(&net, &split).unwrap());
        prop_assert!(a.is_none() || b.is_none() || a == b, "{}: {a:?} vs {b:?}", net.name());
    }
}
