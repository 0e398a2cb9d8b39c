//! Independent re-validation of verdict certificates.

use std::collections::BTreeMap;

use wfsound_core::oracle::{
    explore, oracle_k_quasi_sound, oracle_k_sound, KSound as OracleKSound, QuasiSound as OracleQuasi, DEFAULT_CAP,
};
use wfsound_core::rational::int;
use wfsound_core::relaxations::{decide_creach, is_unboundedness_witness, remove_redundant_places};
use wfsound_core::{Marking, Net, ParikhVector, RationalMarking, TransitionId};
use wfsound_smt::{compute_k_q, KValue, SmtOptions};

use crate::verdict::{Certificate, Outcome, Property, Verdict};

fn unit(net: &Net, p: wfsound_core::PlaceId) -> RationalMarking {
    RationalMarking::unit(net.num_places(), p, int(1))
}

fn parse_run(net: &Net, run: &[String]) -> Option<Vec<TransitionId>> {
    run.iter().map(|t| net.transition_named(t)).collect()
}

fn parse_marking(net: &Net, m: &BTreeMap<String, u64>) -> Option<Marking> {
    let mut out = Marking::zero(net.num_places());
    for (name, &k) in m {
        out.set(net.place(name)?, k);
    }
    Some(out)
}

/// `run` fires from i:k and ends in `target`.
fn replays(net: &Net, k: u64, run: &[String], target: &Marking) -> bool {
    let Ok((i, _)) = net.endpoints() else { return false };
    let Some(run) = parse_run(net, run) else { return false };
    net.unit_marking(i, k).fire_sequence(net, &run).as_ref() == Some(target)
}

/// Complete exploration from `m` never meets f:k.
fn stuck(net: &Net, m: &Marking, k: u64) -> bool {
    let Ok((_, f)) = net.endpoints() else { return false };
    let graph = explore(net, m, DEFAULT_CAP);
    graph.is_complete() && !graph.contains(&net.unit_marking(f, k))
}

fn continuous_witness(net: &Net, marking: &BTreeMap<String, String>) -> bool {
    let Ok((i, f)) = net.endpoints() else { return false };
    let Ok(m) = RationalMarking::from_map(net, marking) else {
        return false;
    };
    decide_creach(net, &unit(net, i), &m).reachable && !decide_creach(net, &m, &unit(net, f)).reachable
}

fn unbounded(net: &Net, parikh: &BTreeMap<String, String>, prune: bool) -> bool {
    let Ok(x) = ParikhVector::from_map(net, parikh) else {
        return false;
    };
    if !prune {
        return is_unboundedness_witness(net, &x);
    }
    // The witness must live on the nonredundant part of the net.
    let Ok(Ok(pruned)) = remove_redundant_places(net) else {
        return false;
    };
    let mut local = ParikhVector::zero(pruned.net.num_transitions());
    let mut covered = 0;
    for (new, old) in pruned.transition_map.iter().enumerate() {
        let v = x.get(*old);
        local.set(TransitionId(new), v.clone());
        covered += usize::from(*v != wfsound_core::rational::zero());
    }
    covered == x.support().len() && is_unboundedness_witness(&pruned.net, &local)
}

/// Re-validates the certificate of `verdict` against `net`. Verdicts
/// without a certificate, or whose certificate does not fit the property
/// and outcome, are rejected.
pub fn verify_verdict(net: &Net, verdict: &Verdict) -> bool {
    let Some(certificate) = &verdict.certificate else {
        return false;
    };
    let Ok((i, f)) = net.endpoints() else { return false };
    use Outcome::{Sound, Unsound};
    use Property::*;
    match (verdict.property, verdict.outcome, certificate) {
        (GenSound | ContSound | FreeChoiceSound, Unsound, Certificate::ContinuousWitness { marking }) => {
            continuous_witness(net, marking)
        }
        (GenSound, Unsound, Certificate::IntegerUnbounded { parikh }) => unbounded(net, parikh, true),
        (IntBounded, Unsound, Certificate::IntegerUnbounded { parikh }) => unbounded(net, parikh, false),
        (StructSound | QuasiSound { .. }, Unsound, Certificate::ContinuouslyUnreachable { .. }) => {
            !decide_creach(net, &unit(net, i), &unit(net, f)).reachable
        }
        (StructSound, Unsound, Certificate::NoQuasiSoundK { k_q, .. }) => {
            *k_q == KValue::Infinite && compute_k_q(net, 1, &SmtOptions::default()).ok() == Some(KValue::Infinite)
        }
        (
            StructSound,
            Unsound,
            Certificate::StructuralCounterexample {
                k_n,
                quasi_run,
                run,
                marking,
            },
        ) => {
            let Some(m) = parse_marking(net, marking) else {
                return false;
            };
            *k_n >= 1
                && replays(net, *k_n, quasi_run, &net.unit_marking(f, *k_n))
                && (1..*k_n).all(|k| oracle_k_quasi_sound(net, k, DEFAULT_CAP) == OracleQuasi::NotQuasiSound)
                && replays(net, *k_n, run, &m)
                && stuck(net, &m, *k_n)
        }
        (StructSound, Sound, Certificate::QuasiSoundRun { k, run }) => {
            replays(net, *k, run, &net.unit_marking(f, *k))
                && oracle_k_sound(net, *k, DEFAULT_CAP) == OracleKSound::Sound
        }
        (KSound { k }, Unsound, Certificate::OracleCounterexample { k: k2, run, marking }) if k == *k2 => {
            let Some(m) = parse_marking(net, marking) else {
                return false;
            };
            replays(net, k, run, &m) && stuck(net, &m, k)
        }
        (QuasiSound { k }, Unsound, Certificate::NotQuasiSound { k: k2 }) if k == *k2 => {
            oracle_k_quasi_sound(net, k, DEFAULT_CAP) == OracleQuasi::NotQuasiSound
        }
        (QuasiSound { k }, Sound, Certificate::QuasiSoundRun { k: k2, run }) if k == *k2 => {
            replays(net, k, run, &net.unit_marking(f, k))
        }
        _ => false,
    }
}
