use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfsound_core::generators::random::{random_workflow_net, RandomNetParams};
use wfsound_core::generators::{fork_join, gen_family, Family};
use wfsound_core::marking::RationalMarking;
use wfsound_core::net::Net;
use wfsound_core::rational::int;
use wfsound_core::relaxations::{decide_creach, is_nonredundant};
use wfsound_smt::script::symbol;
use wfsound_smt::{
    decide_creach_smt, emit_psi, solve_script, solver_available, Encoding, MarkingTerm, SmtOptions, SmtScript,
    SolveResult, SolverConfig, Sort,
};

fn options(encoding: Encoding) -> Option<SmtOptions> {
    let solver = SolverConfig::default().with_timeout(Duration::from_secs(30));
    if !solver_available(&solver) {
        eprintln!("z3 not found, skipping");
        return None;
    }
    Some(SmtOptions {
        solver,
        encoding,
        native_minimize: false,
    })
}

fn endpoints(net: &Net) -> (RationalMarking, RationalMarking) {
    let (i, f) = net.endpoints().unwrap();
    (
        RationalMarking::unit(net.num_places(), i, int(1)),
        RationalMarking::unit(net.num_places(), f, int(1)),
    )
}

/// Random markings with entries in 0..=3. Half of the targets are shifted
/// from m by a small combination of effects so that both answers occur.
fn random_query(rng: &mut ChaCha8Rng, net: &Net) -> (RationalMarking, RationalMarking) {
    let random =
        |rng: &mut ChaCha8Rng| -> Vec<i64> { (0..net.num_places()).map(|_| rng.random_range(0..=3)).collect() };
    let m = random(rng);
    let mut target = random(rng);
    if rng.random_bool(0.5) {
        let mut shifted = m.clone();
        for t in net.transition_ids() {
            let n = rng.random_range(0..=2);
            for (p, d) in net.effect(t) {
                shifted[p.0] += n * d as i64;
            }
        }
        if shifted.iter().all(|&v| (0..=3).contains(&v)) {
            target = shifted;
        }
    }
    let wrap = |v: Vec<i64>| RationalMarking::from_vec(v.into_iter().map(int).collect());
    (wrap(m), wrap(target))
}

#[test]
fn psi_examples() {
    for encoding in [Encoding::Rank, Encoding::Level] {
        let Some(opts) = options(encoding) else { return };
        let net = fork_join();
        let (i, f) = endpoints(&net);
        assert!(decide_creach_smt(&net, &i, &f, &opts).unwrap());
        let mid = RationalMarking::from_vec(net.place_ids().map(|p| int(p.0 as i64 % 3)).collect());
        assert!(decide_creach_smt(&net, &mid, &mid, &opts).unwrap());
        let nq = gen_family(Family::NQuasi, 3).unwrap();
        let (i, f) = endpoints(&nq);
        assert!(!decide_creach_smt(&nq, &i, &f, &opts).unwrap());
    }
}

#[test]
fn encodings_agree_with_decide_creach() {
    for encoding in [Encoding::Rank, Encoding::Level] {
        let Some(opts) = options(encoding) else { return };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut yes, mut no) = (0, 0);
        for _ in 0..500 {
            let net = random_workflow_net(&mut rng, RandomNetParams::default());
            let (m, target) = random_query(&mut rng, &net);
            let expected = decide_creach(&net, &m, &target).reachable;
            let got = decide_creach_smt(&net, &m, &target, &opts).unwrap();
            assert_eq!(
                got,
                expected,
                "{encoding:?} on {}: {} -> {}",
                net.name(),
                m.display(&net),
                target.display(&net)
            );
            if expected {
                yes += 1;
            } else {
                no += 1;
            }
        }
        assert!(yes >= 50 && no >= 50, "unbalanced sample: {yes} reachable, {no} not");
    }
}

/// p is continuously markable from i:1 iff ψ(i:1, m) ∧ m[p] > 0 is satisfiable.
fn markable_smt(net: &Net, p: wfsound_core::PlaceId, opts: &SmtOptions) -> bool {
    let (i, _) = net.endpoints().unwrap();
    let m: Vec<String> = net.place_ids().map(|q| symbol("m", q.0, net.place_name(q))).collect();
    let start = MarkingTerm::Concrete(RationalMarking::unit(net.num_places(), i, int(1)));
    let psi = emit_psi(net, &start, &MarkingTerm::Symbolic(m.clone()), false, opts.encoding, "");
    let mut script = SmtScript::new("QF_LRA");
    for v in &m {
        script.declare(v, Sort::Real);
        script.assert(format!("(>= {v} 0.0)"));
    }
    for (v, sort) in &psi.vars {
        script.declare(v, *sort);
    }
    script.assert(psi.body);
    script.assert(format!("(> {} 0.0)", m[p.0]));
    match solve_script(&opts.solver, "markable", &script, &[]).unwrap() {
        SolveResult::Sat(_) => true,
        SolveResult::Unsat => false,
        SolveResult::Unknown(reason) => panic!("{reason}"),
    }
}

#[test]
fn nonredundancy_matches_smt() {
    let Some(opts) = options(Encoding::Rank) else { return };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut redundant = 0;
    for _ in 0..60 {
        let net = random_workflow_net(&mut rng, RandomNetParams::default());
        for p in net.place_ids() {
            let expected = is_nonredundant(&net, p).unwrap();
            assert_eq!(
                markable_smt(&net, p, &opts),
                expected,
                "{} in {}",
                net.place_name(p),
                net.name()
            );
            redundant += usize::from(!expected);
        }
    }
    assert!(redundant > 0);
}
