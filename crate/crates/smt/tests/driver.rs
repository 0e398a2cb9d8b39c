use std::path::Path;
use std::time::Duration;

use wfsound_core::generators::{gen_dnf_net, gen_family, DnfFormula, Family};
use wfsound_smt::{
    check_continuous_soundness, compute_k_q, solve_script, solver_available, Session, SmtError, SmtOptions, SmtScript,
    SolveResult, SolverConfig,
};

fn z3() -> Option<SolverConfig> {
    let config = SolverConfig::default();
    if !solver_available(&config) {
        eprintln!("z3 not found, skipping");
        return None;
    }
    Some(config)
}

/// A script z3 cannot finish within a millisecond.
fn large_script() -> SmtScript {
    let phi = DnfFormula::parse("x1 & x2 | !x1 & x3 | !x2 & !x3 | x4 | !x4").unwrap();
    let net = gen_dnf_net(&phi).unwrap();
    wfsound_smt::queries::continuous_soundness_script(&net, Default::default())
        .unwrap()
        .0
}

#[test]
fn timeout_kills_the_solver() {
    let Some(config) = z3() else { return };
    let config = config.with_timeout(Duration::from_millis(1));
    let mut session = Session::start(&config, "slow").unwrap();
    let pid = session.pid();
    session.send_script(&large_script()).unwrap();
    assert!(matches!(session.check_sat(), Err(SmtError::Timeout(_))));
    assert!(
        !Path::new(&format!("/proc/{pid}")).exists(),
        "solver {pid} still running"
    );
    drop(session);

    let result = solve_script(&config, "slow", &large_script(), &[]).unwrap();
    assert!(matches!(result, SolveResult::Unknown(_)), "{result:?}");
}

#[test]
fn sessions_reap_their_solver() {
    let Some(config) = z3() else { return };
    let session = Session::start(&config, "idle").unwrap();
    let pid = session.pid();
    drop(session);
    assert!(!Path::new(&format!("/proc/{pid}")).exists());
}

#[test]
fn dumps_are_byte_stable() {
    let Some(config) = z3() else { return };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let net = gen_family(Family::NSound, 3).unwrap();
    for dir in [a.path(), b.path()] {
        let opts = SmtOptions::with_solver(SolverConfig {
            dump_dir: Some(dir.to_path_buf()),
            ..config.clone()
        });
        check_continuous_soundness(&net, &opts).unwrap();
        compute_k_q(&net, 8, &opts).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2, "{names:?}");
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name:?} differs");
    }
}

#[test]
fn scripts_are_deterministic() {
    let net = gen_family(Family::Nc, 4).unwrap();
    let first = wfsound_smt::queries::continuous_soundness_script(&net, Default::default())
        .unwrap()
        .0
        .render();
    let second = wfsound_smt::queries::continuous_soundness_script(&net, Default::default())
        .unwrap()
        .0
        .render();
    assert_eq!(first, second);
    assert!(first.starts_with("(set-logic "));
}
