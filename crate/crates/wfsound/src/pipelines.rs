//! Verdict composition for generalised, structural, continuous and free-choice soundness.

use std::time::{Duration, Instant};

use thiserror::Error;
use wfsound_core::oracle::{explore, oracle_k_quasi_sound, oracle_k_sound, KSound, QuasiSound, DEFAULT_CAP};
use wfsound_core::rational::int;
use wfsound_core::reductions::reduce_fixpoint;
use wfsound_core::relaxations::creach::CreachCertificate;
use wfsound_core::relaxations::{check_integer_boundedness, decide_creach, remove_redundant_places, Boundedness};
use wfsound_core::workflow::{is_free_choice, validate_workflow};
use wfsound_core::{Marking, Net, NetError, RationalMarking, TransitionId};
use wfsound_smt::{check_continuous_soundness, compute_k_bounds, ContinuousSoundness, KValue, SmtError, SmtOptions};

use crate::decompose::{is_trivially_sound, sequential_components};
use crate::verdict::{Certificate, KReport, Outcome, Property, Stages, Verdict};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error("net `{0}` is not a unit-weight free-choice net")]
    NotFreeChoice(String),
}

impl AnalysisError {
    /// Problems with the input net rather than with the solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            AnalysisError::Net(_) | AnalysisError::NotFreeChoice(_) | AnalysisError::Smt(SmtError::Net(_))
        )
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub smt: SmtOptions,
    /// Apply the reduction rules to unit-weight nets before the continuous check.
    pub reduce: bool,
    /// Split nets at cut places and check the segments separately.
    pub decompose: bool,
    /// Run the integer-boundedness stage of the generalised pipeline.
    pub boundedness: bool,
    /// Largest k examined by the structural pipeline.
    pub cap_k: u64,
    /// Marking budget of every oracle exploration.
    pub explore_cap: usize,
    /// Wall-clock budget for the whole analysis.
    pub timeout: Option<Duration>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            smt: SmtOptions::default(),
            reduce: false,
            decompose: true,
            boundedness: true,
            cap_k: 1 << 16,
            explore_cap: DEFAULT_CAP,
            timeout: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Deadline(Option<Instant>);

impl Deadline {
    fn start(timeout: Option<Duration>) -> Deadline {
        Deadline(timeout.map(|t| Instant::now() + t))
    }

    fn remaining(&self) -> Option<Duration> {
        self.0.map(|d| d.saturating_duration_since(Instant::now()))
    }

    fn expired(&self) -> bool {
        self.remaining().is_some_and(|r| r.is_zero())
    }

    /// Solver options whose timeout does not outlast the deadline.
    fn smt(&self, base: &SmtOptions) -> SmtOptions {
        let mut opts = base.clone();
        if let Some(rest) = self.remaining() {
            opts.solver.timeout = opts.solver.timeout.min(rest.max(Duration::from_millis(1)));
        }
        opts
    }
}

fn timed_out(net: &Net, property: Property, stage: &str) -> Verdict {
    Verdict::new(net.name(), property, Outcome::Unknown, "time budget exhausted")
        .with_diagnostics(format!("timeout before stage {stage}"))
}

/// Smt timeouts become `None`; other errors propagate.
fn smt_or_timeout<T>(result: Result<T, SmtError>) -> Result<Option<T>, AnalysisError> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(SmtError::Timeout(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn unit(net: &Net, p: wfsound_core::PlaceId, k: i64) -> RationalMarking {
    RationalMarking::unit(net.num_places(), p, int(k))
}

fn run_names(net: &Net, run: &[TransitionId]) -> Vec<String> {
    run.iter().map(|&t| net.transition_name(t).to_string()).collect()
}

/// Continuous soundness of one segment, reduced first when asked. Witnesses
/// refer to the unreduced segment.
fn segment_soundness(
    net: &Net,
    opts: &AnalysisOptions,
    deadline: &Deadline,
) -> Result<ContinuousSoundness, AnalysisError> {
    if is_trivially_sound(net) {
        return Ok(ContinuousSoundness::Sound);
    }
    if opts.reduce && net.is_unit_weighted() {
        let (reduced, trace) = reduce_fixpoint(net)?;
        if is_trivially_sound(&reduced) {
            return Ok(ContinuousSoundness::Sound);
        }
        if !trace.is_empty() {
            match check_continuous_soundness(&reduced, &deadline.smt(&opts.smt))? {
                ContinuousSoundness::Unsound(_) => {}
                other => return Ok(other),
            }
        }
    }
    Ok(check_continuous_soundness(net, &deadline.smt(&opts.smt))?)
}

/// Continuous soundness of `net`, segment by segment. The net is sound when
/// every segment is. A stuck marking of a segment, placed into the whole
/// net, is checked with [`decide_creach`]; if it does not carry over the
/// whole net is queried directly.
pub fn continuous_soundness(net: &Net, opts: &AnalysisOptions) -> Result<ContinuousSoundness, AnalysisError> {
    continuous_until(net, opts, &Deadline::start(opts.timeout))
}

fn continuous_until(
    net: &Net,
    opts: &AnalysisOptions,
    deadline: &Deadline,
) -> Result<ContinuousSoundness, AnalysisError> {
    validate_workflow(net).into_result()?;
    let parts = if opts.decompose {
        sequential_components(net)
    } else {
        Vec::new()
    };
    if parts.len() <= 1 {
        return segment_soundness(net, opts, deadline);
    }
    let (i, f) = net.endpoints()?;
    let mut unknown = None;
    for part in &parts {
        if deadline.expired() {
            return Ok(ContinuousSoundness::Unknown("timeout between segments".into()));
        }
        match segment_soundness(&part.net, opts, deadline)? {
            ContinuousSoundness::Sound => {}
            ContinuousSoundness::Unknown(reason) => {
                unknown.get_or_insert(format!("{}: {reason}", part.net.name()));
            }
            ContinuousSoundness::Unsound(m) => {
                let mut lifted = RationalMarking::zero(net.num_places());
                for (local, &global) in part.place_map.iter().enumerate() {
                    lifted.set(global, m.get(wfsound_core::PlaceId(local)).clone());
                }
                let reached = decide_creach(net, &unit(net, i, 1), &lifted).reachable;
                if reached && !decide_creach(net, &lifted, &unit(net, f, 1)).reachable {
                    return Ok(ContinuousSoundness::Unsound(lifted));
                }
                return Ok(check_continuous_soundness(net, &deadline.smt(&opts.smt))?);
            }
        }
    }
    Ok(match unknown {
        Some(reason) => ContinuousSoundness::Unknown(reason),
        None => ContinuousSoundness::Sound,
    })
}

/// Unit-weight free-choice nets, where the soundness notions coincide.
/// Arc weights break this: a single transition i:c → f:c is continuously
/// sound but not 1-sound.
pub fn soundness_collapses(net: &Net) -> bool {
    net.is_unit_weighted() && is_free_choice(net)
}

fn finish(mut verdict: Verdict, stages: Stages) -> Verdict {
    verdict.stage_timings_ms = stages.0;
    verdict
}

/// Semi-decision of generalised soundness.
pub fn analyze_generalised(net: &Net, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    validate_workflow(net).into_result()?;
    let property = Property::GenSound;
    let deadline = Deadline::start(opts.timeout);
    let mut stages = Stages::default();

    let pruned = stages.record("prune", || remove_redundant_places(net))?.ok();
    let work = pruned.as_ref().map_or(net, |p| &p.net);

    if opts.boundedness {
        if let Some(p) = &pruned {
            if let Boundedness::Unbounded(x) = stages.record("int-bounded", || check_integer_boundedness(&p.net)) {
                let parikh = p.lift_parikh(&x).to_map(net);
                let v = Verdict::new(
                    net.name(),
                    property,
                    Outcome::Unsound,
                    "not generalised sound: integer unbounded",
                )
                .with_certificate(Certificate::IntegerUnbounded { parikh });
                return Ok(finish(v, stages));
            }
        }
    }

    if deadline.expired() {
        return Ok(finish(timed_out(net, property, "cont-sound"), stages));
    }
    let continuous = stages.record("cont-sound", || continuous_until(work, opts, &deadline))?;
    let v = match continuous {
        ContinuousSoundness::Unsound(m) => {
            let m = pruned.as_ref().map_or(m.clone(), |p| p.lift_rational_marking(&m));
            Verdict::new(
                net.name(),
                property,
                Outcome::Unsound,
                "not generalised sound: continuously unsound",
            )
            .with_certificate(Certificate::ContinuousWitness { marking: m.to_map(net) })
        }
        ContinuousSoundness::Sound if soundness_collapses(net) => Verdict::new(
            net.name(),
            property,
            Outcome::Sound,
            "generalised sound: free-choice and continuously sound",
        ),
        ContinuousSoundness::Sound => Verdict::new(
            net.name(),
            property,
            Outcome::Unknown,
            "continuously sound; generalised soundness not refuted",
        )
        .with_diagnostics("the net is not a unit-weight free-choice net, so continuous soundness is only necessary"),
        ContinuousSoundness::Unknown(reason) => {
            Verdict::new(net.name(), property, Outcome::Unknown, "continuous soundness undecided")
                .with_diagnostics(reason)
        }
    };
    Ok(finish(v, stages))
}

fn unreachable_certificate(net: &Net, certificate: CreachCertificate) -> Certificate {
    match certificate {
        CreachCertificate::Unreachable {
            fixpoint_support,
            reason,
        } => Certificate::ContinuouslyUnreachable {
            fixpoint_support: run_names(net, &fixpoint_support),
            reason,
        },
        CreachCertificate::Reachable { .. } => unreachable!("only called on unreachable results"),
    }
}

/// A run from i:k to `m`, found by exploration.
fn run_to(net: &Net, k: u64, m: &Marking, cap: usize) -> Option<Vec<TransitionId>> {
    let (i, _) = net.endpoints().ok()?;
    let graph = explore(net, &net.unit_marking(i, k), cap);
    graph.find(m).map(|n| graph.path_to(n))
}

/// Oracle checks of the k below the SMT lower bound, as a consistency check.
const CROSS_CHECK_WINDOW: u64 = 64;

/// Decides structural soundness via k_N, the least quasi-sound k.
pub fn analyze_structural(net: &Net, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    validate_workflow(net).into_result()?;
    let property = Property::StructSound;
    let deadline = Deadline::start(opts.timeout);
    let mut stages = Stages::default();
    let (i, f) = net.endpoints()?;

    let reach = stages.record("creach", || decide_creach(net, &unit(net, i, 1), &unit(net, f, 1)));
    if !reach.reachable {
        let v = Verdict::new(net.name(), property, Outcome::Unsound, "not structurally quasi-sound")
            .with_certificate(unreachable_certificate(net, reach.certificate));
        return Ok(finish(v, stages));
    }

    if deadline.expired() {
        return Ok(finish(timed_out(net, property, "k-bounds"), stages));
    }
    let smt = deadline.smt(&opts.smt);
    let Some(bounds) = stages.record("k-bounds", || smt_or_timeout(compute_k_bounds(net, opts.cap_k, &smt)))? else {
        let v = Verdict::new(net.name(), property, Outcome::Unknown, "k bounds undecided")
            .with_diagnostics("solver timeout");
        return Ok(finish(v, stages));
    };
    let mut report = KReport {
        k_z: bounds.k_z,
        k_q: bounds.k_q,
        k_n: None,
        cap: opts.cap_k,
    };
    let k_q = match bounds.k_q {
        KValue::Finite(k) => k,
        KValue::Infinite => {
            let mut v = Verdict::new(net.name(), property, Outcome::Unsound, "not structurally quasi-sound")
                .with_certificate(Certificate::NoQuasiSoundK {
                    k_z: bounds.k_z,
                    k_q: bounds.k_q,
                });
            v.k_bounds = Some(report);
            return Ok(finish(v, stages));
        }
        KValue::Unknown(cap) => {
            let mut v = Verdict::new(net.name(), property, Outcome::Unknown, "k_N not determined")
                .with_diagnostics(format!("no candidate k up to the cap {cap}"));
            v.k_bounds = Some(report);
            return Ok(finish(v, stages));
        }
    };

    let unknown = |report: KReport, stages: Stages, why: String| {
        let mut v = Verdict::new(net.name(), property, Outcome::Unknown, "k_N not determined").with_diagnostics(why);
        v.k_bounds = Some(report);
        Ok(finish(v, stages))
    };

    let scan_start = Instant::now();
    if let KValue::Finite(k_z) = bounds.k_z {
        if k_q - k_z <= CROSS_CHECK_WINDOW {
            for k in k_z..k_q {
                if oracle_k_quasi_sound(net, k, opts.explore_cap).holds() == Some(true) {
                    return Err(SmtError::InvalidModel(format!("k_q = {k_q} but the net is {k}-quasi-sound")).into());
                }
            }
        }
    }
    let mut found = None;
    for k in k_q..=opts.cap_k {
        if deadline.expired() {
            stages.push("k-scan", scan_start.elapsed());
            return unknown(report, stages, format!("timeout while scanning k = {k}"));
        }
        match oracle_k_quasi_sound(net, k, opts.explore_cap) {
            QuasiSound::QuasiSound(run) => {
                found = Some((k, run));
                break;
            }
            QuasiSound::NotQuasiSound => {}
            QuasiSound::CapExceeded(c) => {
                stages.push("k-scan", scan_start.elapsed());
                return unknown(report, stages, format!("exploration of i:{k} exceeded {c} markings"));
            }
        }
    }
    stages.push("k-scan", scan_start.elapsed());
    let Some((k_n, quasi_run)) = found else {
        return unknown(report, stages, format!("no quasi-sound k in [{k_q}, {}]", opts.cap_k));
    };
    report.k_n = Some(k_n);

    let sound = stages.record("k-sound", || oracle_k_sound(net, k_n, opts.explore_cap));
    let quasi_run = run_names(net, &quasi_run);
    let mut v = match sound {
        KSound::Sound => Verdict::new(
            net.name(),
            property,
            Outcome::Sound,
            format!("structurally sound: {k_n}-sound"),
        )
        .with_certificate(Certificate::QuasiSoundRun { k: k_n, run: quasi_run }),
        KSound::Unsound(m) => {
            let Some(run) = run_to(net, k_n, &m, opts.explore_cap) else {
                return unknown(report, stages, "counterexample path lost".into());
            };
            Verdict::new(
                net.name(),
                property,
                Outcome::Unsound,
                format!("not structurally sound: k_N = {k_n} and the net is not {k_n}-sound"),
            )
            .with_certificate(Certificate::StructuralCounterexample {
                k_n,
                quasi_run,
                run: run_names(net, &run),
                marking: m.to_map(net),
            })
        }
        KSound::CapExceeded(c) => {
            return unknown(report, stages, format!("exploration of i:{k_n} exceeded {c} markings"));
        }
    };
    v.k_bounds = Some(report);
    Ok(finish(v, stages))
}

fn continuous_verdict(net: &Net, opts: &AnalysisOptions, property: Property) -> Result<Verdict, AnalysisError> {
    validate_workflow(net).into_result()?;
    let deadline = Deadline::start(opts.timeout);
    let mut stages = Stages::default();
    let result = stages.record("cont-sound", || continuous_until(net, opts, &deadline))?;
    let free_choice = property == Property::FreeChoiceSound;
    let v = match result {
        ContinuousSoundness::Sound if free_choice => Verdict::new(
            net.name(),
            property,
            Outcome::Sound,
            "free-choice and continuously sound: 1-, generalised and structurally sound",
        ),
        ContinuousSoundness::Sound => Verdict::new(net.name(), property, Outcome::Sound, "continuously sound"),
        ContinuousSoundness::Unsound(m) => {
            let summary = if free_choice {
                "free-choice and continuously unsound: not 1-, generalised or structurally sound"
            } else {
                "continuously unsound"
            };
            Verdict::new(net.name(), property, Outcome::Unsound, summary)
                .with_certificate(Certificate::ContinuousWitness { marking: m.to_map(net) })
        }
        ContinuousSoundness::Unknown(reason) => {
            Verdict::new(net.name(), property, Outcome::Unknown, "continuous soundness undecided")
                .with_diagnostics(reason)
        }
    };
    Ok(finish(v, stages))
}

pub fn analyze_continuous(net: &Net, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    continuous_verdict(net, opts, Property::ContSound)
}

/// Exact decision for free-choice nets, where continuous soundness,
/// 1-soundness, generalised and structural soundness coincide.
pub fn analyze_free_choice(net: &Net, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    if !soundness_collapses(net) {
        return Err(AnalysisError::NotFreeChoice(net.name().to_string()));
    }
    continuous_verdict(net, opts, Property::FreeChoiceSound)
}

pub fn analyze_boundedness(net: &Net) -> Result<Verdict, AnalysisError> {
    let mut stages = Stages::default();
    let property = Property::IntBounded;
    let v = match stages.record("int-bounded", || check_integer_boundedness(net)) {
        Boundedness::Bounded => Verdict::new(net.name(), property, Outcome::Sound, "integer bounded"),
        Boundedness::Unbounded(x) => Verdict::new(net.name(), property, Outcome::Unsound, "integer unbounded")
            .with_certificate(Certificate::IntegerUnbounded { parikh: x.to_map(net) }),
    };
    Ok(finish(v, stages))
}

pub fn analyze_quasi_sound(net: &Net, k: u64, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    validate_workflow(net).into_result()?;
    let property = Property::QuasiSound { k };
    let mut stages = Stages::default();
    let (i, f) = net.endpoints()?;
    let reach = stages.record("creach", || decide_creach(net, &unit(net, i, 1), &unit(net, f, 1)));
    if !reach.reachable {
        let v = Verdict::new(net.name(), property, Outcome::Unsound, format!("not {k}-quasi-sound"))
            .with_certificate(unreachable_certificate(net, reach.certificate));
        return Ok(finish(v, stages));
    }
    let v = match stages.record("oracle", || oracle_k_quasi_sound(net, k, opts.explore_cap)) {
        QuasiSound::QuasiSound(run) => Verdict::new(net.name(), property, Outcome::Sound, format!("{k}-quasi-sound"))
            .with_certificate(Certificate::QuasiSoundRun {
                k,
                run: run_names(net, &run),
            }),
        QuasiSound::NotQuasiSound => {
            Verdict::new(net.name(), property, Outcome::Unsound, format!("not {k}-quasi-sound"))
                .with_certificate(Certificate::NotQuasiSound { k })
        }
        QuasiSound::CapExceeded(c) => Verdict::new(net.name(), property, Outcome::Unknown, "exploration incomplete")
            .with_diagnostics(format!("more than {c} markings")),
    };
    Ok(finish(v, stages))
}

pub fn analyze_k_sound(net: &Net, k: u64, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    validate_workflow(net).into_result()?;
    let property = Property::KSound { k };
    let mut stages = Stages::default();
    let v = match stages.record("oracle", || oracle_k_sound(net, k, opts.explore_cap)) {
        KSound::Sound => Verdict::new(net.name(), property, Outcome::Sound, format!("{k}-sound")),
        KSound::Unsound(m) => {
            let run = run_to(net, k, &m, opts.explore_cap).expect("counterexample comes from the same exploration");
            Verdict::new(net.name(), property, Outcome::Unsound, format!("not {k}-sound")).with_certificate(
                Certificate::OracleCounterexample {
                    k,
                    run: run_names(net, &run),
                    marking: m.to_map(net),
                },
            )
        }
        KSound::CapExceeded(c) => Verdict::new(net.name(), property, Outcome::Unknown, "exploration incomplete")
            .with_diagnostics(format!("more than {c} markings")),
    };
    Ok(finish(v, stages))
}

pub fn analyze(net: &Net, property: Property, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    match property {
        Property::GenSound => analyze_generalised(net, opts),
        Property::StructSound => analyze_structural(net, opts),
        Property::ContSound => analyze_continuous(net, opts),
        Property::IntBounded => analyze_boundedness(net),
        Property::QuasiSound { k } => analyze_quasi_sound(net, k, opts),
        Property::KSound { k } => analyze_k_sound(net, k, opts),
        Property::FreeChoiceSound => analyze_free_choice(net, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wfsound_core::generators::{gen_family, Family};

    #[test]
    fn boundedness_of_families() {
        let v = analyze_boundedness(&gen_family(Family::Nc, 2).unwrap()).unwrap();
        assert_ne!(v.outcome, Outcome::Unknown);
    }

    #[test]
    fn k_soundness_counterexamples_replay() {
        let net = gen_family(Family::Nc, 2).unwrap();
        let v = analyze_k_sound(&net, 2, &AnalysisOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Unsound);
        let Some(Certificate::OracleCounterexample { run, marking, .. }) = &v.certificate else {
            panic!("{v:?}")
        };
        let (i, _) = net.endpoints().unwrap();
        let run: Vec<TransitionId> = run.iter().map(|t| net.transition_named(t).unwrap()).collect();
        let end = net.unit_marking(i, 2).fire_sequence(&net, &run).unwrap();
        assert_eq!(&end.to_map(&net), marking);
    }
}
