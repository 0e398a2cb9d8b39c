//! Solver-backed queries: continuous reachability, continuous soundness and
//! the least k admitting an integral or continuous i:k → f:k solution.

use std::fmt;

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use wfsound_core::marking::RationalMarking;
use wfsound_core::net::Net;
use wfsound_core::rational::{int, Rational};
use wfsound_core::relaxations::decide_creach;
use wfsound_core::workflow::validate_workflow;

use crate::psi::{emit_psi, parikh_from_model, validate_parikh, Encoding, MarkingTerm};
use crate::script::{int_literal, SmtScript, Sort};
use crate::solver::{solve_script, CheckSat, Session, SmtError, SolveResult, SolverConfig};

#[derive(Clone, Debug, Default)]
pub struct SmtOptions {
    pub solver: SolverConfig,
    pub encoding: Encoding,
    /// Ask the solver for the least k directly instead of scanning upwards.
    pub native_minimize: bool,
}

impl SmtOptions {
    pub fn with_solver(solver: SolverConfig) -> Self {
        SmtOptions {
            solver,
            ..Default::default()
        }
    }
}

/// Session label: net name plus query kind.
fn label(net: &Net, query: &str) -> String {
    format!("{}-{query}", net.name())
}

/// m →Q* m′ decided by the solver. A sat model is checked by substitution.
pub fn decide_creach_smt(
    net: &Net,
    m: &RationalMarking,
    target: &RationalMarking,
    opts: &SmtOptions,
) -> Result<bool, SmtError> {
    let psi = emit_psi(
        net,
        &MarkingTerm::Concrete(m.clone()),
        &MarkingTerm::Concrete(target.clone()),
        false,
        opts.encoding,
        "",
    );
    let mut script = SmtScript::new("QF_LRA");
    for (v, sort) in &psi.vars {
        script.declare(v, *sort);
    }
    script.assert(psi.body.clone());
    let mut session = Session::start(&opts.solver, &label(net, "creach"))?;
    session.send_script(&script)?;
    let result = session.solve(&psi.x)?;
    session.finish()?;
    match result {
        SolveResult::Sat(model) => {
            let x = parikh_from_model(&model, &psi).map_err(SmtError::Malformed)?;
            validate_parikh(net, m, target, &x).map_err(SmtError::InvalidModel)?;
            Ok(true)
        }
        SolveResult::Unsat => Ok(false),
        SolveResult::Unknown(reason) => Err(SmtError::Solver(format!("unknown: {reason}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContinuousSoundness {
    Sound,
    /// m with i:1 →Q* m and not m →Q* f:1.
    Unsound(RationalMarking),
    Unknown(String),
}

/// Variables of the witness marking.
fn marking_symbols(net: &Net) -> Vec<String> {
    net.place_ids()
        .map(|p| crate::script::symbol("m", p.0, net.place_name(p)))
        .collect()
}

/// The ∃∀ script: some m ≥ 0 reachable from i:1 from which no ψ(m, f:1)
/// solution exists. The support of m is named by free Booleans.
pub fn continuous_soundness_script(net: &Net, encoding: Encoding) -> Result<(SmtScript, Vec<String>), SmtError> {
    let (i, f) = net.endpoints()?;
    let m_vars = marking_symbols(net);
    let flags: Vec<String> = net
        .place_ids()
        .map(|p| crate::script::symbol("s", p.0, net.place_name(p)))
        .collect();
    let symbolic = MarkingTerm::Flagged {
        values: m_vars.clone(),
        flags: flags.clone(),
    };
    let closed = MarkingTerm::Closed {
        values: m_vars.clone(),
        flags: flags.clone(),
    };
    let start = MarkingTerm::Concrete(RationalMarking::unit(net.num_places(), i, int(1)));
    let end = MarkingTerm::Concrete(RationalMarking::unit(net.num_places(), f, int(1)));
    let reach = emit_psi(net, &start, &symbolic, false, encoding, "a");
    let back = emit_psi(net, &closed, &end, false, encoding, "b");
    let mut script = SmtScript::new("LRA");
    for (v, s) in m_vars.iter().zip(&flags) {
        script.declare(v, Sort::Real);
        script.declare(s, Sort::Bool);
    }
    for (v, s) in m_vars.iter().zip(&flags) {
        script.assert(format!("(>= {v} 0.0)"));
        script.assert(format!("(= {s} (> {v} 0.0))"));
    }
    // A stuck marking stays stuck after firing a little of every enabled
    // transition, so some stuck marking, if any, has a closed support.
    for t in net.transition_ids() {
        let pre: Vec<String> = net.pre(t).places().map(|p| flags[p.0].clone()).collect();
        let post: Vec<String> = net.post(t).places().map(|p| flags[p.0].clone()).collect();
        script.assert(format!("(=> {} {})", crate::script::and(pre), crate::script::and(post)));
    }
    for (v, sort) in &reach.vars {
        script.declare(v, *sort);
    }
    script.assert(reach.body);
    script.assert(format!("(forall {} (not {}))", back.binders(), back.body));
    Ok((script, m_vars))
}

/// Decides whether every marking continuously reachable from i:1 can
/// continuously reach f:1. Witness markings are validated with
/// [`decide_creach`] in both directions.
pub fn check_continuous_soundness(net: &Net, opts: &SmtOptions) -> Result<ContinuousSoundness, SmtError> {
    validate_workflow(net).into_result()?;
    let (i, f) = net.endpoints()?;
    let (script, m_vars) = continuous_soundness_script(net, opts.encoding)?;
    let result = solve_script(&opts.solver, &label(net, "cont-sound"), &script, &m_vars)?;
    match result {
        SolveResult::Unsat => Ok(ContinuousSoundness::Sound),
        SolveResult::Unknown(reason) => Ok(ContinuousSoundness::Unknown(reason)),
        SolveResult::Sat(model) => {
            let values: Vec<Rational> = m_vars
                .iter()
                .map(|v| model.number(v))
                .collect::<Result<_, _>>()
                .map_err(SmtError::Malformed)?;
            let m = RationalMarking::from_vec(values);
            if !m.is_nonnegative() {
                return Err(SmtError::InvalidModel("negative witness marking".into()));
            }
            let start = RationalMarking::unit(net.num_places(), i, int(1));
            let end = RationalMarking::unit(net.num_places(), f, int(1));
            if !decide_creach(net, &start, &m).reachable {
                return Err(SmtError::InvalidModel(format!(
                    "witness {} is not reachable from i",
                    m.display(net)
                )));
            }
            if decide_creach(net, &m, &end).reachable {
                return Err(SmtError::InvalidModel(format!(
                    "witness {} can still reach f",
                    m.display(net)
                )));
            }
            Ok(ContinuousSoundness::Unsound(m))
        }
    }
}

/// A bound on k: a least value, none at all, or none up to the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KValue {
    Finite(u64),
    /// Proven: no k ≥ 1 exists.
    Infinite,
    /// No k ≤ cap; larger values were not examined.
    Unknown(u64),
}

impl KValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            KValue::Finite(k) => Some(k),
            _ => None,
        }
    }

    /// No k up to `cap` (either proven infinite or unknown beyond the cap).
    pub fn none_up_to_cap(self) -> bool {
        !matches!(self, KValue::Finite(_))
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Finite(k) => write!(f, "{k}"),
            KValue::Infinite => write!(f, "∞"),
            KValue::Unknown(cap) => write!(f, "unknown({cap})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KBounds {
    pub k_z: KValue,
    pub k_q: KValue,
    pub cap: u64,
}

impl KBounds {
    /// k_z ≤ k_q whenever both are finite.
    pub fn is_ordered(&self) -> bool {
        match (self.k_z, self.k_q) {
            (KValue::Finite(a), KValue::Finite(b)) => a <= b,
            (KValue::Infinite, KValue::Finite(_)) => false,
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KQuery {
    /// Integral state equation only.
    Integer,
    /// ψ with an integral Parikh vector.
    Continuous,
}

const K: &str = "k";

/// Declarations and body for the query with k symbolic.
fn k_script(net: &Net, query: KQuery, encoding: Encoding) -> Result<(SmtScript, crate::psi::Psi), SmtError> {
    let (i, f) = net.endpoints()?;
    let scaled = |p| {
        let terms = net
            .place_ids()
            .map(|q| if q == p { format!("(to_real {K})") } else { "0.0".into() })
            .collect();
        MarkingTerm::Symbolic(terms)
    };
    let psi = emit_psi(net, &scaled(i), &scaled(f), true, encoding, "");
    let mut script = SmtScript::new(if query == KQuery::Integer { "QF_LIA" } else { "QF_LIRA" });
    script.declare(K, Sort::Int);
    script.assert(format!("(>= {K} 1)"));
    match query {
        KQuery::Continuous => {
            for (v, sort) in &psi.vars {
                script.declare(v, *sort);
            }
            script.assert(psi.body.clone());
        }
        KQuery::Integer => {
            for v in &psi.x {
                script.declare(v, Sort::Int);
                script.assert(format!("(>= {v} 0)"));
            }
            for p in net.place_ids() {
                let mut terms = Vec::new();
                for t in net.transition_ids() {
                    let d = net
                        .effect(t)
                        .into_iter()
                        .find(|&(q, _)| q == p)
                        .map(|(_, d)| d)
                        .unwrap_or(0);
                    if d != 0 {
                        terms.push(format!("(* {} {})", int_literal(d as i64), psi.x[t.0]));
                    }
                }
                let lhs = if p == f { K.to_string() } else { "0".into() };
                let start = if p == i { K.to_string() } else { "0".into() };
                let rhs = if terms.is_empty() {
                    start
                } else {
                    format!("(+ {start} {})", terms.join(" "))
                };
                script.assert(format!("(= {lhs} {rhs})"));
            }
        }
    }
    Ok((script, psi))
}

fn validate_k_model(net: &Net, query: KQuery, k: u64, x: &[Rational]) -> Result<(), SmtError> {
    let (i, f) = net.endpoints()?;
    if x.iter().any(|v| !v.is_integer()) {
        return Err(SmtError::InvalidModel("non-integral Parikh vector".into()));
    }
    let start = RationalMarking::unit(net.num_places(), i, int(k as i64));
    let end = RationalMarking::unit(net.num_places(), f, int(k as i64));
    match query {
        KQuery::Continuous => validate_parikh(net, &start, &end, x).map_err(SmtError::InvalidModel),
        KQuery::Integer => {
            let mut reached = start.as_slice().to_vec();
            for t in net.transition_ids() {
                for (p, d) in net.effect(t) {
                    reached[p.0] += Rational::from_integer(d.into()) * &x[t.0];
                }
            }
            if x.iter().any(|v| v.is_negative()) || reached.as_slice() != end.as_slice() {
                return Err(SmtError::InvalidModel(format!("state equation fails at k = {k}")));
            }
            Ok(())
        }
    }
}

fn model_k(model: &crate::script::SmtModel) -> Result<u64, SmtError> {
    let k = model.number(K).map_err(SmtError::Malformed)?;
    if !k.is_integer() {
        return Err(SmtError::InvalidModel(format!("k = {k} is not an integer")));
    }
    k.to_integer()
        .to_u64()
        .filter(|&k| k >= 1)
        .ok_or_else(|| SmtError::InvalidModel(format!("k = {k} out of range")))
}

fn least_k(net: &Net, cap: u64, query: KQuery, opts: &SmtOptions) -> Result<KValue, SmtError> {
    if cap == 0 {
        return Err(SmtError::Net(wfsound_core::NetError::Invalid(
            "cap must be at least 1".into(),
        )));
    }
    validate_workflow(net).into_result()?;
    let (script, psi) = k_script(net, query, opts.encoding)?;
    let name = match query {
        KQuery::Integer => "k_z",
        KQuery::Continuous => "k_q",
    };
    let mut symbols = vec![K.to_string()];
    symbols.extend(psi.x.iter().cloned());
    let mut session = Session::start(&opts.solver, &label(net, name))?;
    session.send_script(&script)?;

    // Existence for any k; unsat proves there is none.
    let some_k = match session.solve(&symbols)? {
        SolveResult::Unsat => {
            session.finish()?;
            return Ok(KValue::Infinite);
        }
        SolveResult::Unknown(reason) => return Err(SmtError::Solver(format!("unknown: {reason}"))),
        SolveResult::Sat(model) => {
            let k = model_k(&model)?;
            let x = parikh_from_model(&model, &psi).map_err(SmtError::Malformed)?;
            validate_k_model(net, query, k, &x)?;
            k
        }
    };

    let result = if opts.native_minimize {
        session.push()?;
        session.send(&format!("(assert (<= {K} {}))", some_k.min(cap)))?;
        session.send(&format!("(minimize {K})"))?;
        let r = match session.solve(&symbols)? {
            SolveResult::Sat(model) => {
                let k = model_k(&model)?;
                let x = parikh_from_model(&model, &psi).map_err(SmtError::Malformed)?;
                validate_k_model(net, query, k, &x)?;
                KValue::Finite(k)
            }
            SolveResult::Unsat => KValue::Unknown(cap),
            SolveResult::Unknown(reason) => return Err(SmtError::Solver(format!("unknown: {reason}"))),
        };
        session.pop()?;
        r
    } else {
        // Linear scan: the set of admissible k need not be upward closed.
        let mut found = None;
        for k in 1..some_k.min(cap + 1) {
            session.push()?;
            session.send(&format!("(assert (= {K} {k}))"))?;
            let answer = session.check_sat()?;
            if answer == CheckSat::Sat {
                let model = session.get_values(&symbols)?;
                let x = parikh_from_model(&model, &psi).map_err(SmtError::Malformed)?;
                validate_k_model(net, query, k, &x)?;
                found = Some(k);
            }
            session.pop()?;
            if answer == CheckSat::Unknown {
                return Err(SmtError::Solver(format!("unknown at k = {k}")));
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(k) => KValue::Finite(k),
            None if some_k <= cap => KValue::Finite(some_k),
            None => KValue::Unknown(cap),
        }
    };
    session.finish()?;
    Ok(result)
}

/// Least k ≤ cap with an integral solution of f·k = i·k + Σ x_t Δ(t).
pub fn compute_k_z(net: &Net, cap: u64, opts: &SmtOptions) -> Result<KValue, SmtError> {
    least_k(net, cap, KQuery::Integer, opts)
}

/// Least k ≤ cap with a continuous run from i:k to f:k whose Parikh image is integral.
pub fn compute_k_q(net: &Net, cap: u64, opts: &SmtOptions) -> Result<KValue, SmtError> {
    least_k(net, cap, KQuery::Continuous, opts)
}

pub fn compute_k_bounds(net: &Net, cap: u64, opts: &SmtOptions) -> Result<KBounds, SmtError> {
    Ok(KBounds {
        k_z: compute_k_z(net, cap, opts)?,
        k_q: compute_k_q(net, cap, opts)?,
        cap,
    })
}
