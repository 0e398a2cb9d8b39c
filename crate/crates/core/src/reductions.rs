//! Structural reduction rules for unit-weight workflow nets, with a replayable trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::NetError;
use crate::marking::RationalMarking;
use crate::net::{Net, NetSpec, TransitionSpec};
use crate::workflow::validate_workflow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4, RuleId::R5, RuleId::R6];
    /// Order used by [`reduce_fixpoint`].
    pub const FIXPOINT_ORDER: [RuleId; 6] = [RuleId::R2, RuleId::R3, RuleId::R1, RuleId::R4, RuleId::R5, RuleId::R6];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// One rule application. `merged` lists (absorbed id, absorbing id) pairs:
/// the kept duplicate for R1/R2, the consumers (R4) or producers (R5) that
/// took over the removed transition, and the ring member (R6) receiving
/// each merged place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: RuleId,
    pub removed_places: Vec<String>,
    pub removed_transitions: Vec<String>,
    pub merged: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Re-applies every step to `net`.
    pub fn replay(&self, net: &Net) -> Result<Net, NetError> {
        let mut spec = net.to_spec();
        for step in &self.steps {
            spec = apply_step(&spec, step)?;
        }
        spec.build()
    }

    /// Maps a marking of the reduced net to one of the original net. Places
    /// removed by R1 take the value of their duplicate; all other removed
    /// places are empty.
    pub fn lift_marking(&self, original: &Net, reduced: &Net, m: &RationalMarking) -> RationalMarking {
        let mut values: BTreeMap<String, crate::rational::Rational> = reduced
            .place_ids()
            .map(|p| (reduced.place_name(p).to_string(), m.get(p).clone()))
            .collect();
        for step in self.steps.iter().rev() {
            if step.rule == RuleId::R1 {
                for (gone, kept) in &step.merged {
                    let v = values.get(kept).cloned().unwrap_or_else(crate::rational::zero);
                    values.insert(gone.clone(), v);
                }
            }
        }
        let mut out = RationalMarking::zero(original.num_places());
        for p in original.place_ids() {
            if let Some(v) = values.get(original.place_name(p)) {
                out.set(p, v.clone());
            }
        }
        out
    }
}

fn transition_index(spec: &NetSpec, id: &str) -> Result<usize, NetError> {
    spec.transitions
        .iter()
        .position(|t| t.id == id)
        .ok_or_else(|| NetError::UnknownTransition(id.to_string()))
}

fn remove_places(spec: &mut NetSpec, places: &[String]) {
    spec.places.retain(|p| !places.contains(p));
    for t in spec.transitions.iter_mut() {
        for p in places {
            t.pre.remove(p);
            t.post.remove(p);
        }
    }
}

fn remove_transitions(spec: &mut NetSpec, transitions: &[String]) {
    spec.transitions.retain(|t| !transitions.contains(&t.id));
}

/// Applies a recorded step without rechecking its side conditions.
pub fn apply_step(spec: &NetSpec, step: &TraceStep) -> Result<NetSpec, NetError> {
    let mut out = spec.clone();
    match step.rule {
        RuleId::R1 | RuleId::R2 | RuleId::R3 => {}
        RuleId::R4 | RuleId::R5 => {
            let (p, t) = match (step.removed_places.as_slice(), step.removed_transitions.as_slice()) {
                ([p], [t]) => (p.clone(), t.clone()),
                _ => return Err(NetError::Invalid(format!("malformed {} step", step.rule))),
            };
            let fused = out.transitions[transition_index(spec, &t)?].clone();
            for (_, target) in &step.merged {
                let k = transition_index(spec, target)?;
                let s = &mut out.transitions[k];
                if step.rule == RuleId::R4 {
                    s.pre.remove(&p);
                    s.pre.extend(fused.pre.iter().map(|(q, &w)| (q.clone(), w)));
                } else {
                    s.post.remove(&p);
                    s.post.extend(fused.post.iter().map(|(q, &w)| (q.clone(), w)));
                }
            }
        }
        RuleId::R6 => {
            for t in out.transitions.iter_mut() {
                for (gone, kept) in &step.merged {
                    for side in [&mut t.pre, &mut t.post] {
                        if let Some(w) = side.remove(gone) {
                            *side.entry(kept.clone()).or_insert(0) += w;
                        }
                    }
                }
            }
        }
    }
    remove_transitions(&mut out, &step.removed_transitions);
    remove_places(&mut out, &step.removed_places);
    Ok(out)
}

/// Pre/post columns of each place, keyed by transition id.
struct Columns {
    pre: Vec<BTreeMap<String, u64>>,
    post: Vec<BTreeMap<String, u64>>,
}

fn columns(spec: &NetSpec) -> Columns {
    let index: BTreeMap<&str, usize> = spec.places.iter().enumerate().map(|(k, p)| (p.as_str(), k)).collect();
    let mut pre = vec![BTreeMap::new(); spec.places.len()];
    let mut post = vec![BTreeMap::new(); spec.places.len()];
    for t in &spec.transitions {
        for (p, &w) in &t.pre {
            pre[index[p.as_str()]].insert(t.id.clone(), w);
        }
        for (p, &w) in &t.post {
            post[index[p.as_str()]].insert(t.id.clone(), w);
        }
    }
    Columns { pre, post }
}

fn is_endpoint(spec: &NetSpec, p: &str) -> bool {
    spec.initial_place.as_deref() == Some(p) || spec.final_place.as_deref() == Some(p)
}

fn single(map: &BTreeMap<String, u64>) -> Option<&str> {
    match map.iter().next() {
        Some((p, 1)) if map.len() == 1 => Some(p.as_str()),
        _ => None,
    }
}

/// Candidate redexes for `rule` in deterministic order.
fn candidates(spec: &NetSpec, rule: RuleId) -> Vec<TraceStep> {
    let step =
        |removed_places: Vec<String>, removed_transitions: Vec<String>, merged: Vec<(String, String)>| TraceStep {
            rule,
            removed_places,
            removed_transitions,
            merged,
        };
    let cols = columns(spec);
    let mut out = Vec::new();
    match rule {
        RuleId::R1 => {
            for (a, q) in spec.places.iter().enumerate() {
                for (b, p) in spec.places.iter().enumerate().skip(a + 1) {
                    if is_endpoint(spec, p) || is_endpoint(spec, q) {
                        continue;
                    }
                    if cols.pre[a] == cols.pre[b] && cols.post[a] == cols.post[b] {
                        out.push(step(vec![p.clone()], vec![], vec![(p.clone(), q.clone())]));
                    }
                }
            }
        }
        RuleId::R2 => {
            for (a, t) in spec.transitions.iter().enumerate() {
                for u in spec.transitions.iter().skip(a + 1) {
                    if t.pre == u.pre && t.post == u.post {
                        out.push(step(vec![], vec![u.id.clone()], vec![(u.id.clone(), t.id.clone())]));
                    }
                }
            }
        }
        RuleId::R3 => {
            for t in &spec.transitions {
                if t.pre == t.post {
                    out.push(step(vec![], vec![t.id.clone()], vec![]));
                }
            }
        }
        RuleId::R4 => {
            for (k, p) in spec.places.iter().enumerate() {
                if is_endpoint(spec, p) || cols.post[k].len() != 1 {
                    continue;
                }
                let t_id = cols.post[k].keys().next().expect("one producer");
                let t = &spec.transitions[transition_index(spec, t_id).expect("known")];
                if single(&t.post) != Some(p.as_str()) || t.pre.is_empty() || t.pre.contains_key(p) {
                    continue;
                }
                let feeds_only_t = t.pre.keys().all(|q| {
                    let j = spec.places.iter().position(|x| x == q).expect("known place");
                    cols.pre[j].len() == 1
                });
                if !feeds_only_t || cols.pre[k].is_empty() {
                    continue;
                }
                let merged = cols.pre[k].keys().map(|s| (t.id.clone(), s.clone())).collect();
                out.push(step(vec![p.clone()], vec![t.id.clone()], merged));
            }
        }
        RuleId::R5 => {
            for (k, p) in spec.places.iter().enumerate() {
                if is_endpoint(spec, p) || cols.pre[k].len() != 1 {
                    continue;
                }
                let t_id = cols.pre[k].keys().next().expect("one consumer");
                let t = &spec.transitions[transition_index(spec, t_id).expect("known")];
                if single(&t.pre) != Some(p.as_str()) || t.post.is_empty() || t.post.contains_key(p) {
                    continue;
                }
                let only_from_t = t.post.keys().all(|r| {
                    let j = spec.places.iter().position(|x| x == r).expect("known place");
                    cols.post[j].len() == 1
                });
                if !only_from_t || cols.post[k].is_empty() {
                    continue;
                }
                let merged = cols.post[k].keys().map(|s| (t.id.clone(), s.clone())).collect();
                out.push(step(vec![p.clone()], vec![t.id.clone()], merged));
            }
        }
        RuleId::R6 => out.extend(ring_candidates(spec)),
    }
    out
}

fn ring_candidates(spec: &NetSpec) -> Vec<TraceStep> {
    let index: BTreeMap<&str, usize> = spec.places.iter().enumerate().map(|(k, p)| (p.as_str(), k)).collect();
    let mut graph = petgraph::graph::DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..spec.places.len()).map(|k| graph.add_node(k)).collect();
    for t in &spec.transitions {
        if let (Some(p), Some(q)) = (single(&t.pre), single(&t.post)) {
            if p != q {
                graph.add_edge(nodes[index[p]], nodes[index[q]], ());
            }
        }
    }
    let mut sccs: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&graph)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|c| {
            let mut members: Vec<usize> = c.into_iter().map(|n| graph[n]).collect();
            members.sort_unstable();
            members
        })
        .collect();
    sccs.sort();
    let mut out = Vec::new();
    for members in sccs {
        let names: BTreeSet<&str> = members.iter().map(|&k| spec.places[k].as_str()).collect();
        if names.iter().any(|p| is_endpoint(spec, p)) {
            continue;
        }
        let first = spec.places[members[0]].clone();
        let is_transfer = |t: &TransitionSpec| match (single(&t.pre), single(&t.post)) {
            (Some(p), Some(q)) => names.contains(p) && names.contains(q),
            _ => false,
        };
        // Merging must not create arc weights above 1.
        let keeps_unit = spec.transitions.iter().filter(|t| !is_transfer(t)).all(|t| {
            t.pre.keys().filter(|p| names.contains(p.as_str())).count() <= 1
                && t.post.keys().filter(|p| names.contains(p.as_str())).count() <= 1
        });
        if !keeps_unit {
            continue;
        }
        let removed_places: Vec<String> = members[1..].iter().map(|&k| spec.places[k].clone()).collect();
        let merged = removed_places.iter().map(|p| (p.clone(), first.clone())).collect();
        let removed_transitions = spec
            .transitions
            .iter()
            .filter(|t| is_transfer(t))
            .map(|t| t.id.clone())
            .collect();
        out.push(TraceStep {
            rule: RuleId::R6,
            removed_places,
            removed_transitions,
            merged,
        });
    }
    out
}

/// Reduces the first redex of `rule` whose result is a valid workflow net.
/// Returns `None` when no such redex exists.
pub fn apply_rule(net: &Net, rule: RuleId) -> Result<Option<(Net, TraceStep)>, NetError> {
    if !net.is_unit_weighted() {
        return Err(NetError::Weighted);
    }
    let spec = net.to_spec();
    for step in candidates(&spec, rule) {
        let reduced = apply_step(&spec, &step)?.build()?;
        if reduced.is_unit_weighted() && validate_workflow(&reduced).is_ok() {
            return Ok(Some((reduced, step)));
        }
    }
    Ok(None)
}

/// Applies rules in [`RuleId::FIXPOINT_ORDER`], restarting after every
/// success, until none applies.
pub fn reduce_fixpoint(net: &Net) -> Result<(Net, ReductionTrace), NetError> {
    let mut current = net.clone();
    let mut trace = ReductionTrace::default();
    'outer: loop {
        for rule in RuleId::FIXPOINT_ORDER {
            if let Some((next, step)) = apply_rule(&current, rule)? {
                current = next;
                trace.steps.push(step);
                continue 'outer;
            }
        }
        return Ok((current, trace));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::chain::chain;
    use crate::generators::families::{fork_join, redistribution};
    use crate::oracle::{oracle_k_sound, KSound, DEFAULT_CAP};

    #[test]
    fn duplicate_transition() {
        let net = NetSpec::new("dup")
            .with_places(&["i", "f"])
            .with_transition("a", &[("i", 1)], &[("f", 1)])
            .with_transition("b", &[("i", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let (reduced, step) = apply_rule(&net, RuleId::R2).unwrap().unwrap();
        assert_eq!(reduced.num_transitions(), 1);
        assert_eq!(step.removed_transitions, vec!["b".to_string()]);
    }

    #[test]
    fn fork_join_reduces_to_single_transition() {
        let net = fork_join();
        let (reduced, trace) = reduce_fixpoint(&net).unwrap();
        assert!(reduced.size() < net.size());
        assert_eq!((reduced.num_places(), reduced.num_transitions()), (2, 1));
        assert_eq!(trace.replay(&net).unwrap(), reduced);
        assert_eq!(oracle_k_sound(&reduced, 1, DEFAULT_CAP), KSound::Sound);
        for rule in RuleId::ALL {
            assert!(apply_rule(&reduced, rule).unwrap().is_none());
        }
    }

    #[test]
    fn chain_bridge_is_fused() {
        let unit = NetSpec::new("u")
            .with_places(&["i", "f"])
            .with_transition("t", &[("i", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let net = chain(&[unit.clone(), unit]).unwrap();
        let (reduced, _) = reduce_fixpoint(&net).unwrap();
        assert!(reduced.num_places() < net.num_places());
        assert!(validate_workflow(&reduced).is_ok());
    }

    #[test]
    fn ring_is_merged() {
        let net = NetSpec::new("ring")
            .with_places(&["i", "a", "b", "f"])
            .with_transition("s", &[("i", 1)], &[("a", 1)])
            .with_transition("ab", &[("a", 1)], &[("b", 1)])
            .with_transition("ba", &[("b", 1)], &[("a", 1)])
            .with_transition("e", &[("b", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let (reduced, step) = apply_rule(&net, RuleId::R6).unwrap().unwrap();
        assert_eq!(step.removed_places, vec!["b".to_string()]);
        assert_eq!(reduced.num_transitions(), 2);
        assert!(reduced.place("a").is_some());
    }

    #[test]
    fn weighted_input_is_rejected() {
        let net = crate::generators::families::gen_family(crate::generators::families::Family::Sound, 2).unwrap();
        assert!(matches!(apply_rule(&net, RuleId::R1), Err(NetError::Weighted)));
    }

    #[test]
    fn redistribution_keeps_verdict() {
        let net = redistribution();
        let (reduced, trace) = reduce_fixpoint(&net).unwrap();
        assert_eq!(trace.replay(&net).unwrap(), reduced);
        for k in 1..=3 {
            let before = matches!(oracle_k_sound(&net, k, DEFAULT_CAP), KSound::Sound);
            let after = matches!(oracle_k_sound(&reduced, k, DEFAULT_CAP), KSound::Sound);
            assert_eq!(before, after, "k = {k}");
        }
    }

    #[test]
    fn rule_ids_parse() {
        assert_eq!("r4".parse::<RuleId>().unwrap(), RuleId::R4);
        assert!("R7".parse::<RuleId>().is_err());
    }
}
