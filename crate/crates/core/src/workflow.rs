//! Structural checks: workflow conditions, free choice, reversal, place invariants.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::error::NetError;
use crate::marking::{Marking, RationalMarking};
use crate::net::{Net, PlaceId, Transition, TransitionId};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingInitial,
    MissingFinal,
    InitialIsFinal,
    ProducesIntoInitial(String),
    ConsumesFromFinal(String),
    NotOnPath(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingInitial => write!(f, "no initial place"),
            Violation::MissingFinal => write!(f, "no final place"),
            Violation::InitialIsFinal => write!(f, "initial and final place coincide"),
            Violation::ProducesIntoInitial(t) => write!(f, "transition `{t}` produces into the initial place"),
            Violation::ConsumesFromFinal(t) => write!(f, "transition `{t}` consumes from the final place"),
            Violation::NotOnPath(n) => write!(f, "`{n}` is not on a path from the initial to the final place"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WorkflowCheck {
    pub violations: Vec<Violation>,
}

impl WorkflowCheck {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), NetError> {
        if self.is_ok() {
            Ok(())
        } else {
            let text: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(NetError::NotWorkflow(text.join("; ")))
        }
    }
}

pub fn validate_workflow(net: &Net) -> WorkflowCheck {
    let mut violations = Vec::new();
    let (i, f) = match (net.initial(), net.final_place()) {
        (Some(i), Some(f)) => (i, f),
        (i, f) => {
            if i.is_none() {
                violations.push(Violation::MissingInitial);
            }
            if f.is_none() {
                violations.push(Violation::MissingFinal);
            }
            return WorkflowCheck { violations };
        }
    };
    if i == f {
        violations.push(Violation::InitialIsFinal);
    }
    for t in net.transitions() {
        if t.post.contains(i) {
            violations.push(Violation::ProducesIntoInitial(t.name.clone()));
        }
        if t.pre.contains(f) {
            violations.push(Violation::ConsumesFromFinal(t.name.clone()));
        }
    }
    let (fwd_p, fwd_t) = reach_from(net, i, false);
    let (bwd_p, bwd_t) = reach_from(net, f, true);
    for p in net.place_ids() {
        if !(fwd_p[p.0] && bwd_p[p.0]) {
            violations.push(Violation::NotOnPath(net.place_name(p).to_string()));
        }
    }
    for t in net.transition_ids() {
        if !(fwd_t[t.0] && bwd_t[t.0]) {
            violations.push(Violation::NotOnPath(net.transition_name(t).to_string()));
        }
    }
    WorkflowCheck { violations }
}

/// Node reachability in the underlying graph, optionally against arc direction.
fn reach_from(net: &Net, start: PlaceId, backward: bool) -> (Vec<bool>, Vec<bool>) {
    let mut seen_p = vec![false; net.num_places()];
    let mut seen_t = vec![false; net.num_transitions()];
    let mut queue = VecDeque::from([start]);
    seen_p[start.0] = true;
    while let Some(p) = queue.pop_front() {
        let next_t = if backward { net.producers(p) } else { net.consumers(p) };
        for &t in next_t {
            if seen_t[t.0] {
                continue;
            }
            seen_t[t.0] = true;
            let places = if backward { net.pre(t) } else { net.post(t) };
            for q in places.places() {
                if !seen_p[q.0] {
                    seen_p[q.0] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    (seen_p, seen_t)
}

/// Any two transitions have disjoint pre-supports or equal pre-vectors.
pub fn is_free_choice(net: &Net) -> bool {
    net.place_ids().all(|p| {
        let consumers = net.consumers(p);
        consumers.windows(2).all(|w| net.pre(w[0]) == net.pre(w[1]))
    })
}

/// Swaps pre and post of every transition and the initial/final places.
/// Transition names are kept, so reversing twice gives back the same net.
pub fn reverse_net(net: &Net) -> Net {
    let transitions = net
        .transitions()
        .iter()
        .map(|t| Transition {
            name: t.name.clone(),
            pre: t.post.clone(),
            post: t.pre.clone(),
        })
        .collect();
    Net::from_parts(
        net.name(),
        net.place_names().to_vec(),
        transitions,
        net.final_place(),
        net.initial(),
    )
    .expect("reversal keeps ids valid")
}

/// Rational place weighting; absent places weigh 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlaceInvariant(BTreeMap<PlaceId, Rational>);

impl PlaceInvariant {
    pub fn new(entries: impl IntoIterator<Item = (PlaceId, Rational)>) -> Self {
        PlaceInvariant(entries.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }

    pub fn named(net: &Net, entries: &[(&str, Rational)]) -> Result<Self, NetError> {
        let mut pairs = Vec::new();
        for (name, v) in entries {
            let p = net.place(name).ok_or_else(|| NetError::UnknownPlace {
                place: name.to_string(),
                context: "place invariant".into(),
            })?;
            pairs.push((p, v.clone()));
        }
        Ok(Self::new(pairs))
    }

    pub fn get(&self, p: PlaceId) -> Rational {
        self.0.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, &Rational)> {
        self.0.iter().map(|(p, v)| (*p, v))
    }

    /// x·m.
    pub fn weigh(&self, m: &Marking) -> Rational {
        self.0
            .iter()
            .map(|(p, v)| v * Rational::from_integer(m.get(*p).into()))
            .sum()
    }

    pub fn weigh_rational(&self, m: &RationalMarking) -> Rational {
        self.0.iter().map(|(p, v)| v * m.get(*p)).sum()
    }
}

/// For every t in `over`: x·pre(t) = x·post(t).
pub fn is_place_invariant(net: &Net, x: &PlaceInvariant, over: &[TransitionId]) -> bool {
    over.iter().all(|&t| {
        let side = |w: &crate::net::Weights| -> Rational {
            w.iter().map(|(p, n)| x.get(p) * Rational::from_integer(n.into())).sum()
        };
        side(net.pre(t)) == side(net.post(t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::{fork_join, gen_family, redistribution, Family};
    use crate::net::NetSpec;
    use crate::rational::int;

    #[test]
    fn fork_join_is_workflow_and_free_choice() {
        let net = fork_join();
        assert!(validate_workflow(&net).is_ok());
        assert!(is_free_choice(&net));
        assert!(!is_free_choice(&redistribution()));
        assert!(validate_workflow(&redistribution()).is_ok());
    }

    #[test]
    fn producing_into_initial_is_violation() {
        let net = NetSpec::new("bad")
            .with_places(&["i", "f"])
            .with_transition("t", &[("i", 1)], &[("f", 1), ("i", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let check = validate_workflow(&net);
        assert!(check.violations.contains(&Violation::ProducesIntoInitial("t".into())));
    }

    #[test]
    fn isolated_place_is_violation() {
        let net = NetSpec::new("iso")
            .with_places(&["i", "f", "lonely"])
            .with_transition("t", &[("i", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let check = validate_workflow(&net);
        assert_eq!(check.violations, vec![Violation::NotOnPath("lonely".into())]);
    }

    #[test]
    fn single_transition_is_free_choice() {
        let net = gen_family(Family::Sound, 3).unwrap();
        assert!(is_free_choice(&net));
    }

    #[test]
    fn reversal_of_fork_join() {
        let net = fork_join();
        let rev = reverse_net(&net);
        let s = rev.transition_named("s").unwrap();
        let expected = NetSpec::new("fork-join")
            .with_places(&["i", "p1", "p2", "q1", "q2", "f"])
            .with_transition("s", &[("p1", 1), ("p2", 1)], &[("i", 1)])
            .build()
            .unwrap();
        let es = expected.transition_named("s").unwrap();
        assert_eq!(rev.pre(s), expected.pre(es));
        assert_eq!(rev.post(s), expected.post(es));
        assert_eq!(rev.initial(), net.final_place());
        assert_eq!(reverse_net(&rev), net);
    }

    #[test]
    fn place_invariants_of_examples() {
        let c = 4;
        let nc = gen_family(Family::Nc, c).unwrap();
        let all: Vec<_> = nc.transition_ids().collect();
        let x = PlaceInvariant::named(
            &nc,
            &[
                ("i", int(c as i64 + 1)),
                ("p", int(1)),
                ("r", int(c as i64)),
                ("f", int(c as i64 + 1)),
            ],
        )
        .unwrap();
        assert!(is_place_invariant(&nc, &x, &all));
        assert!(is_place_invariant(&nc, &PlaceInvariant::default(), &all));

        let left = fork_join();
        let all: Vec<_> = left.transition_ids().collect();
        let x = PlaceInvariant::named(
            &left,
            &[
                ("i", int(2)),
                ("p1", int(1)),
                ("p2", int(1)),
                ("q1", int(1)),
                ("q2", int(1)),
                ("f", int(2)),
            ],
        )
        .unwrap();
        assert!(is_place_invariant(&left, &x, &all));
        let wrong = PlaceInvariant::named(&left, &[("i", int(1))]).unwrap();
        assert!(!is_place_invariant(&left, &wrong, &all));
    }
}
