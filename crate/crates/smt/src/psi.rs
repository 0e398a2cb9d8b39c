//! The formula ψ(m, m′), which holds iff m →Q* m′: the state equation plus
//! forward and backward realizability of the support of x.

use num_traits::{Signed, Zero};
use wfsound_core::marking::RationalMarking;
use wfsound_core::net::{Net, PlaceId, TransitionId};
use wfsound_core::rational::Rational;

use crate::script::{and, linear_sum, or, real, symbol, Sort};

/// How realizability of the support is expressed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Encoding {
    /// One real rank per transition and direction: every pre-place of a used
    /// transition is marked initially or produced by a used transition of
    /// smaller rank.
    #[default]
    Rank,
    /// Boolean saturation levels F^j_t for j < |T|.
    Level,
}

/// A marking given either by rational values or by SMT terms per place.
#[derive(Clone, Debug)]
pub enum MarkingTerm {
    Concrete(RationalMarking),
    Symbolic(Vec<String>),
    /// Symbolic values with Boolean terms standing for `m[p] > 0`. Under a
    /// quantifier this leaves the state equation as the only link to m.
    Flagged {
        values: Vec<String>,
        flags: Vec<String>,
    },
    /// Flagged, where the caller also asserts that the support is closed
    /// under firing: a transition whose pre-places are all marked marks its
    /// post-places. Forward realizability from such a marking only asks
    /// that every used transition has its pre-places marked.
    Closed {
        values: Vec<String>,
        flags: Vec<String>,
    },
}

impl MarkingTerm {
    fn term(&self, p: PlaceId) -> String {
        match self {
            MarkingTerm::Concrete(m) => real(m.get(p)),
            MarkingTerm::Symbolic(v)
            | MarkingTerm::Flagged { values: v, .. }
            | MarkingTerm::Closed { values: v, .. } => v[p.0].clone(),
        }
    }

    /// `m[p] > 0`, folded to a constant when m is concrete.
    fn positive(&self, p: PlaceId) -> String {
        match self {
            MarkingTerm::Concrete(m) => m.get(p).is_positive().to_string(),
            MarkingTerm::Symbolic(v) => format!("(> {} 0.0)", v[p.0]),
            MarkingTerm::Flagged { flags, .. } | MarkingTerm::Closed { flags, .. } => flags[p.0].clone(),
        }
    }

    fn is_known_positive(&self, p: PlaceId) -> bool {
        matches!(self, MarkingTerm::Concrete(m) if m.get(p).is_positive())
    }
}

/// Variables and body of one instance of ψ. The body is a closed term over
/// `vars` and the marking terms; callers declare the variables or bind them
/// in a quantifier.
#[derive(Clone, Debug)]
pub struct Psi {
    pub vars: Vec<(String, Sort)>,
    /// Parikh variable of each transition.
    pub x: Vec<String>,
    pub body: String,
}

impl Psi {
    /// `((v Sort) ...)` for a quantifier.
    pub fn binders(&self) -> String {
        let inner: Vec<String> = self.vars.iter().map(|(v, s)| format!("({v} {s})")).collect();
        format!("({})", inner.join(" "))
    }
}

/// `x > 0` for a Parikh variable of the given sort.
fn used(x: &str, integral: bool) -> String {
    if integral {
        format!("(> {x} 0)")
    } else {
        format!("(> {x} 0.0)")
    }
}

fn as_real(x: &str, integral: bool) -> String {
    if integral {
        format!("(to_real {x})")
    } else {
        x.to_string()
    }
}

/// Emits ψ(m, m′) with symbols prefixed by `prefix`.
pub fn emit_psi(
    net: &Net,
    m: &MarkingTerm,
    target: &MarkingTerm,
    x_integral: bool,
    encoding: Encoding,
    prefix: &str,
) -> Psi {
    let mut vars = Vec::new();
    let x: Vec<String> = net
        .transition_ids()
        .map(|t| symbol(&format!("{prefix}x"), t.0, net.transition_name(t)))
        .collect();
    let x_sort = if x_integral { Sort::Int } else { Sort::Real };
    vars.extend(x.iter().map(|v| (v.clone(), x_sort)));

    let mut conjuncts = Vec::new();
    for v in &x {
        conjuncts.push(if x_integral {
            format!("(>= {v} 0)")
        } else {
            format!("(>= {v} 0.0)")
        });
    }
    // State equation, place by place.
    let mut effects: Vec<Vec<(Rational, String)>> = vec![Vec::new(); net.num_places()];
    for t in net.transition_ids() {
        for (p, d) in net.effect(t) {
            effects[p.0].push((Rational::from_integer(d.into()), as_real(&x[t.0], x_integral)));
        }
    }
    for p in net.place_ids() {
        let mut rhs = vec![(Rational::from_integer(1.into()), m.term(p))];
        rhs.extend(effects[p.0].iter().cloned());
        let lhs = target.term(p);
        if let (MarkingTerm::Concrete(a), MarkingTerm::Concrete(b)) = (m, target) {
            if effects[p.0].is_empty() && a.get(p) == b.get(p) {
                continue;
            }
        }
        conjuncts.push(format!("(= {lhs} {})", linear_sum(&rhs)));
    }

    // Forward: pre-places come from m or from producers. Backward: post-places
    // come from m′ or from consumers (producers in the reversed net).
    for (tag, marking, forward) in [("f", m, true), ("b", target, false)] {
        let needs = |t: TransitionId| needed_places(net, t, forward);
        let feeders = |p: PlaceId| feeding_transitions(net, p, forward);
        if forward && matches!(marking, MarkingTerm::Closed { .. }) {
            for t in net.transition_ids() {
                let marked: Vec<String> = needs(t).into_iter().map(|p| marking.positive(p)).collect();
                if !marked.is_empty() {
                    conjuncts.push(format!("(=> {} {})", used(&x[t.0], x_integral), and(marked)));
                }
            }
            continue;
        }
        match encoding {
            Encoding::Rank => {
                let rank: Vec<String> = net
                    .transition_ids()
                    .map(|t| symbol(&format!("{prefix}r{tag}"), t.0, net.transition_name(t)))
                    .collect();
                vars.extend(rank.iter().map(|v| (v.clone(), Sort::Real)));
                for t in net.transition_ids() {
                    let mut per_place = Vec::new();
                    for p in needs(t) {
                        if marking.is_known_positive(p) {
                            continue;
                        }
                        let mut options = vec![marking.positive(p)];
                        options.retain(|o| o != "false");
                        for s in feeders(p) {
                            if s != t {
                                options.push(format!(
                                    "(and {} (< {} {}))",
                                    used(&x[s.0], x_integral),
                                    rank[s.0],
                                    rank[t.0]
                                ));
                            }
                        }
                        per_place.push(or(options));
                    }
                    if !per_place.is_empty() {
                        conjuncts.push(format!("(=> {} {})", used(&x[t.0], x_integral), and(per_place)));
                    }
                }
            }
            Encoding::Level => {
                let levels = net.num_transitions();
                let level: Vec<Vec<String>> = (0..levels)
                    .map(|j| {
                        net.transition_ids()
                            .map(|t| symbol(&format!("{prefix}F{tag}{j}_"), t.0, net.transition_name(t)))
                            .collect()
                    })
                    .collect();
                for row in &level {
                    vars.extend(row.iter().map(|v| (v.clone(), Sort::Bool)));
                }
                for j in 0..levels {
                    for t in net.transition_ids() {
                        let mut parts = vec![used(&x[t.0], x_integral)];
                        for p in needs(t) {
                            let mut options = vec![marking.positive(p)];
                            if j > 0 {
                                options.extend(feeders(p).into_iter().map(|s| level[j - 1][s.0].clone()));
                            }
                            parts.push(or(options));
                        }
                        conjuncts.push(format!("(= {} {})", level[j][t.0], and(parts)));
                    }
                }
                if levels > 0 {
                    for t in net.transition_ids() {
                        conjuncts.push(format!("(=> {} {})", used(&x[t.0], x_integral), level[levels - 1][t.0]));
                    }
                }
            }
        }
    }
    Psi {
        vars,
        x,
        body: and(conjuncts),
    }
}

fn needed_places(net: &Net, t: TransitionId, forward: bool) -> Vec<PlaceId> {
    if forward {
        net.pre(t).places().collect()
    } else {
        net.post(t).places().collect()
    }
}

fn feeding_transitions(net: &Net, p: PlaceId, forward: bool) -> Vec<TransitionId> {
    if forward {
        net.producers(p).to_vec()
    } else {
        net.consumers(p).to_vec()
    }
}

/// Parikh vector read from a model; integers for integral mode.
pub fn parikh_from_model(model: &crate::script::SmtModel, psi: &Psi) -> Result<Vec<Rational>, String> {
    psi.x.iter().map(|v| model.number(v)).collect()
}

/// Checks a Parikh vector against ψ by substitution: x ≥ 0, the state
/// equation, and saturation of supp(x) in both directions.
pub fn validate_parikh(net: &Net, m: &RationalMarking, target: &RationalMarking, x: &[Rational]) -> Result<(), String> {
    use wfsound_core::relaxations::max_fireable_set;
    use wfsound_core::workflow::reverse_net;
    if x.len() != net.num_transitions() || x.iter().any(|v| v.is_negative()) {
        return Err("Parikh vector has the wrong length or a negative entry".into());
    }
    let mut reached: Vec<Rational> = m.as_slice().to_vec();
    for t in net.transition_ids() {
        if x[t.0].is_zero() {
            continue;
        }
        for (p, d) in net.effect(t) {
            reached[p.0] += Rational::from_integer(d.into()) * &x[t.0];
        }
    }
    if reached.as_slice() != target.as_slice() {
        return Err("state equation violated".into());
    }
    let support: Vec<bool> = x.iter().map(|v| v.is_positive()).collect();
    let forward = max_fireable_set(net, &m.support(), &support);
    let backward = max_fireable_set(&reverse_net(net), &target.support(), &support);
    for (k, &s) in support.iter().enumerate() {
        if s && !(forward.contains(TransitionId(k)) && backward.contains(TransitionId(k))) {
            return Err(format!(
                "transition {} used but not realizable",
                net.transition_name(TransitionId(k))
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use wfsound_core::generators::fork_join;
    use wfsound_core::rational::int;

    #[test]
    fn emission_is_deterministic_and_sized() {
        let net = fork_join();
        let (i, f) = net.endpoints().unwrap();
        let m = MarkingTerm::Concrete(RationalMarking::unit(net.num_places(), i, int(1)));
        let t = MarkingTerm::Concrete(RationalMarking::unit(net.num_places(), f, int(1)));
        let a = emit_psi(&net, &m, &t, false, Encoding::Rank, "");
        let b = emit_psi(&net, &m, &t, false, Encoding::Rank, "");
        assert_eq!(a.body, b.body);
        assert_eq!(a.vars.len(), 3 * net.num_transitions());
        let level = emit_psi(&net, &m, &t, false, Encoding::Level, "");
        let n = net.num_transitions();
        assert_eq!(level.vars.len(), n + 2 * n * n);
    }

    #[test]
    fn substitution_check() {
        let net = fork_join();
        let (i, f) = net.endpoints().unwrap();
        let m = RationalMarking::unit(net.num_places(), i, int(1));
        let t = RationalMarking::unit(net.num_places(), f, int(1));
        assert!(validate_parikh(&net, &m, &t, &vec![int(1); 4]).is_ok());
        assert!(validate_parikh(&net, &m, &t, &vec![int(2); 4]).is_err());
        assert!(validate_parikh(&net, &m, &m, &vec![int(0); 4]).is_ok());
    }
}
