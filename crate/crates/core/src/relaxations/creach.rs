//! Continuous reachability by the support fixpoint over the state equation.

use num_traits::{Signed, Zero};

use crate::lp::{lp_feasible, lp_maximize, LinearSystem, LpResult, Relation};
use crate::marking::{ParikhVector, RationalMarking};
use crate::net::{Net, PlaceId, TransitionId};
use crate::rational::{self, Rational};
use crate::relaxations::maxfs::{is_valid_layering, max_fireable_set};
use crate::workflow::reverse_net;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CreachCertificate {
    Reachable {
        parikh: ParikhVector,
        forward_order: Vec<TransitionId>,
        backward_order: Vec<TransitionId>,
    },
    Unreachable {
        fixpoint_support: Vec<TransitionId>,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CreachResult {
    pub reachable: bool,
    pub certificate: CreachCertificate,
}

/// State equation m′ = m + Σ_{t ∈ allowed} x_t Δ(t), x ≥ 0. Variable k is the k-th allowed transition.
fn state_equation(net: &Net, m: &RationalMarking, target: &RationalMarking, allowed: &[TransitionId]) -> LinearSystem {
    let mut sys = LinearSystem::new();
    for &t in allowed {
        sys.add_var(net.transition_name(t), true);
    }
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); net.num_places()];
    for (k, &t) in allowed.iter().enumerate() {
        for (p, d) in net.effect(t) {
            rows[p.0].push((k, Rational::from_integer(d.into())));
        }
    }
    for p in net.place_ids() {
        let rhs = target.get(p) - m.get(p);
        let row = std::mem::take(&mut rows[p.0]);
        if row.is_empty() && rhs.is_zero() {
            continue;
        }
        sys.add_constraint(row, Relation::Eq, rhs);
    }
    sys
}

/// Allowed transitions that are positive in some solution, plus the average of
/// the witnesses found (which is positive on all of them).
fn support_probe(
    net: &Net,
    m: &RationalMarking,
    target: &RationalMarking,
    allowed: &[TransitionId],
) -> Option<(Vec<bool>, Vec<Rational>)> {
    let sys = state_equation(net, m, target, allowed);
    let first = match lp_feasible(&sys) {
        LpResult::Feasible(a) => a,
        _ => return None,
    };
    let mut usable = vec![false; allowed.len()];
    let mut decided = vec![false; allowed.len()];
    let mut witnesses = vec![first];
    for (k, v) in witnesses[0].iter().enumerate() {
        if v.is_positive() {
            usable[k] = true;
            decided[k] = true;
        }
    }
    let one = rational::one();
    for k in 0..allowed.len() {
        if decided[k] {
            continue;
        }
        decided[k] = true;
        let Some(max) = lp_maximize(&sys, &[(k, one.clone())], &one) else {
            continue;
        };
        if max.value.is_positive() {
            for (j, v) in max.assignment.iter().enumerate() {
                if v.is_positive() {
                    usable[j] = true;
                    decided[j] = true;
                }
            }
            witnesses.push(max.assignment);
        }
    }
    let count = Rational::from_integer((witnesses.len() as i64).into());
    let mut average = vec![Rational::zero(); allowed.len()];
    for w in &witnesses {
        for (a, v) in average.iter_mut().zip(w) {
            *a += v;
        }
    }
    for a in average.iter_mut() {
        *a /= &count;
    }
    Some((usable, average))
}

/// Decides m →Q* m′.
pub fn decide_creach(net: &Net, m: &RationalMarking, target: &RationalMarking) -> CreachResult {
    let reversed = reverse_net(net);
    let from = m.support();
    let to = target.support();
    let mut current: Vec<TransitionId> = net.transition_ids().collect();
    let witness: Vec<Rational> = loop {
        let (usable, average) = if current.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            match support_probe(net, m, target, &current) {
                Some(found) => found,
                None => (vec![false; current.len()], vec![Rational::zero(); current.len()]),
            }
        };
        let mut t1 = vec![false; net.num_transitions()];
        for (k, &t) in current.iter().enumerate() {
            if usable[k] {
                t1[t.0] = true;
            }
        }
        let t2 = max_fireable_set(net, &from, &t1);
        let t3 = max_fireable_set(&reversed, &to, &t2.mask());
        let next: Vec<TransitionId> = net.transition_ids().filter(|&t| t3.contains(t)).collect();
        if next == current {
            break average;
        }
        current = next;
    };

    if current.is_empty() {
        if m == target {
            return CreachResult {
                reachable: true,
                certificate: CreachCertificate::Reachable {
                    parikh: ParikhVector::zero(net.num_transitions()),
                    forward_order: Vec::new(),
                    backward_order: Vec::new(),
                },
            };
        }
        return CreachResult {
            reachable: false,
            certificate: CreachCertificate::Unreachable {
                fixpoint_support: Vec::new(),
                reason: "no transition survives the fixpoint and the markings differ".into(),
            },
        };
    }

    let mut parikh = ParikhVector::zero(net.num_transitions());
    for (k, &t) in current.iter().enumerate() {
        parikh.set(t, witness[k].clone());
    }
    let mask: Vec<bool> = {
        let mut v = vec![false; net.num_transitions()];
        for t in &current {
            v[t.0] = true;
        }
        v
    };
    let forward_order = max_fireable_set(net, &from, &mask).order;
    let backward_order = max_fireable_set(&reversed, &to, &mask).order;
    CreachResult {
        reachable: true,
        certificate: CreachCertificate::Reachable {
            parikh,
            forward_order,
            backward_order,
        },
    }
}

pub fn verify_creach_certificate(
    net: &Net,
    m: &RationalMarking,
    target: &RationalMarking,
    certificate: &CreachCertificate,
) -> bool {
    let CreachCertificate::Reachable {
        parikh,
        forward_order,
        backward_order,
    } = certificate
    else {
        return false;
    };
    if parikh.len() != net.num_transitions() || !parikh.is_nonnegative() {
        return false;
    }
    if parikh.apply(net, m).as_slice() != target.as_slice() {
        return false;
    }
    let support = parikh.support();
    let from: Vec<PlaceId> = m.support();
    let to: Vec<PlaceId> = target.support();
    is_valid_layering(net, &from, forward_order, &support)
        && is_valid_layering(&reverse_net(net), &to, backward_order, &support)
}
