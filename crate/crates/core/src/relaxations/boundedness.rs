use num_bigint::BigInt;
use num_traits::Signed;

use crate::lp::{lp_feasible, LinearSystem, LpResult, Relation};
use crate::marking::ParikhVector;
use crate::net::Net;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    /// Integral x ≥ 0 with Σ x_t Δ(t) > 0.
    Unbounded(ParikhVector),
}

impl Boundedness {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Boundedness::Bounded)
    }
}

/// Integer boundedness does not depend on the initial marking, so none is taken.
pub fn check_integer_boundedness(net: &Net) -> Boundedness {
    let mut sys = LinearSystem::new();
    for t in net.transition_ids() {
        sys.add_var(net.transition_name(t), true);
    }
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); net.num_places()];
    let mut total: Vec<(usize, Rational)> = Vec::new();
    for t in net.transition_ids() {
        let mut sum: i128 = 0;
        for (p, d) in net.effect(t) {
            rows[p.0].push((t.0, Rational::from_integer(d.into())));
            sum += d;
        }
        if sum != 0 {
            total.push((t.0, Rational::from_integer(sum.into())));
        }
    }
    for row in rows.into_iter().filter(|r| !r.is_empty()) {
        sys.add_constraint(row, Relation::Ge, rational::zero());
    }
    // Homogeneous encoding of Δx > 0: Δx ≥ 0 and Σ_p (Δx)[p] ≥ 1.
    sys.add_constraint(total, Relation::Ge, rational::one());
    match lp_feasible(&sys) {
        LpResult::Feasible(x) => {
            let ints = rational::to_primitive_integers(&x);
            Boundedness::Unbounded(ParikhVector::from_vec(
                ints.into_iter().map(Rational::from_integer).collect(),
            ))
        }
        _ => Boundedness::Bounded,
    }
}

/// x ≥ 0, Δx ≥ 0 componentwise and Δx ≠ 0.
pub fn is_unboundedness_witness(net: &Net, x: &ParikhVector) -> bool {
    if x.len() != net.num_transitions() || !x.is_nonnegative() {
        return false;
    }
    let effect = x.total_effect(net);
    effect.iter().all(|v| !v.is_negative()) && effect.iter().any(|v| v.is_positive())
}

/// Integer form of a witness, for display.
pub fn witness_counts(x: &ParikhVector) -> Vec<BigInt> {
    x.as_slice().iter().map(|v| v.to_integer()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::{fork_join, gen_family, Family};
    use crate::net::NetSpec;

    #[test]
    fn examples_are_bounded() {
        assert!(check_integer_boundedness(&fork_join()).is_bounded());
        for c in 1..6 {
            assert!(check_integer_boundedness(&gen_family(Family::Nc, c).unwrap()).is_bounded());
        }
    }

    #[test]
    fn duplicating_transition_is_unbounded() {
        let net = NetSpec::new("dup")
            .with_places(&["i", "p", "q", "f"])
            .with_transition("a", &[("i", 1)], &[("p", 1)])
            .with_transition("t_dup", &[("p", 1)], &[("p", 1), ("q", 1)])
            .with_transition("b", &[("p", 1), ("q", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        match check_integer_boundedness(&net) {
            Boundedness::Unbounded(x) => {
                assert!(is_unboundedness_witness(&net, &x));
                assert!(x.is_integral());
                let dup = net.transition_named("t_dup").unwrap();
                assert_eq!(x.support(), vec![dup]);
                assert_eq!(*x.get(dup), rational::int(1));
            }
            Boundedness::Bounded => panic!("expected unbounded"),
        }
    }
}
