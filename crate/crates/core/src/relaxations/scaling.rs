//! Conversions between discrete runs from b·m and continuous runs from m.

use num_traits::{One, Signed};
use thiserror::Error;

use crate::marking::{Marking, ParikhVector, RationalMarking};
use crate::net::{Net, TransitionId};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ContinuousRun(pub Vec<(Rational, TransitionId)>);

impl ContinuousRun {
    /// Replays from `m`; `None` if a factor leaves (0, 1] or a place goes negative.
    pub fn replay(&self, net: &Net, m: &RationalMarking) -> Option<RationalMarking> {
        let mut current = m.clone();
        for (lambda, t) in &self.0 {
            if !lambda.is_positive() || *lambda > Rational::one() {
                return None;
            }
            current = current.fire_scaled(net, *t, lambda)?;
        }
        Some(current)
    }

    pub fn parikh(&self, transitions: usize) -> ParikhVector {
        let mut x = ParikhVector::zero(transitions);
        for (lambda, t) in &self.0 {
            let v = x.get(*t) + lambda;
            x.set(*t, v);
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Run {
    Discrete(Vec<TransitionId>),
    Continuous(ContinuousRun),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToContinuous,
    ToDiscrete,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalingError {
    #[error("scaling factor b must be positive")]
    ZeroFactor,
    #[error("factor {factor} at step {step} times {b} is not a natural number")]
    NotDivisible { step: usize, factor: String, b: u64 },
    #[error("run kind does not match the requested direction")]
    WrongKind,
}

/// Each t becomes (1/b)·t.
pub fn to_continuous(run: &[TransitionId], b: u64) -> Result<ContinuousRun, ScalingError> {
    if b == 0 {
        return Err(ScalingError::ZeroFactor);
    }
    let beta = Rational::new(1.into(), b.into());
    Ok(ContinuousRun(run.iter().map(|&t| (beta.clone(), t)).collect()))
}

/// Each (λ, t) becomes t repeated b·λ times.
pub fn to_discrete(run: &ContinuousRun, b: u64) -> Result<Vec<TransitionId>, ScalingError> {
    if b == 0 {
        return Err(ScalingError::ZeroFactor);
    }
    let scale = Rational::from_integer(b.into());
    let mut out = Vec::new();
    for (step, (lambda, t)) in run.0.iter().enumerate() {
        let times = lambda * &scale;
        if !times.is_integer() || times.is_negative() {
            return Err(ScalingError::NotDivisible {
                step,
                factor: crate::rational::format(lambda),
                b,
            });
        }
        let n: u64 = times.to_integer().try_into().map_err(|_| ScalingError::NotDivisible {
            step,
            factor: crate::rational::format(lambda),
            b,
        })?;
        out.extend(std::iter::repeat_n(*t, n as usize));
    }
    Ok(out)
}

pub fn rescale_run(direction: Direction, run: &Run, b: u64) -> Result<Run, ScalingError> {
    match (direction, run) {
        (Direction::ToContinuous, Run::Discrete(r)) => to_continuous(r, b).map(Run::Continuous),
        (Direction::ToDiscrete, Run::Continuous(r)) => to_discrete(r, b).map(Run::Discrete),
        _ => Err(ScalingError::WrongKind),
    }
}

/// Least common multiple of the scaling-factor denominators.
pub fn common_denominator(run: &ContinuousRun) -> num_bigint::BigInt {
    crate::rational::denominator_lcm(run.0.iter().map(|(l, _)| l))
}

/// Replays a discrete run from b·m.
pub fn replay_scaled(net: &Net, m: &Marking, b: u64, run: &[TransitionId]) -> Option<Marking> {
    m.scale(b).fire_sequence(net, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::fork_join;
    use crate::rational::{int, ratio};

    #[test]
    fn fork_join_run_halved() {
        let net = fork_join();
        let run = net.transitions_named(&["s", "t1", "t2", "u"]).unwrap();
        let cont = to_continuous(&run, 2).unwrap();
        let m = RationalMarking::named(&net, &[("i", ratio(1, 2))]).unwrap();
        let end = cont.replay(&net, &m).unwrap();
        assert_eq!(end, RationalMarking::named(&net, &[("f", ratio(1, 2))]).unwrap());
        assert_eq!(to_discrete(&cont, 2).unwrap(), run);
    }

    #[test]
    fn identity_for_b_one() {
        let net = fork_join();
        let run = net.transitions_named(&["s", "t2"]).unwrap();
        let cont = to_continuous(&run, 1).unwrap();
        assert!(cont.0.iter().all(|(l, _)| *l == int(1)));
        assert_eq!(to_discrete(&cont, 1).unwrap(), run);
    }

    #[test]
    fn quarter_run_to_discrete() {
        let net = fork_join();
        let s = net.transition_named("s").unwrap();
        let t1 = net.transition_named("t1").unwrap();
        let cont = ContinuousRun(vec![(ratio(1, 2), s), (ratio(1, 4), t1)]);
        let discrete = to_discrete(&cont, 4).unwrap();
        assert_eq!(discrete, vec![s, s, t1]);
        let i4 = net.marking(&[("i", 1)]).unwrap();
        assert!(replay_scaled(&net, &i4, 4, &discrete).is_some());
        assert!(matches!(
            to_discrete(&cont, 2),
            Err(ScalingError::NotDivisible { step: 1, .. })
        ));
    }
}
