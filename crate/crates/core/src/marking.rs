//! Discrete and continuous markings, Parikh vectors.
//!
//! Markings are stored densely over the places of their owning net, so equal
//! markings hash identically. They print sparsely.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::NetError;
use crate::net::{Net, PlaceId, TransitionId, Weights};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<u64>);

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn from_vec(counts: Vec<u64>) -> Self {
        Marking(counts)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        self.0[p.0]
    }

    pub fn set(&mut self, p: PlaceId, k: u64) {
        self.0[p.0] = k;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn total(&self) -> u128 {
        self.0.iter().map(|&k| k as u128).sum()
    }

    pub fn support(&self) -> Vec<PlaceId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, _)| PlaceId(i))
            .collect()
    }

    pub fn covers(&self, w: &Weights) -> bool {
        w.iter().all(|(p, n)| self.0[p.0] >= n)
    }

    /// Componentwise ≥.
    pub fn dominates(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn enables(&self, net: &Net, t: TransitionId) -> bool {
        self.covers(net.pre(t))
    }

    pub fn fire(&self, net: &Net, t: TransitionId) -> Option<Marking> {
        if !self.enables(net, t) {
            return None;
        }
        let mut next = self.clone();
        for (p, w) in net.pre(t).iter() {
            next.0[p.0] -= w;
        }
        for (p, w) in net.post(t).iter() {
            next.0[p.0] = next.0[p.0].checked_add(w).expect("token count overflow");
        }
        Some(next)
    }

    /// Fires a sequence, returning `None` at the first disabled transition.
    pub fn fire_sequence(&self, net: &Net, run: &[TransitionId]) -> Option<Marking> {
        let mut m = self.clone();
        for &t in run {
            m = m.fire(net, t)?;
        }
        Some(m)
    }

    pub fn scale(&self, b: u64) -> Marking {
        Marking(self.0.iter().map(|&k| k * b).collect())
    }

    pub fn to_rational(&self) -> RationalMarking {
        RationalMarking(self.0.iter().map(|&k| rational::int(k as i64)).collect())
    }

    pub fn to_map(&self, net: &Net) -> BTreeMap<String, u64> {
        self.support()
            .into_iter()
            .map(|p| (net.place_name(p).to_string(), self.get(p)))
            .collect()
    }

    pub fn display<'a>(&'a self, net: &'a Net) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            write!(f, "{{")?;
            for (idx, p) in self.support().into_iter().enumerate() {
                if idx > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}: {}", net.place_name(p), self.get(p))?;
            }
            write!(f, "}}")
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMarking(Vec<Rational>);

impl RationalMarking {
    pub fn zero(places: usize) -> Self {
        RationalMarking(vec![Rational::zero(); places])
    }

    pub fn from_vec(values: Vec<Rational>) -> Self {
        RationalMarking(values)
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> &Rational {
        &self.0[p.0]
    }

    pub fn set(&mut self, p: PlaceId, value: Rational) {
        self.0[p.0] = value;
    }

    pub fn unit(places: usize, p: PlaceId, value: Rational) -> Self {
        let mut m = Self::zero(places);
        m.set(p, value);
        m
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|v| !v.is_negative())
    }

    pub fn support(&self) -> Vec<PlaceId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| PlaceId(i))
            .collect()
    }

    pub fn scale(&self, factor: &Rational) -> RationalMarking {
        RationalMarking(self.0.iter().map(|v| v * factor).collect())
    }

    /// Adds λ·Δ(t) without checking enabledness.
    pub fn add_effect(&mut self, net: &Net, t: TransitionId, lambda: &Rational) {
        for (p, d) in net.effect(t) {
            self.0[p.0] += lambda * Rational::from_integer(d.into());
        }
    }

    /// Fires λ·t when λ·pre(t) ≤ m; λ is not range-checked here.
    pub fn fire_scaled(&self, net: &Net, t: TransitionId, lambda: &Rational) -> Option<RationalMarking> {
        for (p, w) in net.pre(t).iter() {
            if lambda * Rational::from_integer((w as i64).into()) > self.0[p.0] {
                return None;
            }
        }
        let mut next = self.clone();
        next.add_effect(net, t, lambda);
        Some(next)
    }

    /// Exact integer form when every entry is integral and nonnegative.
    pub fn to_marking(&self) -> Option<Marking> {
        self.0
            .iter()
            .map(|v| {
                if v.is_integer() && !v.is_negative() {
                    v.to_integer().try_into().ok()
                } else {
                    None
                }
            })
            .collect::<Option<Vec<u64>>>()
            .map(Marking)
    }

    pub fn to_map(&self, net: &Net) -> BTreeMap<String, String> {
        self.support()
            .into_iter()
            .map(|p| (net.place_name(p).to_string(), rational::format(self.get(p))))
            .collect()
    }

    pub fn from_map(net: &Net, map: &BTreeMap<String, String>) -> Result<Self, NetError> {
        let mut m = Self::zero(net.num_places());
        for (name, value) in map {
            let p = net.place(name).ok_or_else(|| NetError::UnknownPlace {
                place: name.clone(),
                context: "marking".into(),
            })?;
            let v = rational::parse(value)
                .filter(|v| !v.is_negative())
                .ok_or_else(|| NetError::Invalid(format!("bad token amount `{value}` for `{name}`")))?;
            m.set(p, v);
        }
        Ok(m)
    }

    pub fn named(net: &Net, pairs: &[(&str, Rational)]) -> Result<Self, NetError> {
        let mut m = Self::zero(net.num_places());
        for (name, v) in pairs {
            let p = net.place(name).ok_or_else(|| NetError::UnknownPlace {
                place: name.to_string(),
                context: "marking".into(),
            })?;
            m.set(p, v.clone());
        }
        Ok(m)
    }

    pub fn display<'a>(&'a self, net: &'a Net) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            write!(f, "{{")?;
            for (idx, p) in self.support().into_iter().enumerate() {
                if idx > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}: {}", net.place_name(p), rational::format(self.get(p)))?;
            }
            write!(f, "}}")
        })
    }
}

/// Per-transition amounts, indexed by transition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParikhVector(Vec<Rational>);

impl ParikhVector {
    pub fn zero(transitions: usize) -> Self {
        ParikhVector(vec![Rational::zero(); transitions])
    }

    pub fn from_vec(values: Vec<Rational>) -> Self {
        ParikhVector(values)
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        ParikhVector(counts.iter().map(|&c| rational::int(c as i64)).collect())
    }

    /// Counts of each transition in a run.
    pub fn of_run(transitions: usize, run: &[TransitionId]) -> Self {
        let mut counts = vec![0u64; transitions];
        for t in run {
            counts[t.0] += 1;
        }
        Self::from_counts(&counts)
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, t: TransitionId) -> &Rational {
        &self.0[t.0]
    }

    pub fn set(&mut self, t: TransitionId, value: Rational) {
        self.0[t.0] = value;
    }

    pub fn support(&self) -> Vec<TransitionId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| TransitionId(i))
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|v| !v.is_negative())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|v| v.is_integer())
    }

    /// m + Σ x_t Δ(t), possibly with negative entries.
    pub fn apply(&self, net: &Net, m: &RationalMarking) -> Vec<Rational> {
        let mut out = m.as_slice().to_vec();
        for t in net.transition_ids() {
            let x = &self.0[t.0];
            if x.is_zero() {
                continue;
            }
            for (p, d) in net.effect(t) {
                out[p.0] += x * Rational::from_integer(d.into());
            }
        }
        out
    }

    /// Σ x_t Δ(t).
    pub fn total_effect(&self, net: &Net) -> Vec<Rational> {
        self.apply(net, &RationalMarking::zero(net.num_places()))
    }

    pub fn to_map(&self, net: &Net) -> BTreeMap<String, String> {
        self.support()
            .into_iter()
            .map(|t| (net.transition_name(t).to_string(), rational::format(self.get(t))))
            .collect()
    }

    pub fn from_map(net: &Net, map: &BTreeMap<String, String>) -> Result<Self, NetError> {
        let mut x = Self::zero(net.num_transitions());
        for (name, value) in map {
            let t = net
                .transition_named(name)
                .ok_or_else(|| NetError::UnknownTransition(name.clone()))?;
            let v = rational::parse(value)
                .ok_or_else(|| NetError::Invalid(format!("bad amount `{value}` for `{name}`")))?;
            x.set(t, v);
        }
        Ok(x)
    }
}

struct DisplayWith<F>(F);

impl<F: Fn(&mut fmt::Formatter<'_>) -> fmt::Result> fmt::Display for DisplayWith<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (self.0)(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetSpec;
    use crate::rational::ratio;

    fn toy() -> Net {
        NetSpec::new("toy")
            .with_places(&["i", "p", "f"])
            .with_transition("a", &[("i", 1)], &[("p", 2)])
            .with_transition("b", &[("p", 2)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap()
    }

    #[test]
    fn firing_and_display() {
        let net = toy();
        let m = net.marking(&[("i", 1)]).unwrap();
        let a = net.transition_named("a").unwrap();
        let b = net.transition_named("b").unwrap();
        assert!(m.fire(&net, b).is_none());
        let m1 = m.fire(&net, a).unwrap();
        assert_eq!(m1.display(&net).to_string(), "{p: 2}");
        assert_eq!(
            m.fire_sequence(&net, &[a, b]).unwrap(),
            net.marking(&[("f", 1)]).unwrap()
        );
    }

    #[test]
    fn scaled_firing() {
        let net = toy();
        let a = net.transition_named("a").unwrap();
        let m = net.marking(&[("i", 1)]).unwrap().to_rational();
        let half = ratio(1, 2);
        let m1 = m.fire_scaled(&net, a, &half).unwrap();
        assert_eq!(m1.display(&net).to_string(), "{i: 1/2, p: 1}");
        assert!(m1.fire_scaled(&net, a, &ratio(3, 4)).is_none());
    }

    #[test]
    fn map_round_trip() {
        let net = toy();
        let m = RationalMarking::named(&net, &[("p", ratio(2, 3))]).unwrap();
        let back = RationalMarking::from_map(&net, &m.to_map(&net)).unwrap();
        assert_eq!(m, back);
    }
}
