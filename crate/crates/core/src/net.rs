//! Place/transition nets with natural arc weights.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::NetError;
use crate::marking::Marking;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p#{}", self.0)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t#{}", self.0)
    }
}

/// Sparse weight vector over places. Sorted by place, never stores a zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weights(Vec<(PlaceId, u64)>);

impl Weights {
    /// Duplicate places are summed and zero entries dropped.
    pub fn new(pairs: impl IntoIterator<Item = (PlaceId, u64)>) -> Self {
        let mut merged: BTreeMap<PlaceId, u64> = BTreeMap::new();
        for (p, w) in pairs {
            *merged.entry(p).or_insert(0) += w;
        }
        Weights(merged.into_iter().filter(|&(_, w)| w > 0).collect())
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        match self.0.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(idx) => self.0[idx].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, p: PlaceId) -> bool {
        self.get(p) > 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u64)> + '_ {
        self.0.iter().copied()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, w)| w).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&(_, w)| w == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub pre: Weights,
    pub post: Weights,
}

/// Serializable mirror of [`Net`], keyed by names. This is the native JSON shape.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub name: String,
    pub places: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub initial_place: Option<String>,
    #[serde(default)]
    pub final_place: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub id: String,
    #[serde(default)]
    pub pre: BTreeMap<String, u64>,
    #[serde(default)]
    pub post: BTreeMap<String, u64>,
}

impl NetSpec {
    pub fn new(name: impl Into<String>) -> Self {
        NetSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_places(mut self, names: &[&str]) -> Self {
        self.places.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn with_transition(mut self, id: &str, pre: &[(&str, u64)], post: &[(&str, u64)]) -> Self {
        self.add_transition(id, pre, post);
        self
    }

    pub fn add_transition(&mut self, id: &str, pre: &[(&str, u64)], post: &[(&str, u64)]) {
        let collect = |pairs: &[(&str, u64)]| {
            let mut map = BTreeMap::new();
            for &(p, w) in pairs {
                *map.entry(p.to_string()).or_insert(0) += w;
            }
            map
        };
        self.transitions.push(TransitionSpec {
            id: id.to_string(),
            pre: collect(pre),
            post: collect(post),
        });
    }

    pub fn with_initial(mut self, place: &str) -> Self {
        self.initial_place = Some(place.to_string());
        self
    }

    pub fn with_final(mut self, place: &str) -> Self {
        self.final_place = Some(place.to_string());
        self
    }

    pub fn build(self) -> Result<Net, NetError> {
        Net::from_spec(self)
    }
}

/// Immutable net. Places and transitions are indexed in declaration order.
#[derive(Clone, Debug)]
pub struct Net {
    name: String,
    places: Vec<String>,
    transitions: Vec<Transition>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    initial: Option<PlaceId>,
    final_place: Option<PlaceId>,
    producers: Vec<Vec<TransitionId>>,
    consumers: Vec<Vec<TransitionId>>,
}

impl PartialEq for Net {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.places == other.places
            && self.transitions == other.transitions
            && self.initial == other.initial
            && self.final_place == other.final_place
    }
}

impl Eq for Net {}

impl Net {
    pub fn from_spec(spec: NetSpec) -> Result<Net, NetError> {
        let mut place_index = HashMap::new();
        for (idx, name) in spec.places.iter().enumerate() {
            if place_index.insert(name.clone(), PlaceId(idx)).is_some() {
                return Err(NetError::DuplicateId(name.clone()));
            }
        }
        let mut transition_index = HashMap::new();
        let mut transitions = Vec::with_capacity(spec.transitions.len());
        for (idx, t) in spec.transitions.into_iter().enumerate() {
            if place_index.contains_key(&t.id) || transition_index.insert(t.id.clone(), TransitionId(idx)).is_some() {
                return Err(NetError::DuplicateId(t.id));
            }
            let resolve = |map: &BTreeMap<String, u64>| -> Result<Weights, NetError> {
                let mut pairs = Vec::with_capacity(map.len());
                for (p, &w) in map {
                    let pid = *place_index.get(p).ok_or_else(|| NetError::UnknownPlace {
                        place: p.clone(),
                        context: t.id.clone(),
                    })?;
                    if w == 0 {
                        return Err(NetError::ZeroWeight {
                            transition: t.id.clone(),
                            place: p.clone(),
                        });
                    }
                    pairs.push((pid, w));
                }
                Ok(Weights::new(pairs))
            };
            let pre = resolve(&t.pre)?;
            let post = resolve(&t.post)?;
            transitions.push(Transition { name: t.id, pre, post });
        }
        let lookup = |name: &Option<String>, context: &str| -> Result<Option<PlaceId>, NetError> {
            match name {
                None => Ok(None),
                Some(n) => place_index
                    .get(n)
                    .copied()
                    .map(Some)
                    .ok_or_else(|| NetError::UnknownPlace {
                        place: n.clone(),
                        context: context.to_string(),
                    }),
            }
        };
        let initial = lookup(&spec.initial_place, "initial_place")?;
        let final_place = lookup(&spec.final_place, "final_place")?;
        Ok(Self::assemble(
            spec.name,
            spec.places,
            transitions,
            place_index,
            transition_index,
            initial,
            final_place,
        ))
    }

    fn assemble(
        name: String,
        places: Vec<String>,
        transitions: Vec<Transition>,
        place_index: HashMap<String, PlaceId>,
        transition_index: HashMap<String, TransitionId>,
        initial: Option<PlaceId>,
        final_place: Option<PlaceId>,
    ) -> Net {
        let mut producers = vec![Vec::new(); places.len()];
        let mut consumers = vec![Vec::new(); places.len()];
        for (idx, t) in transitions.iter().enumerate() {
            for p in t.pre.places() {
                consumers[p.0].push(TransitionId(idx));
            }
            for p in t.post.places() {
                producers[p.0].push(TransitionId(idx));
            }
        }
        Net {
            name,
            places,
            transitions,
            place_index,
            transition_index,
            initial,
            final_place,
            producers,
            consumers,
        }
    }

    /// Builds a net from already resolved transitions.
    pub fn from_parts(
        name: impl Into<String>,
        places: Vec<String>,
        transitions: Vec<Transition>,
        initial: Option<PlaceId>,
        final_place: Option<PlaceId>,
    ) -> Result<Net, NetError> {
        let mut place_index = HashMap::new();
        for (idx, p) in places.iter().enumerate() {
            if place_index.insert(p.clone(), PlaceId(idx)).is_some() {
                return Err(NetError::DuplicateId(p.clone()));
            }
        }
        let mut transition_index = HashMap::new();
        for (idx, t) in transitions.iter().enumerate() {
            if place_index.contains_key(&t.name) || transition_index.insert(t.name.clone(), TransitionId(idx)).is_some()
            {
                return Err(NetError::DuplicateId(t.name.clone()));
            }
            for (p, _) in t.pre.iter().chain(t.post.iter()) {
                if p.0 >= places.len() {
                    return Err(NetError::UnknownPlace {
                        place: p.to_string(),
                        context: t.name.clone(),
                    });
                }
            }
        }
        for p in initial.iter().chain(final_place.iter()) {
            if p.0 >= places.len() {
                return Err(NetError::Invalid(format!("designated place {p} out of range")));
            }
        }
        Ok(Self::assemble(
            name.into(),
            places,
            transitions,
            place_index,
            transition_index,
            initial,
            final_place,
        ))
    }

    pub fn to_spec(&self) -> NetSpec {
        let named = |w: &Weights| {
            w.iter()
                .map(|(p, n)| (self.places[p.0].clone(), n))
                .collect::<BTreeMap<_, _>>()
        };
        NetSpec {
            name: self.name.clone(),
            places: self.places.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionSpec {
                    id: t.name.clone(),
                    pre: named(&t.pre),
                    post: named(&t.post),
                })
                .collect(),
            initial_place: self.initial.map(|p| self.places[p.0].clone()),
            final_place: self.final_place.map(|p| self.places[p.0].clone()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(&self, name: impl Into<String>) -> Net {
        let mut net = self.clone();
        net.name = name.into();
        net
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn size(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    pub fn place_ids(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0].name
    }

    pub fn place(&self, name: &str) -> Option<PlaceId> {
        self.place_index.get(name).copied()
    }

    pub fn transition_named(&self, name: &str) -> Option<TransitionId> {
        self.transition_index.get(name).copied()
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn pre(&self, t: TransitionId) -> &Weights {
        &self.transitions[t.0].pre
    }

    pub fn post(&self, t: TransitionId) -> &Weights {
        &self.transitions[t.0].post
    }

    /// Δ(t) = post(t) − pre(t), nonzero entries only.
    pub fn effect(&self, t: TransitionId) -> Vec<(PlaceId, i128)> {
        let tr = &self.transitions[t.0];
        let mut out: BTreeMap<PlaceId, i128> = BTreeMap::new();
        for (p, w) in tr.post.iter() {
            *out.entry(p).or_insert(0) += w as i128;
        }
        for (p, w) in tr.pre.iter() {
            *out.entry(p).or_insert(0) -= w as i128;
        }
        out.into_iter().filter(|&(_, d)| d != 0).collect()
    }

    pub fn initial(&self) -> Option<PlaceId> {
        self.initial
    }

    pub fn final_place(&self) -> Option<PlaceId> {
        self.final_place
    }

    /// Both designated places, or an error naming the missing one.
    pub fn endpoints(&self) -> Result<(PlaceId, PlaceId), NetError> {
        match (self.initial, self.final_place) {
            (Some(i), Some(f)) => Ok((i, f)),
            (None, _) => Err(NetError::NotWorkflow("no initial place designated".into())),
            (_, None) => Err(NetError::NotWorkflow("no final place designated".into())),
        }
    }

    pub fn producers(&self, p: PlaceId) -> &[TransitionId] {
        &self.producers[p.0]
    }

    pub fn consumers(&self, p: PlaceId) -> &[TransitionId] {
        &self.consumers[p.0]
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.transitions.iter().all(|t| t.pre.is_unit() && t.post.is_unit())
    }

    pub fn max_weight(&self) -> u64 {
        self.transitions
            .iter()
            .flat_map(|t| t.pre.iter().chain(t.post.iter()))
            .map(|(_, w)| w)
            .max()
            .unwrap_or(0)
    }

    /// Marking from named pairs.
    pub fn marking(&self, pairs: &[(&str, u64)]) -> Result<Marking, NetError> {
        let mut m = Marking::zero(self.num_places());
        for &(name, k) in pairs {
            let p = self.place(name).ok_or_else(|| NetError::UnknownPlace {
                place: name.to_string(),
                context: "marking".into(),
            })?;
            m.set(p, m.get(p) + k);
        }
        Ok(m)
    }

    /// The marking p:k.
    pub fn unit_marking(&self, p: PlaceId, k: u64) -> Marking {
        let mut m = Marking::zero(self.num_places());
        m.set(p, k);
        m
    }

    /// Transition ids by name, erroring on unknown names.
    pub fn transitions_named(&self, names: &[&str]) -> Result<Vec<TransitionId>, NetError> {
        names
            .iter()
            .map(|n| {
                self.transition_named(n)
                    .ok_or_else(|| NetError::UnknownTransition(n.to_string()))
            })
            .collect()
    }

    /// Restriction to the given places and transitions. Arcs to dropped places are dropped.
    pub fn restrict(
        &self,
        keep_places: &HashSet<PlaceId>,
        keep_transitions: &HashSet<TransitionId>,
    ) -> (Net, Vec<PlaceId>, Vec<TransitionId>) {
        let place_map: Vec<PlaceId> = self.place_ids().filter(|p| keep_places.contains(p)).collect();
        let mut new_index = vec![None; self.num_places()];
        for (new, old) in place_map.iter().enumerate() {
            new_index[old.0] = Some(PlaceId(new));
        }
        let transition_map: Vec<TransitionId> =
            self.transition_ids().filter(|t| keep_transitions.contains(t)).collect();
        let remap = |w: &Weights| Weights::new(w.iter().filter_map(|(p, n)| new_index[p.0].map(|q| (q, n))));
        let transitions = transition_map
            .iter()
            .map(|&t| {
                let tr = self.transition(t);
                Transition {
                    name: tr.name.clone(),
                    pre: remap(&tr.pre),
                    post: remap(&tr.post),
                }
            })
            .collect();
        let places = place_map.iter().map(|p| self.places[p.0].clone()).collect();
        let net = Net::from_parts(
            self.name.clone(),
            places,
            transitions,
            self.initial.and_then(|p| new_index[p.0]),
            self.final_place.and_then(|p| new_index[p.0]),
        )
        .expect("restriction of a valid net is valid");
        (net, place_map, transition_map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_merge_and_drop_zero() {
        let w = Weights::new([(PlaceId(2), 1), (PlaceId(0), 0), (PlaceId(2), 2), (PlaceId(1), 1)]);
        assert_eq!(w.iter().collect::<Vec<_>>(), vec![(PlaceId(1), 1), (PlaceId(2), 3)]);
        assert_eq!(w.get(PlaceId(0)), 0);
        assert_eq!(w.total(), 4);
    }

    #[test]
    fn rejects_duplicates_and_unknowns() {
        let dup = NetSpec::new("d").with_places(&["a", "a"]).build();
        assert!(matches!(dup, Err(NetError::DuplicateId(_))));
        let clash = NetSpec::new("d")
            .with_places(&["a"])
            .with_transition("a", &[], &[])
            .build();
        assert!(matches!(clash, Err(NetError::DuplicateId(_))));
        let unknown = NetSpec::new("u")
            .with_places(&["a"])
            .with_transition("t", &[("b", 1)], &[])
            .build();
        assert!(matches!(unknown, Err(NetError::UnknownPlace { .. })));
    }

    #[test]
    fn effect_cancels_self_loops() {
        let net = NetSpec::new("e")
            .with_places(&["p", "q"])
            .with_transition("t", &[("p", 2)], &[("p", 2), ("q", 1)])
            .build()
            .unwrap();
        let t = net.transition_named("t").unwrap();
        assert_eq!(net.effect(t), vec![(net.place("q").unwrap(), 1)]);
    }

    #[test]
    fn empty_net() {
        let net = NetSpec::new("empty").build().unwrap();
        assert_eq!(net.num_places(), 0);
        assert_eq!(net.num_transitions(), 0);
    }
}
