//! Seeded random nets for property tests and benchmarks.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::net::{Net, NetSpec, PlaceId, TransitionId};
use crate::workflow::{is_free_choice, validate_workflow};

#[derive(Clone, Copy, Debug)]
pub struct RandomNetParams {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_weight: u64,
    /// Upper bound on the preset/postset size of a transition.
    pub max_arcs: usize,
}

impl Default for RandomNetParams {
    fn default() -> Self {
        RandomNetParams {
            max_places: 6,
            max_transitions: 6,
            max_weight: 1,
            max_arcs: 2,
        }
    }
}

fn random_subset<R: Rng>(rng: &mut R, pool: &[String], max: usize) -> Vec<String> {
    let k = rng.random_range(1..=max.min(pool.len()).max(1));
    pool.choose_multiple(rng, k).cloned().collect()
}

/// Random workflow net by rejection sampling. Places are `i`, `f`, `p1`…; transitions `t1`….
pub fn random_workflow_net<R: Rng>(rng: &mut R, params: RandomNetParams) -> Net {
    let max_places = params.max_places.max(2);
    loop {
        let n_places = rng.random_range(2..=max_places);
        let n_transitions = rng.random_range(1..=params.max_transitions.max(1));
        let mut places: Vec<String> = vec!["i".into(), "f".into()];
        places.extend((1..n_places - 1).map(|k| format!("p{k}")));
        let inputs: Vec<String> = places.iter().filter(|p| *p != "f").cloned().collect();
        let outputs: Vec<String> = places.iter().filter(|p| *p != "i").cloned().collect();
        let mut spec = NetSpec {
            name: "random".into(),
            places: places.clone(),
            ..Default::default()
        };
        for k in 1..=n_transitions {
            let pre = random_subset(rng, &inputs, params.max_arcs);
            let post = random_subset(rng, &outputs, params.max_arcs);
            let weigh = |rng: &mut R, names: Vec<String>| -> Vec<(String, u64)> {
                names
                    .into_iter()
                    .map(|p| (p, rng.random_range(1..=params.max_weight.max(1))))
                    .collect()
            };
            let pre = weigh(rng, pre);
            let post = weigh(rng, post);
            let pre: Vec<(&str, u64)> = pre.iter().map(|(p, w)| (p.as_str(), *w)).collect();
            let post: Vec<(&str, u64)> = post.iter().map(|(p, w)| (p.as_str(), *w)).collect();
            spec.add_transition(&format!("t{k}"), &pre, &post);
        }
        let net = spec
            .with_initial("i")
            .with_final("f")
            .build()
            .expect("generated ids are valid");
        if validate_workflow(&net).is_ok() {
            return net;
        }
    }
}

/// Random free-choice workflow net grown by refining a single transition.
/// With `bug_rate` > 0, some refinements use mismatched splits and joins,
/// which typically break soundness.
pub fn random_free_choice_net<R: Rng>(rng: &mut R, steps: usize, bug_rate: f64) -> Net {
    let mut b = Builder {
        places: vec!["i".into(), "f".into()],
        transitions: vec![(vec![0], vec![1])],
    };
    for _ in 0..steps {
        let buggy = rng.random_bool(bug_rate.clamp(0.0, 1.0));
        let t = rng.random_range(0..b.transitions.len());
        match rng.random_range(0..5u8) {
            0 => b.series_transition(t),
            1 => b.parallel(t, buggy),
            2 => b.choice(t, buggy),
            3 => {
                let p = rng.random_range(0..b.places.len());
                b.series_place(PlaceId(p));
            }
            _ => {
                let p = rng.random_range(0..b.places.len());
                b.self_loop(PlaceId(p));
            }
        }
    }
    let net = b.build();
    debug_assert!(is_free_choice(&net));
    debug_assert!(validate_workflow(&net).is_ok());
    net
}

struct Builder {
    places: Vec<String>,
    transitions: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Builder {
    fn fresh_place(&mut self) -> usize {
        self.places.push(format!("p{}", self.places.len() - 1));
        self.places.len() - 1
    }

    /// t becomes t; s, with a new place between them.
    fn series_transition(&mut self, t: usize) {
        let s = self.fresh_place();
        let post = std::mem::replace(&mut self.transitions[t].1, vec![s]);
        self.transitions.push((vec![s], post));
    }

    /// Producers of p write to a new place q, and a new transition moves q to p.
    fn series_place(&mut self, p: PlaceId) {
        if p.0 == 0 {
            return;
        }
        let q = self.fresh_place();
        for (_, post) in self.transitions.iter_mut() {
            for x in post.iter_mut() {
                if *x == p.0 {
                    *x = q;
                }
            }
        }
        self.transitions.push((vec![q], vec![p.0]));
    }

    /// t forks into two branches that join into post(t). A buggy version
    /// lets each branch produce post(t) separately.
    fn parallel(&mut self, t: usize, buggy: bool) {
        let (s1, s2) = (self.fresh_place(), self.fresh_place());
        let post = std::mem::replace(&mut self.transitions[t].1, vec![s1, s2]);
        if buggy {
            self.transitions.push((vec![s1], post.clone()));
            self.transitions.push((vec![s2], post));
        } else {
            let (u1, u2) = (self.fresh_place(), self.fresh_place());
            self.transitions.push((vec![s1], vec![u1]));
            self.transitions.push((vec![s2], vec![u2]));
            self.transitions.push((vec![u1, u2], post));
        }
    }

    /// Alternative to t with the same preset through a new place. A buggy
    /// version forces both alternatives to meet in a join.
    fn choice(&mut self, t: usize, buggy: bool) {
        let pre = self.transitions[t].0.clone();
        let s = self.fresh_place();
        if buggy {
            let post = std::mem::replace(&mut self.transitions[t].1, vec![s]);
            let s2 = self.fresh_place();
            self.transitions.push((pre, vec![s2]));
            self.transitions.push((vec![s, s2], post));
        } else {
            let post = self.transitions[t].1.clone();
            self.transitions.push((pre, vec![s]));
            self.transitions.push((vec![s], post));
        }
    }

    /// Detour p → q → p, allowed when every consumer of p consumes only p.
    fn self_loop(&mut self, p: PlaceId) {
        if p.0 <= 1 {
            return;
        }
        let only_p = self
            .transitions
            .iter()
            .filter(|(pre, _)| pre.contains(&p.0))
            .all(|(pre, _)| pre.len() == 1);
        if !only_p {
            return;
        }
        let q = self.fresh_place();
        self.transitions.push((vec![p.0], vec![q]));
        self.transitions.push((vec![q], vec![p.0]));
    }

    fn build(&self) -> Net {
        let mut spec = NetSpec {
            name: "random-fc".into(),
            places: self.places.clone(),
            ..Default::default()
        };
        for (k, (pre, post)) in self.transitions.iter().enumerate() {
            let pre: Vec<(&str, u64)> = pre.iter().map(|&p| (self.places[p].as_str(), 1)).collect();
            let post: Vec<(&str, u64)> = post.iter().map(|&p| (self.places[p].as_str(), 1)).collect();
            spec.add_transition(&format!("t{k}"), &pre, &post);
        }
        spec.with_initial("i")
            .with_final("f")
            .build()
            .expect("generated ids are valid")
    }
}

/// Adds one random redex for the reduction rules to a unit-weight workflow net.
pub fn inject_redex<R: Rng>(rng: &mut R, net: &Net) -> Net {
    let (i, f) = net.endpoints().expect("workflow net");
    let mut spec = net.to_spec();
    let inner: Vec<PlaceId> = net.place_ids().filter(|&p| p != i && p != f).collect();
    let fresh = |spec: &NetSpec, stem: &str| {
        let mut k = 0;
        loop {
            let name = format!("{stem}{k}");
            if !spec.places.contains(&name) && spec.transitions.iter().all(|t| t.id != name) {
                return name;
            }
            k += 1;
        }
    };
    let t = TransitionId(rng.random_range(0..net.num_transitions()));
    match rng.random_range(0..5u8) {
        0 => {
            // Duplicate transition.
            let mut copy = spec.transitions[t.0].clone();
            copy.id = fresh(&spec, "dup");
            spec.transitions.push(copy);
        }
        1 if !inner.is_empty() => {
            // Self-loop on an inner place.
            let p = net.place_name(*inner.choose(rng).expect("nonempty")).to_string();
            let id = fresh(&spec, "loop");
            spec.add_transition(&id, &[(&p, 1)], &[(&p, 1)]);
        }
        2 if !inner.is_empty() => {
            // Duplicate place.
            let p = net.place_name(*inner.choose(rng).expect("nonempty")).to_string();
            let q = fresh(&spec, "copy");
            spec.places.push(q.clone());
            for tr in spec.transitions.iter_mut() {
                if let Some(&w) = tr.pre.get(&p) {
                    tr.pre.insert(q.clone(), w);
                }
                if let Some(&w) = tr.post.get(&p) {
                    tr.post.insert(q.clone(), w);
                }
            }
        }
        3 => {
            // Series split of a transition's output.
            let mid = fresh(&spec, "mid");
            let id = fresh(&spec, "step");
            spec.places.push(mid.clone());
            let post = std::mem::replace(&mut spec.transitions[t.0].post, [(mid.clone(), 1)].into());
            spec.transitions.push(crate::net::TransitionSpec {
                id,
                pre: [(mid, 1)].into(),
                post,
            });
        }
        _ if !inner.is_empty() => {
            // Ring through a fresh place.
            let p = net.place_name(*inner.choose(rng).expect("nonempty")).to_string();
            let q = fresh(&spec, "ring");
            spec.places.push(q.clone());
            let there = fresh(&spec, "fwd");
            spec.add_transition(&there, &[(&p, 1)], &[(&q, 1)]);
            let back = fresh(&spec, "bwd");
            spec.add_transition(&back, &[(&q, 1)], &[(&p, 1)]);
        }
        _ => {
            let mut copy = spec.transitions[t.0].clone();
            copy.id = fresh(&spec, "dup");
            spec.transitions.push(copy);
        }
    }
    spec.build().expect("injection keeps ids valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_nets_are_workflow_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let net = random_workflow_net(&mut rng, RandomNetParams::default());
            assert!(validate_workflow(&net).is_ok());
            assert!(net.num_places() <= 6 && net.num_transitions() <= 6);
        }
    }

    #[test]
    fn free_choice_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for steps in 0..30 {
            let net = random_free_choice_net(&mut rng, steps % 10, 0.3);
            assert!(is_free_choice(&net));
            assert!(validate_workflow(&net).is_ok());
        }
    }

    #[test]
    fn injected_redexes_keep_workflow_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let net = random_workflow_net(&mut rng, RandomNetParams::default());
            let injected = inject_redex(&mut rng, &net);
            assert!(validate_workflow(&injected).is_ok());
        }
    }
}
