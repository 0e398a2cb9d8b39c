//! Splitting a workflow net at cut places into a sequence of workflow nets.
//!
//! A place c is a cut when removing it disconnects i from f, every producer
//! of c lies on the i side and every consumer on the f side. The segments
//! between consecutive cuts are workflow nets whose initial and final
//! places are the surrounding cuts.

use std::collections::{BTreeSet, HashSet};

use wfsound_core::workflow::validate_workflow;
use wfsound_core::{Net, PlaceId, TransitionId};

#[derive(Clone, Debug)]
pub struct Component {
    pub net: Net,
    /// Original place of each component place.
    pub place_map: Vec<PlaceId>,
    /// Original transition of each component transition.
    pub transition_map: Vec<TransitionId>,
}

/// Undirected place/transition graph: places are `0..P`, transitions `P..P+T`.
struct Graph {
    places: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(net: &Net) -> Graph {
        let places = net.num_places();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); places + net.num_transitions()];
        for t in net.transition_ids() {
            let node = places + t.0;
            for p in net.pre(t).places().chain(net.post(t).places()) {
                adj[node].insert(p.0);
                adj[p.0].insert(node);
            }
        }
        Graph {
            places,
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    /// Places separating `root` from `target` in DFS-path order from the root.
    fn separating_places(&self, root: usize, target: usize) -> Vec<usize> {
        let n = self.adj.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut parent = vec![usize::MAX; n];
        let mut clock = 0;
        disc[root] = clock;
        low[root] = clock;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = self.adj[v].get(*next) {
                *next += 1;
                if disc[w] == usize::MAX {
                    clock += 1;
                    disc[w] = clock;
                    low[w] = clock;
                    parent[w] = v;
                    stack.push((w, 0));
                } else if w != parent[v] {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
        if disc[target] == usize::MAX {
            return Vec::new();
        }
        let mut out = Vec::new();
        let (mut child, mut v) = (target, parent[target]);
        while v != usize::MAX && v != root {
            if v < self.places && low[child] >= disc[v] {
                out.push(v);
            }
            child = v;
            v = parent[v];
        }
        out.reverse();
        out
    }

    /// Connected components of the graph without `removed`; removed nodes get `usize::MAX`.
    fn components_without(&self, removed: &[bool]) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.adj.len()];
        let mut count = 0;
        for start in 0..self.adj.len() {
            if removed[start] || label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut queue = vec![start];
            while let Some(v) = queue.pop() {
                for &w in &self.adj[v] {
                    if !removed[w] && label[w] == usize::MAX {
                        label[w] = count;
                        queue.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }
}

/// Segment index of every node for the given ordered cuts, or the position
/// of a cut that does not separate the net as required.
fn assign_segments(net: &Net, graph: &Graph, cuts: &[usize], i: usize, f: usize) -> Result<Vec<usize>, usize> {
    let mut removed = vec![false; graph.adj.len()];
    let mut position = vec![usize::MAX; graph.adj.len()];
    for (k, &c) in cuts.iter().enumerate() {
        removed[c] = true;
        position[c] = k;
    }
    let (label, count) = graph.components_without(&removed);
    let mut touching: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for &c in cuts {
        for &w in &graph.adj[c] {
            if label[w] != usize::MAX {
                touching[label[w]].insert(position[c]);
            }
        }
    }
    let m = cuts.len();
    let mut segment_of = vec![usize::MAX; count];
    for (comp, cuts_seen) in touching.iter().enumerate() {
        let seen: Vec<usize> = cuts_seen.iter().copied().collect();
        let segment = if comp == label[i] {
            (seen.iter().all(|&k| k == 0)).then_some(0)
        } else if comp == label[f] {
            (seen.iter().all(|&k| k + 1 == m)).then_some(m)
        } else if seen.len() == 2 && seen[0] + 1 == seen[1] {
            Some(seen[1])
        } else {
            None
        };
        match segment {
            Some(s) => segment_of[comp] = s,
            None => return Err(seen.first().copied().unwrap_or(0)),
        }
    }
    let mut seg = vec![usize::MAX; graph.adj.len()];
    for v in 0..graph.adj.len() {
        if label[v] != usize::MAX {
            seg[v] = segment_of[label[v]];
        }
    }
    for (k, &c) in cuts.iter().enumerate() {
        let p = PlaceId(c);
        let producers_before = net.producers(p).iter().all(|t| seg[graph.places + t.0] == k);
        let consumers_after = net.consumers(p).iter().all(|t| seg[graph.places + t.0] == k + 1);
        if !producers_before || !consumers_after {
            return Err(k);
        }
    }
    Ok(seg)
}

/// The segments of `net` from i to f. A net without cut places, or one
/// whose segments fail validation, is returned whole.
pub fn sequential_components(net: &Net) -> Vec<Component> {
    let whole = || {
        vec![Component {
            net: net.clone(),
            place_map: net.place_ids().collect(),
            transition_map: net.transition_ids().collect(),
        }]
    };
    let Ok((i, f)) = net.endpoints() else {
        return whole();
    };
    let graph = Graph::new(net);
    let mut cuts = graph.separating_places(i.0, f.0);
    let seg = loop {
        if cuts.is_empty() {
            return whole();
        }
        match assign_segments(net, &graph, &cuts, i.0, f.0) {
            Ok(seg) => break seg,
            Err(bad) => {
                cuts.remove(bad);
            }
        }
    };
    let mut out = Vec::with_capacity(cuts.len() + 1);
    for s in 0..=cuts.len() {
        let entry = if s == 0 { i } else { PlaceId(cuts[s - 1]) };
        let exit = if s == cuts.len() { f } else { PlaceId(cuts[s]) };
        let mut places: HashSet<PlaceId> = net.place_ids().filter(|p| seg[p.0] == s).collect();
        places.insert(entry);
        places.insert(exit);
        let transitions: HashSet<TransitionId> =
            net.transition_ids().filter(|t| seg[graph.places + t.0] == s).collect();
        let (restricted, place_map, transition_map) = net.restrict(&places, &transitions);
        let mut spec = restricted.to_spec();
        spec.name = format!("{}.seg{s}", net.name());
        spec.initial_place = Some(net.place_name(entry).to_string());
        spec.final_place = Some(net.place_name(exit).to_string());
        let Ok(component) = Net::from_spec(spec) else {
            return whole();
        };
        if !validate_workflow(&component).is_ok() {
            return whole();
        }
        out.push(Component {
            net: component,
            place_map,
            transition_map,
        });
    }
    out
}

/// A single transition moving one token from the initial to the final place.
pub fn is_trivially_sound(net: &Net) -> bool {
    let Ok((i, f)) = net.endpoints() else {
        return false;
    };
    net.num_places() == 2
        && net.num_transitions() == 1
        && net.transition_ids().all(|t| {
            let pre: Vec<_> = net.pre(t).iter().collect();
            let post: Vec<_> = net.post(t).iter().collect();
            pre == [(i, 1)] && post == [(f, 1)]
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wfsound_core::generators::chain::chain;
    use wfsound_core::generators::{fork_join, gen_family, Family};

    #[test]
    fn chains_split_into_inputs_and_bridges() {
        let net = chain(&[fork_join(), fork_join(), fork_join()]).unwrap();
        let parts = sequential_components(&net);
        assert!(parts.len() >= 5, "{} parts", parts.len());
        let sizes: Vec<usize> = parts.iter().map(|c| c.net.num_transitions()).collect();
        for c in &parts {
            let bridge = c
                .net
                .transition_ids()
                .any(|t| c.net.transition_name(t).starts_with("t_aux"));
            assert!(!bridge || c.net.num_transitions() == 1, "{}", c.net.name());
        }
        let total: usize = sizes.iter().sum();
        assert_eq!(total, net.num_transitions());
        for c in &parts {
            assert!(validate_workflow(&c.net).is_ok());
        }
    }

    #[test]
    fn family_nets_are_not_split_across_weights() {
        for family in Family::ALL {
            let net = gen_family(family, 3).unwrap();
            let parts = sequential_components(&net);
            let total: usize = parts.iter().map(|c| c.net.num_transitions()).sum();
            assert_eq!(total, net.num_transitions());
        }
    }

    #[test]
    fn a_single_transition_is_trivial() {
        let net = wfsound_core::NetSpec::new("u")
            .with_places(&["i", "f"])
            .with_transition("t", &[("i", 1)], &[("f", 1)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        assert!(is_trivially_sound(&net));
        assert_eq!(sequential_components(&net).len(), 1);
        assert!(!is_trivially_sound(&fork_join()));
    }
}
