//! Explicit-state exploration, used as ground truth on small instances.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::generators::dnf::DnfFormula;
use crate::marking::{Marking, ParikhVector};
use crate::net::{Net, PlaceId, TransitionId};

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreStatus {
    Complete,
    CapExceeded(usize),
}

#[derive(Clone, Debug)]
pub struct ReachGraph {
    pub nodes: Vec<Marking>,
    pub edges: Vec<(usize, TransitionId, usize)>,
    /// BFS tree parent of each node except the root (index 0).
    pub parent: Vec<Option<(usize, TransitionId)>>,
    pub status: ExploreStatus,
    index: HashMap<Marking, usize>,
    successors: Vec<Vec<usize>>,
}

impl ReachGraph {
    pub fn root(&self) -> &Marking {
        &self.nodes[0]
    }

    pub fn is_complete(&self) -> bool {
        self.status == ExploreStatus::Complete
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn find(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.index.contains_key(m)
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    /// Transition sequence from the root along the BFS tree.
    pub fn path_to(&self, mut node: usize) -> Vec<TransitionId> {
        let mut run = Vec::new();
        while let Some((prev, t)) = self.parent[node] {
            run.push(t);
            node = prev;
        }
        run.reverse();
        run
    }

    /// Nodes that can reach any node in `targets`.
    pub fn can_reach(&self, targets: &[usize]) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for &(a, _, b) in &self.edges {
            preds[b].push(a);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        for &t in targets {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
        while let Some(n) = queue.pop_front() {
            for &p in &preds[n] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }
}

struct Explorer<'a> {
    net: &'a Net,
    graph: ReachGraph,
    queue: VecDeque<usize>,
    cap: usize,
}

impl<'a> Explorer<'a> {
    fn new(net: &'a Net, m0: &Marking, cap: usize) -> Self {
        let mut index = HashMap::new();
        index.insert(m0.clone(), 0);
        Explorer {
            net,
            graph: ReachGraph {
                nodes: vec![m0.clone()],
                edges: Vec::new(),
                parent: vec![None],
                status: ExploreStatus::Complete,
                index,
                successors: vec![Vec::new()],
            },
            queue: VecDeque::from([0]),
            cap: cap.max(1),
        }
    }

    /// Expands one node. Newly discovered nodes are passed to `on_new`;
    /// returning `true` from it stops exploration.
    fn step(&mut self, on_new: &mut dyn FnMut(&ReachGraph, usize) -> bool) -> Option<bool> {
        let node = self.queue.pop_front()?;
        for t in self.net.transition_ids() {
            let Some(next) = self.graph.nodes[node].fire(self.net, t) else {
                continue;
            };
            let target = match self.graph.index.get(&next) {
                Some(&idx) => idx,
                None => {
                    if self.graph.nodes.len() >= self.cap {
                        self.graph.status = ExploreStatus::CapExceeded(self.cap);
                        self.queue.clear();
                        return Some(false);
                    }
                    let idx = self.graph.nodes.len();
                    self.graph.index.insert(next.clone(), idx);
                    self.graph.nodes.push(next);
                    self.graph.parent.push(Some((node, t)));
                    self.graph.successors.push(Vec::new());
                    self.queue.push_back(idx);
                    self.graph.edges.push((node, t, idx));
                    self.graph.successors[node].push(idx);
                    if on_new(&self.graph, idx) {
                        return Some(true);
                    }
                    continue;
                }
            };
            self.graph.edges.push((node, t, target));
            self.graph.successors[node].push(target);
        }
        Some(false)
    }

    fn run(mut self, on_new: &mut dyn FnMut(&ReachGraph, usize) -> bool) -> (ReachGraph, bool) {
        if on_new(&self.graph, 0) {
            return (self.graph, true);
        }
        while let Some(stopped) = self.step(on_new) {
            if stopped {
                return (self.graph, true);
            }
        }
        (self.graph, false)
    }
}

/// BFS over the firing relation with deduplication, up to `cap` markings.
pub fn explore(net: &Net, m0: &Marking, cap: usize) -> ReachGraph {
    Explorer::new(net, m0, cap).run(&mut |_, _| false).0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KSound {
    Sound,
    Unsound(Marking),
    CapExceeded(usize),
}

pub fn oracle_k_sound(net: &Net, k: u64, cap: usize) -> KSound {
    let (i, f) = net.endpoints().expect("workflow net");
    let graph = explore(net, &net.unit_marking(i, k), cap);
    if let ExploreStatus::CapExceeded(c) = graph.status {
        return KSound::CapExceeded(c);
    }
    let goal = net.unit_marking(f, k);
    let ok = match graph.find(&goal) {
        Some(g) => graph.can_reach(&[g]),
        None => vec![false; graph.len()],
    };
    let bad: Vec<usize> = (0..graph.len()).filter(|&n| !ok[n]).collect();
    if bad.is_empty() {
        return KSound::Sound;
    }
    // Prefer a deadlock as the counterexample.
    let witness = bad
        .iter()
        .copied()
        .find(|&n| graph.successors(n).is_empty())
        .unwrap_or(bad[0]);
    KSound::Unsound(graph.nodes[witness].clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuasiSound {
    /// A run from i:k to f:k.
    QuasiSound(Vec<TransitionId>),
    NotQuasiSound,
    CapExceeded(usize),
}

impl QuasiSound {
    pub fn holds(&self) -> Option<bool> {
        match self {
            QuasiSound::QuasiSound(_) => Some(true),
            QuasiSound::NotQuasiSound => Some(false),
            QuasiSound::CapExceeded(_) => None,
        }
    }
}

pub fn oracle_k_quasi_sound(net: &Net, k: u64, cap: usize) -> QuasiSound {
    let (i, f) = net.endpoints().expect("workflow net");
    let goal = net.unit_marking(f, k);
    let mut found = None;
    let (graph, stopped) = Explorer::new(net, &net.unit_marking(i, k), cap).run(&mut |g: &ReachGraph, n| {
        if g.nodes[n] == goal {
            found = Some(n);
            true
        } else {
            false
        }
    });
    if stopped {
        return QuasiSound::QuasiSound(graph.path_to(found.expect("stopped on goal")));
    }
    match graph.status {
        ExploreStatus::Complete => QuasiSound::NotQuasiSound,
        ExploreStatus::CapExceeded(c) => QuasiSound::CapExceeded(c),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bounded {
    /// Maximum token count seen per place.
    Bounded(Vec<u64>),
    /// m ⇝ m′ with m < m′.
    Growth {
        from: Marking,
        to: Marking,
    },
    Inconclusive(usize),
}

pub fn oracle_bounded(net: &Net, m0: &Marking, cap: usize) -> Bounded {
    let mut growth = None;
    let (graph, stopped) = Explorer::new(net, m0, cap).run(&mut |g: &ReachGraph, n| {
        let m = &g.nodes[n];
        let mut cursor = g.parent[n];
        while let Some((a, _)) = cursor {
            let anc = &g.nodes[a];
            if m.dominates(anc) && m != anc {
                growth = Some(a);
                return true;
            }
            cursor = g.parent[a];
        }
        false
    });
    if stopped {
        let n = graph.len() - 1;
        return Bounded::Growth {
            from: graph.nodes[growth.expect("growth recorded")].clone(),
            to: graph.nodes[n].clone(),
        };
    }
    match graph.status {
        ExploreStatus::CapExceeded(c) => Bounded::Inconclusive(c),
        ExploreStatus::Complete => {
            let mut max = vec![0; net.num_places()];
            for m in &graph.nodes {
                for (slot, &v) in max.iter_mut().zip(m.as_slice()) {
                    *slot = (*slot).max(v);
                }
            }
            Bounded::Bounded(max)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exploration exceeded {0} markings")]
    CapExceeded(usize),
    #[error("formula has {0} variables, more than the enumeration limit of 20")]
    TooManyVariables(usize),
}

/// Transitions enabled at some reachable marking.
pub fn quasi_live_set(net: &Net, m: &Marking, cap: usize) -> Result<Vec<TransitionId>, OracleError> {
    let graph = explore(net, m, cap);
    if let ExploreStatus::CapExceeded(c) = graph.status {
        return Err(OracleError::CapExceeded(c));
    }
    Ok(quasi_live_in(net, &graph))
}

fn quasi_live_in(net: &Net, graph: &ReachGraph) -> Vec<TransitionId> {
    net.transition_ids()
        .filter(|&t| graph.nodes.iter().any(|n| n.enables(net, t)))
        .collect()
}

/// Transitions that can be enabled again from every reachable marking.
pub fn live_set(net: &Net, m: &Marking, cap: usize) -> Result<Vec<TransitionId>, OracleError> {
    let graph = explore(net, m, cap);
    if let ExploreStatus::CapExceeded(c) = graph.status {
        return Err(OracleError::CapExceeded(c));
    }
    Ok(live_in(net, &graph))
}

fn live_in(net: &Net, graph: &ReachGraph) -> Vec<TransitionId> {
    net.transition_ids()
        .filter(|&t| {
            let enabling: Vec<usize> = (0..graph.len()).filter(|&n| graph.nodes[n].enables(net, t)).collect();
            !enabling.is_empty() && graph.can_reach(&enabling).iter().all(|&b| b)
        })
        .collect()
}

/// Live and quasi-live sets from one exploration.
pub fn live_and_quasi_live(
    net: &Net,
    m: &Marking,
    cap: usize,
) -> Result<(Vec<TransitionId>, Vec<TransitionId>), OracleError> {
    let graph = explore(net, m, cap);
    if let ExploreStatus::CapExceeded(c) = graph.status {
        return Err(OracleError::CapExceeded(c));
    }
    Ok((live_in(net, &graph), quasi_live_in(net, &graph)))
}

/// Brute force over x ∈ [0..bound]^T for m′ = m + Σ x_t Δ(t).
pub fn zreach_bounded_witness(net: &Net, m: &Marking, target: &Marking, bound: u64) -> Option<ParikhVector> {
    let n = net.num_transitions();
    let effects: Vec<Vec<(PlaceId, i128)>> = net.transition_ids().map(|t| net.effect(t)).collect();
    // Places become checkable once the last transition affecting them is assigned.
    let mut last_touch: Vec<Option<usize>> = vec![None; net.num_places()];
    for (j, eff) in effects.iter().enumerate() {
        for &(p, _) in eff {
            last_touch[p.0] = Some(j);
        }
    }
    let mut check_after: Vec<Vec<PlaceId>> = vec![Vec::new(); n];
    for p in net.place_ids() {
        match last_touch[p.0] {
            Some(j) => check_after[j].push(p),
            None => {
                if m.get(p) != target.get(p) {
                    return None;
                }
            }
        }
    }
    let mut delta: Vec<i128> = net
        .place_ids()
        .map(|p| target.get(p) as i128 - m.get(p) as i128)
        .collect();
    let mut x = vec![0u64; n];

    fn search(
        j: usize,
        bound: u64,
        effects: &[Vec<(PlaceId, i128)>],
        check_after: &[Vec<PlaceId>],
        delta: &mut [i128],
        x: &mut [u64],
    ) -> bool {
        if j == effects.len() {
            return true;
        }
        for v in 0..=bound {
            if v > 0 {
                for &(p, d) in &effects[j] {
                    delta[p.0] -= d;
                }
            }
            x[j] = v;
            if check_after[j].iter().all(|p| delta[p.0] == 0) && search(j + 1, bound, effects, check_after, delta, x) {
                return true;
            }
        }
        for &(p, d) in &effects[j] {
            delta[p.0] += d * bound as i128;
        }
        x[j] = 0;
        false
    }

    if n == 0 {
        return delta.iter().all(|&d| d == 0).then(|| ParikhVector::zero(0));
    }
    search(0, bound, &effects, &check_after, &mut delta, &mut x).then(|| ParikhVector::from_counts(&x))
}

/// Every assignment satisfies some clause.
pub fn dnf_tautology(phi: &DnfFormula) -> Result<bool, OracleError> {
    let m = phi.num_vars();
    if m > 20 {
        return Err(OracleError::TooManyVariables(m));
    }
    Ok((0u32..(1 << m)).all(|bits| phi.evaluate(|v| bits & (1 << (v - 1)) != 0)))
}
