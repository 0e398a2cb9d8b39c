use std::collections::VecDeque;

use crate::net::{Net, PlaceId, TransitionId};

/// Result of forward saturation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FireableSet {
    /// Members in the order they were justified.
    pub order: Vec<TransitionId>,
    /// Saturation round in which each transition was justified.
    pub level: Vec<Option<usize>>,
    /// Places marked initially or produced by a member.
    pub reached: Vec<bool>,
}

impl FireableSet {
    pub fn contains(&self, t: TransitionId) -> bool {
        self.level[t.0].is_some()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.level.iter().map(Option::is_some).collect()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Least set F ⊆ candidates closed under: pre(t) ⊆ marked ∪ post(F) ⇒ t ∈ F.
pub fn max_fireable_set(net: &Net, marked: &[PlaceId], candidates: &[bool]) -> FireableSet {
    let mut missing: Vec<usize> = net.transitions().iter().map(|t| t.pre.len()).collect();
    let mut level = vec![None; net.num_transitions()];
    let mut reached = vec![false; net.num_places()];
    let mut order = Vec::new();
    let mut queue: VecDeque<(PlaceId, usize)> = VecDeque::new();
    for &p in marked {
        if !reached[p.0] {
            reached[p.0] = true;
            queue.push_back((p, 0));
        }
    }
    // Transitions with empty preset fire immediately.
    for t in net.transition_ids() {
        if candidates[t.0] && missing[t.0] == 0 {
            level[t.0] = Some(0);
            order.push(t);
            for q in net.post(t).places() {
                if !reached[q.0] {
                    reached[q.0] = true;
                    queue.push_back((q, 1));
                }
            }
        }
    }
    while let Some((p, round)) = queue.pop_front() {
        for &t in net.consumers(p) {
            missing[t.0] -= 1;
            if missing[t.0] > 0 || !candidates[t.0] || level[t.0].is_some() {
                continue;
            }
            level[t.0] = Some(round);
            order.push(t);
            for q in net.post(t).places() {
                if !reached[q.0] {
                    reached[q.0] = true;
                    queue.push_back((q, round + 1));
                }
            }
        }
    }
    FireableSet { order, level, reached }
}

/// Checks that `order` lists each member of `support` exactly once and each
/// transition's preset is covered by `marked` and the posts of earlier ones.
pub fn is_valid_layering(net: &Net, marked: &[PlaceId], order: &[TransitionId], support: &[TransitionId]) -> bool {
    let mut in_support = vec![false; net.num_transitions()];
    for t in support {
        in_support[t.0] = true;
    }
    let mut seen = vec![false; net.num_transitions()];
    let mut covered = vec![false; net.num_places()];
    for p in marked {
        covered[p.0] = true;
    }
    for &t in order {
        if t.0 >= net.num_transitions() || !in_support[t.0] || seen[t.0] {
            return false;
        }
        if !net.pre(t).places().all(|p| covered[p.0]) {
            return false;
        }
        seen[t.0] = true;
        for q in net.post(t).places() {
            covered[q.0] = true;
        }
    }
    support.iter().all(|t| seen[t.0]) && order.len() == support.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::fork_join;

    fn names(net: &Net, f: &FireableSet) -> Vec<String> {
        let mut v: Vec<String> = f.order.iter().map(|&t| net.transition_name(t).to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn saturation_on_fork_join() {
        let net = fork_join();
        let all = vec![true; net.num_transitions()];
        let i = net.place("i").unwrap();
        let f = max_fireable_set(&net, &[i], &all);
        assert_eq!(names(&net, &f), vec!["s", "t1", "t2", "u"]);
        assert_eq!(f.level[net.transition_named("u").unwrap().0], Some(2));
        let q = [net.place("q1").unwrap(), net.place("q2").unwrap()];
        assert_eq!(names(&net, &max_fireable_set(&net, &q, &all)), vec!["u"]);
        assert!(max_fireable_set(&net, &[], &all).is_empty());
    }

    #[test]
    fn layering_check() {
        let net = fork_join();
        let all = vec![true; net.num_transitions()];
        let i = net.place("i").unwrap();
        let f = max_fireable_set(&net, &[i], &all);
        assert!(is_valid_layering(&net, &[i], &f.order, &f.order));
        let mut reversed = f.order.clone();
        reversed.reverse();
        assert!(!is_valid_layering(&net, &[i], &reversed, &f.order));
    }
}
