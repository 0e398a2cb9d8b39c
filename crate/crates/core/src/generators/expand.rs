//! Replacing arc weights by binary counting gadgets, yielding a unit-weight net.

use std::collections::BTreeMap;

use crate::net::{Net, NetSpec, TransitionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Gadget collecting tokens of p for a weighted pre arc.
    Pre,
    /// Gadget distributing tokens into p for a weighted post arc.
    Post,
}

/// Names of the nodes added for one weighted arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub transition: String,
    pub place: String,
    pub side: Side,
    pub weight: u64,
    /// l_1..l_{n−1} on the pre side, h_1..h_{n−1} on the post side.
    pub lower: Vec<String>,
    /// r_1..r_n on the pre side, d_1..d_n on the post side.
    pub upper: Vec<String>,
    pub transitions: Vec<String>,
}

impl Gadget {
    pub fn bits(&self) -> usize {
        self.upper.len()
    }
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub net: Net,
    pub gadgets: Vec<Gadget>,
}

/// Least significant bit first.
fn binary_digits(b: u64) -> Vec<bool> {
    let n = 64 - b.leading_zeros() as usize;
    (0..n).map(|i| (b >> i) & 1 == 1).collect()
}

pub fn expand_weights(net: &Net) -> Net {
    expand_weights_detailed(net).net
}

pub fn expand_weights_detailed(net: &Net) -> Expansion {
    if net.is_unit_weighted() {
        return Expansion {
            net: net.clone(),
            gadgets: Vec::new(),
        };
    }
    let source = net.to_spec();
    let initial = source.initial_place.clone();
    let mut spec = NetSpec {
        name: source.name.clone(),
        places: source.places.clone(),
        transitions: Vec::new(),
        initial_place: source.initial_place.clone(),
        final_place: source.final_place.clone(),
    };
    let mut gadgets = Vec::new();
    for t in &source.transitions {
        let mut pre: BTreeMap<String, u64> = BTreeMap::new();
        let mut post: BTreeMap<String, u64> = BTreeMap::new();
        let mut extra: Vec<TransitionSpec> = Vec::new();
        for (p, &b) in &t.pre {
            if b == 1 {
                pre.insert(p.clone(), 1);
                continue;
            }
            let digits = binary_digits(b);
            let n = digits.len();
            let prefix = format!("{}.in.{}.", t.id, p);
            let l: Vec<String> = (1..n).map(|i| format!("{prefix}l{i}")).collect();
            let r: Vec<String> = (1..=n).map(|i| format!("{prefix}r{i}")).collect();
            spec.places.extend(l.iter().cloned());
            spec.places.extend(r.iter().cloned());
            let mut names = Vec::new();
            let mut add = |id: String, from: &[&String], to: &[&String], reversible: bool| {
                let map = |xs: &[&String]| xs.iter().map(|x| ((*x).clone(), 1)).collect::<BTreeMap<_, _>>();
                extra.push(TransitionSpec {
                    id: id.clone(),
                    pre: map(from),
                    post: map(to),
                });
                names.push(id.clone());
                if reversible {
                    let rev = format!("{id}_rev");
                    extra.push(TransitionSpec {
                        id: rev.clone(),
                        pre: map(to),
                        post: map(from),
                    });
                    names.push(rev);
                }
            };
            // The reverse of t_p would produce into the initial place.
            let p_reversible = initial.as_deref() != Some(p.as_str());
            add(format!("{prefix}t_p"), &[p], &[&l[0]], p_reversible);
            add(format!("{prefix}t_r"), &[&l[0]], &[&r[0]], true);
            for i in 2..n {
                add(format!("{prefix}t{i}_l"), &[&l[i - 2], &r[i - 2]], &[&l[i - 1]], true);
                add(format!("{prefix}t{i}_r"), &[&l[i - 2], &r[i - 2]], &[&r[i - 1]], true);
            }
            add(format!("{prefix}t{n}_r"), &[&l[n - 2], &r[n - 2]], &[&r[n - 1]], true);
            for (i, &bit) in digits.iter().enumerate() {
                if bit {
                    pre.insert(r[i].clone(), 1);
                }
            }
            gadgets.push(Gadget {
                transition: t.id.clone(),
                place: p.clone(),
                side: Side::Pre,
                weight: b,
                lower: l,
                upper: r,
                transitions: names,
            });
        }
        for (p, &b) in &t.post {
            if b == 1 {
                post.insert(p.clone(), 1);
                continue;
            }
            let digits = binary_digits(b);
            let n = digits.len();
            let prefix = format!("{}.out.{}.", t.id, p);
            let d: Vec<String> = (1..=n).map(|i| format!("{prefix}d{i}")).collect();
            let h: Vec<String> = (1..n).map(|i| format!("{prefix}h{i}")).collect();
            spec.places.extend(d.iter().cloned());
            spec.places.extend(h.iter().cloned());
            let mut names = Vec::new();
            let mut add = |id: String, from: &[&String], to: &[&String]| {
                let map = |xs: &[&String]| xs.iter().map(|x| ((*x).clone(), 1)).collect::<BTreeMap<_, _>>();
                extra.push(TransitionSpec {
                    id: id.clone(),
                    pre: map(from),
                    post: map(to),
                });
                names.push(id);
            };
            add(format!("{prefix}t_p"), &[&h[0]], &[p]);
            add(format!("{prefix}t_h"), &[&d[0]], &[&h[0]]);
            for i in 2..=n {
                add(format!("{prefix}t{i}_d"), &[&d[i - 1]], &[&d[i - 2], &h[i - 2]]);
                if i < n {
                    add(format!("{prefix}t{i}_h"), &[&h[i - 1]], &[&d[i - 2], &h[i - 2]]);
                }
            }
            for (i, &bit) in digits.iter().enumerate() {
                if bit {
                    post.insert(d[i].clone(), 1);
                }
            }
            gadgets.push(Gadget {
                transition: t.id.clone(),
                place: p.clone(),
                side: Side::Post,
                weight: b,
                lower: h,
                upper: d,
                transitions: names,
            });
        }
        spec.transitions.push(TransitionSpec {
            id: t.id.clone(),
            pre,
            post,
        });
        spec.transitions.extend(extra);
    }
    let net = spec.build().expect("expansion of a valid net is valid");
    Expansion { net, gadgets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::{fork_join, gen_family, Family};
    use crate::workflow::validate_workflow;

    #[test]
    fn digits() {
        assert_eq!(binary_digits(5), vec![true, false, true]);
        assert_eq!(binary_digits(6), vec![false, true, true]);
        assert_eq!(binary_digits(2), vec![false, true]);
    }

    #[test]
    fn unit_net_unchanged() {
        let net = fork_join();
        assert_eq!(expand_weights(&net), net);
    }

    #[test]
    fn five_to_six_gadget_shape() {
        let net = NetSpec::new("five-six")
            .with_places(&["i", "f"])
            .with_transition("t", &[("i", 5)], &[("f", 6)])
            .with_initial("i")
            .with_final("f")
            .build()
            .unwrap();
        let exp = expand_weights_detailed(&net);
        assert!(exp.net.is_unit_weighted());
        assert!(validate_workflow(&exp.net).is_ok());
        // Pre side: l1, l2, r1..r3; post side: d1..d3, h1, h2.
        assert_eq!(exp.net.num_places(), 2 + 5 + 5);
        let t = exp.net.transition_named("t").unwrap();
        let pre: Vec<&str> = exp.net.pre(t).places().map(|p| exp.net.place_name(p)).collect();
        assert_eq!(pre, vec!["t.in.i.r1", "t.in.i.r3"]);
        let post: Vec<&str> = exp.net.post(t).places().map(|p| exp.net.place_name(p)).collect();
        assert_eq!(post, vec!["t.out.f.d2", "t.out.f.d3"]);
        // t_p (no reverse: p is initial), t_r±, t2_l±, t2_r±, t3_r± on the pre side;
        // t_p, t_h, t2_d, t2_h, t3_d on the post side.
        assert_eq!(exp.gadgets[0].transitions.len(), 9);
        assert_eq!(exp.gadgets[1].transitions.len(), 5);
        assert_eq!(exp.net.num_transitions(), 1 + 9 + 5);
    }

    #[test]
    fn families_expand_to_workflow_nets() {
        for family in Family::ALL {
            for c in 2..=8 {
                let exp = expand_weights(&gen_family(family, c).unwrap());
                assert!(exp.is_unit_weighted());
                assert!(validate_workflow(&exp).is_ok(), "{family}-{c}");
            }
        }
    }
}
