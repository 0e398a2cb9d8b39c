//! DNF formulas and the workflow net whose continuous soundness encodes tautology.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NetError;
use crate::net::{Net, NetSpec};

/// Clauses of signed variable indices: `3` is x3, `-3` is ¬x3.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl DnfFormula {
    /// Literals are deduplicated and sorted by variable within each clause.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, String> {
        let mut normalized = Vec::with_capacity(clauses.len());
        for clause in clauses {
            let set: BTreeSet<i64> = clause.into_iter().collect();
            for &lit in &set {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(format!("literal {lit} out of range 1..{num_vars}"));
                }
                if set.contains(&-lit) {
                    return Err(format!("clause contains both x{0} and !x{0}", lit.abs()));
                }
            }
            let mut lits: Vec<i64> = set.into_iter().collect();
            lits.sort_by_key(|l| (l.abs(), *l));
            normalized.push(lits);
        }
        Ok(DnfFormula {
            num_vars,
            clauses: normalized,
        })
    }

    /// Parses `x1 & !x2 | x3`. The variable count is the largest index used.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut clauses = Vec::new();
        let mut max_var = 0usize;
        for clause_text in text.split('|') {
            let mut clause = Vec::new();
            for lit_text in clause_text.split('&') {
                let lit_text = lit_text.trim();
                let (negated, var_text) = match lit_text.strip_prefix('!') {
                    Some(rest) => (true, rest.trim()),
                    None => (false, lit_text),
                };
                let index: usize = var_text
                    .strip_prefix('x')
                    .and_then(|n| n.parse().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| format!("bad literal `{lit_text}`, expected x<n> or !x<n>"))?;
                max_var = max_var.max(index);
                clause.push(if negated { -(index as i64) } else { index as i64 });
            }
            clauses.push(clause);
        }
        Self::new(max_var, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// `value(i)` is the truth value of x_i.
    pub fn evaluate(&self, value: impl Fn(usize) -> bool) -> bool {
        self.clauses.iter().any(|clause| {
            clause
                .iter()
                .all(|&lit| value(lit.unsigned_abs() as usize) == (lit > 0))
        })
    }

    /// Variables occurring in every clause.
    pub fn variables_in_all_clauses(&self) -> Vec<usize> {
        (1..=self.num_vars)
            .filter(|&v| {
                !self.clauses.is_empty()
                    && self
                        .clauses
                        .iter()
                        .all(|c| c.iter().any(|l| l.unsigned_abs() as usize == v))
            })
            .collect()
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| if l > 0 { format!("x{l}") } else { format!("!x{}", -l) })
                    .collect::<Vec<_>>()
                    .join(" & ")
            })
            .collect();
        f.write_str(&clauses.join(" | "))
    }
}

pub fn place_unset(i: usize) -> String {
    format!("p{i}_free")
}

pub fn place_value(i: usize, b: u8) -> String {
    format!("p{i}_{b}")
}

pub fn place_q(i: usize) -> String {
    format!("q{i}")
}

pub fn place_r(i: usize) -> String {
    format!("r{i}")
}

/// The construction exactly as defined, including the cleanup nodes of
/// variables that occur in every clause. Those nodes are never produced, so
/// the result is only a workflow net when no such variable exists.
pub fn gen_dnf_net_unpruned(phi: &DnfFormula) -> Result<Net, NetError> {
    build(phi, false)
}

/// The workflow net for φ. Cleanup nodes q_i and v̄_{i,b} of variables that
/// occur in every clause can never be used and are left out. Fails when a
/// variable occurs with the same sign in every clause: the opposite value
/// then has no consumer and φ is trivially not a tautology.
pub fn gen_dnf_net(phi: &DnfFormula) -> Result<Net, NetError> {
    build(phi, true)
}

fn build(phi: &DnfFormula, prune: bool) -> Result<Net, NetError> {
    if phi.clauses().is_empty() {
        return Err(NetError::Invalid("formula needs at least one clause".into()));
    }
    if phi.num_vars() == 0 {
        return Err(NetError::Invalid("formula needs at least one variable".into()));
    }
    let m = phi.num_vars();
    let skip: BTreeSet<usize> = if prune {
        phi.variables_in_all_clauses().into_iter().collect()
    } else {
        BTreeSet::new()
    };
    for &v in &skip {
        let signs: BTreeSet<bool> = phi
            .clauses()
            .iter()
            .flat_map(|c| c.iter().filter(|l| l.unsigned_abs() as usize == v).map(|&l| l > 0))
            .collect();
        if signs.len() == 1 {
            return Err(NetError::NotWorkflow(format!(
                "x{v} has the same sign in every clause, so p{v}_{} cannot reach f",
                u8::from(!signs.contains(&true))
            )));
        }
    }
    let mut places = vec!["i".to_string(), "p_cl".to_string(), "f".to_string()];
    for v in 1..=m {
        places.push(place_unset(v));
        places.push(place_value(v, 0));
        places.push(place_value(v, 1));
    }
    for v in 1..=m {
        if !skip.contains(&v) {
            places.push(place_q(v));
        }
        places.push(place_r(v));
    }
    let mut spec = NetSpec {
        name: format!("dnf[{phi}]"),
        places,
        ..Default::default()
    };

    fn add(spec: &mut NetSpec, id: String, pre: Vec<(String, u64)>, post: Vec<(String, u64)>) {
        let pre: Vec<(&str, u64)> = pre.iter().map(|(p, w)| (p.as_str(), *w)).collect();
        let post: Vec<(&str, u64)> = post.iter().map(|(p, w)| (p.as_str(), *w)).collect();
        spec.add_transition(&id, &pre, &post);
    }

    let mut init_post: Vec<(String, u64)> = (1..=m).map(|v| (place_unset(v), 1)).collect();
    init_post.push(("p_cl".into(), 1));
    add(&mut spec, "t_init".into(), vec![("i".into(), 1)], init_post);
    for v in 1..=m {
        for b in [0u8, 1] {
            add(
                &mut spec,
                format!("v{v}_{b}"),
                vec![(place_unset(v), 1)],
                vec![(place_value(v, b), 1)],
            );
        }
    }
    for (j, clause) in phi.clauses().iter().enumerate() {
        let mut pre = vec![("p_cl".to_string(), 1)];
        let mut in_clause = BTreeSet::new();
        for &lit in clause {
            let v = lit.unsigned_abs() as usize;
            in_clause.insert(v);
            pre.push((place_value(v, u8::from(lit > 0)), 1));
        }
        let post = (1..=m)
            .map(|v| {
                if in_clause.contains(&v) {
                    (place_r(v), 1)
                } else {
                    (place_q(v), 1)
                }
            })
            .collect();
        add(&mut spec, format!("c{}", j + 1), pre, post);
    }
    for v in 1..=m {
        if skip.contains(&v) {
            continue;
        }
        for b in [0u8, 1] {
            add(
                &mut spec,
                format!("vbar{v}_{b}"),
                vec![(place_value(v, b), 1), (place_q(v), 1)],
                vec![(place_r(v), 1)],
            );
        }
    }
    let fin_pre = (1..=m).map(|v| (place_r(v), 1)).collect();
    add(&mut spec, "t_fin".into(), fin_pre, vec![("f".into(), 1)]);
    spec.with_initial("i").with_final("f").build()
}

/// Deterministic random formula: `clauses` clauses over `num_vars` variables,
/// each with between 1 and `num_vars` distinct literals.
pub fn gen_random_dnf(num_vars: usize, clauses: usize, seed: u64) -> Result<DnfFormula, String> {
    if num_vars == 0 || num_vars > 20 {
        return Err(format!("variable count {num_vars} outside 1..20"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(clauses);
    for _ in 0..clauses {
        let size = rng.random_range(1..=num_vars);
        let mut vars: Vec<usize> = (1..=num_vars).collect();
        for k in (1..vars.len()).rev() {
            let j = rng.random_range(0..=k);
            vars.swap(k, j);
        }
        let clause = vars[..size]
            .iter()
            .map(|&v| if rng.random_bool(0.5) { v as i64 } else { -(v as i64) })
            .collect();
        out.push(clause);
    }
    DnfFormula::new(num_vars, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dnf_tautology;
    use crate::rational::int;
    use crate::workflow::{is_free_choice, is_place_invariant, validate_workflow, PlaceInvariant};

    fn sample_formula() -> DnfFormula {
        DnfFormula::parse("x1 & x2 & !x4 | !x1 & x3 & x4").unwrap()
    }

    #[test]
    fn parse_and_display() {
        let phi = sample_formula();
        assert_eq!(phi.num_vars(), 4);
        assert_eq!(phi.clauses(), &[vec![1, 2, -4], vec![-1, 3, 4]]);
        assert_eq!(phi.to_string(), "x1 & x2 & !x4 | !x1 & x3 & x4");
        assert_eq!(DnfFormula::parse(&phi.to_string()).unwrap(), phi);
        assert!(DnfFormula::parse("x1 & !x1").is_err());
        assert!(DnfFormula::parse("y1").is_err());
        assert!(DnfFormula::parse("x0").is_err());
    }

    #[test]
    fn sample_formula_net_shape() {
        let phi = sample_formula();
        let raw = gen_dnf_net_unpruned(&phi).unwrap();
        assert_eq!((raw.num_places(), raw.num_transitions()), (23, 20));
        assert!(!validate_workflow(&raw).is_ok());
        let net = gen_dnf_net(&phi).unwrap();
        assert_eq!(phi.variables_in_all_clauses(), vec![1, 4]);
        assert_eq!((net.num_places(), net.num_transitions()), (21, 16));
        assert!(validate_workflow(&net).is_ok());
        let c1 = net.transition_named("c1").unwrap();
        let pre: Vec<&str> = net.pre(c1).places().map(|p| net.place_name(p)).collect();
        assert_eq!(pre, vec!["p_cl", "p1_1", "p2_1", "p4_0"]);
        let post: Vec<&str> = net.post(c1).places().map(|p| net.place_name(p)).collect();
        assert_eq!(post, vec!["r1", "r2", "q3", "r4"]);
    }

    #[test]
    fn invariants_a_and_b_hold() {
        let phi = sample_formula();
        for net in [gen_dnf_net(&phi).unwrap(), gen_dnf_net_unpruned(&phi).unwrap()] {
            let all: Vec<_> = net.transition_ids().collect();
            for v in 1..=phi.num_vars() {
                let mut a = vec![("i", int(1)), ("f", int(1))];
                let names = [
                    place_unset(v),
                    place_value(v, 0),
                    place_value(v, 1),
                    place_r(v),
                    place_q(v),
                ];
                for n in &names[..4] {
                    a.push((n.as_str(), int(1)));
                }
                let a = PlaceInvariant::named(&net, &a).unwrap();
                assert!(is_place_invariant(&net, &a, &all), "A_{v}");
                let mut b = vec![
                    ("i", int(1)),
                    ("p_cl", int(1)),
                    ("f", int(1)),
                    (names[3].as_str(), int(1)),
                ];
                if net.place(&names[4]).is_some() {
                    b.push((names[4].as_str(), int(1)));
                }
                let b = PlaceInvariant::named(&net, &b).unwrap();
                assert!(is_place_invariant(&net, &b, &all), "B_{v}");
            }
        }
    }

    #[test]
    fn tautology_net_is_not_free_choice() {
        let net = gen_dnf_net(&DnfFormula::parse("x1 | !x1").unwrap()).unwrap();
        assert!(validate_workflow(&net).is_ok());
        assert!(!is_free_choice(&net));
    }

    #[test]
    fn random_formulas_are_deterministic() {
        let a = gen_random_dnf(3, 2, 42).unwrap();
        let b = gen_random_dnf(3, 2, 42).unwrap();
        assert_eq!(a, b);
        let single = gen_random_dnf(1, 1, 7).unwrap();
        assert_eq!(single.clauses().len(), 1);
        assert!(!dnf_tautology(&single).unwrap());
        let all_patterns = DnfFormula::new(2, vec![vec![1, 2], vec![1, -2], vec![-1, 2], vec![-1, -2]]).unwrap();
        assert!(dnf_tautology(&all_patterns).unwrap());
    }
}
