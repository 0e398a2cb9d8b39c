//! Exact two-phase simplex over arbitrary-precision rationals.
//!
//! Dense tableau, Bland's rule for anti-cycling. Row updates skip zero
//! entries, which keeps the sparse systems built from nets cheap.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn holds(&self, assignment: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().map(|(v, c)| c * &assignment[*v]).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    names: Vec<String>,
    nonneg: Vec<bool>,
    constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, nonneg: bool) -> usize {
        self.names.push(name.into());
        self.nonneg.push(nonneg);
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        for (v, _) in &coeffs {
            assert!(*v < self.names.len(), "constraint references undeclared variable {v}");
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn is_nonneg(&self, v: usize) -> bool {
        self.nonneg[v]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Exact substitution check, including sign constraints.
    pub fn satisfied_by(&self, assignment: &[Rational]) -> bool {
        assignment.len() == self.names.len()
            && self
                .nonneg
                .iter()
                .zip(assignment)
                .all(|(&nn, v)| !nn || !v.is_negative())
            && self.constraints.iter().all(|c| c.holds(assignment))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Feasible(Vec<Rational>),
    Infeasible,
    UnboundedObjective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maximum {
    pub value: Rational,
    pub assignment: Vec<Rational>,
}

pub fn lp_feasible(sys: &LinearSystem) -> LpResult {
    match solve(sys, None) {
        Outcome::Optimal(assignment) => LpResult::Feasible(assignment),
        Outcome::Infeasible => LpResult::Infeasible,
        Outcome::Unbounded => unreachable!("feasibility has no objective"),
    }
}

/// Maximizes `objective` subject to `sys` and `objective ≤ cap`. `None` when infeasible.
pub fn lp_maximize(sys: &LinearSystem, objective: &[(usize, Rational)], cap: &Rational) -> Option<Maximum> {
    let mut capped = sys.clone();
    capped.add_constraint(objective.to_vec(), Relation::Le, cap.clone());
    match solve(&capped, Some(objective)) {
        Outcome::Optimal(assignment) => {
            let value = objective.iter().map(|(v, c)| c * &assignment[*v]).sum();
            Some(Maximum { value, assignment })
        }
        Outcome::Infeasible => None,
        Outcome::Unbounded => unreachable!("capped objective is bounded"),
    }
}

/// Maximizes without a cap.
pub fn lp_maximize_uncapped(sys: &LinearSystem, objective: &[(usize, Rational)]) -> LpResult {
    match solve(sys, Some(objective)) {
        Outcome::Optimal(assignment) => LpResult::Feasible(assignment),
        Outcome::Infeasible => LpResult::Infeasible,
        Outcome::Unbounded => LpResult::UnboundedObjective,
    }
}

enum Outcome {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// z_j − c_j for a maximization; the last entry holds the objective value.
    z: Vec<Rational>,
    basis: Vec<usize>,
    banned: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.z.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let nonzero: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[c].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.z);
        self.basis[r] = c;
    }

    /// Runs primal simplex with Bland's rule until optimal or unbounded.
    fn run(&mut self) -> Step {
        let width = self.width();
        loop {
            let entering = (0..width).find(|&j| !self.banned[j] && self.z[j].is_negative());
            let Some(c) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[width] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Step::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn set_objective(&mut self, cost: &[Rational]) {
        let width = self.width();
        let mut z = vec![Rational::zero(); width + 1];
        for (j, c) in cost.iter().enumerate() {
            if !c.is_zero() {
                z[j] = -c.clone();
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    z[j] += cb * v;
                }
            }
        }
        self.z = z;
    }
}

/// Sparse coefficients, relation and right-hand side.
type Row = (Vec<(usize, Rational)>, Relation, Rational);

fn solve(sys: &LinearSystem, objective: Option<&[(usize, Rational)]>) -> Outcome {
    // Structural columns: one per nonnegative variable, two per free variable.
    let mut column_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(sys.num_vars());
    let mut ncols = 0;
    for v in 0..sys.num_vars() {
        if sys.nonneg[v] {
            column_of.push((ncols, None));
            ncols += 1;
        } else {
            column_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let structural = ncols;

    // Normalize to nonnegative right-hand sides.
    let mut normalized: Vec<Row> = Vec::new();
    for c in &sys.constraints {
        let mut row: Vec<(usize, Rational)> = Vec::new();
        for (v, coeff) in &c.coeffs {
            if coeff.is_zero() {
                continue;
            }
            let (pos, neg) = column_of[*v];
            row.push((pos, coeff.clone()));
            if let Some(neg) = neg {
                row.push((neg, -coeff.clone()));
            }
        }
        let (row, relation, rhs) = if c.rhs.is_negative() {
            let flipped = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (row.into_iter().map(|(j, v)| (j, -v)).collect(), flipped, -c.rhs.clone())
        } else {
            (row, c.relation, c.rhs.clone())
        };
        normalized.push((row, relation, rhs));
    }

    let slacks = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let artificials = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let width = structural + slacks + artificials;
    let mut rows = Vec::with_capacity(normalized.len());
    let mut basis = Vec::with_capacity(normalized.len());
    let mut next_slack = structural;
    let mut next_art = structural + slacks;
    for (coeffs, relation, rhs) in normalized {
        let mut row = vec![Rational::zero(); width + 1];
        for (j, v) in coeffs {
            row[j] += v;
        }
        row[width] = rhs;
        match relation {
            Relation::Le => {
                row[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }
    let first_art = structural + slacks;
    let mut tableau = Tableau {
        rows,
        z: vec![Rational::zero(); width + 1],
        basis,
        banned: vec![false; width],
    };

    if artificials > 0 {
        let mut cost = vec![Rational::zero(); width];
        for c in cost.iter_mut().skip(first_art) {
            *c = -Rational::one();
        }
        tableau.set_objective(&cost);
        tableau.run();
        if tableau.z[width].is_negative() {
            return Outcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= first_art {
                let replacement = (0..first_art).find(|&j| !tableau.rows[r][j].is_zero());
                match replacement {
                    Some(c) => {
                        tableau.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for b in tableau.banned.iter_mut().skip(first_art) {
            *b = true;
        }
    }

    if let Some(objective) = objective {
        let mut cost = vec![Rational::zero(); width];
        for (v, c) in objective {
            let (pos, neg) = column_of[*v];
            cost[pos] += c;
            if let Some(neg) = neg {
                cost[neg] -= c;
            }
        }
        tableau.set_objective(&cost);
        if let Step::Unbounded = tableau.run() {
            return Outcome::Unbounded;
        }
    }

    let mut values = vec![Rational::zero(); width];
    for (i, &b) in tableau.basis.iter().enumerate() {
        values[b] = tableau.rows[i][width].clone();
    }
    let assignment = column_of
        .iter()
        .map(|&(pos, neg)| match neg {
            None => values[pos].clone(),
            Some(neg) => &values[pos] - &values[neg],
        })
        .collect();
    Outcome::Optimal(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn simple_feasibility() {
        let mut sys = LinearSystem::new();
        let x = sys.add_var("x", true);
        sys.add_constraint(vec![(x, int(1))], Relation::Ge, int(1));
        match lp_feasible(&sys) {
            LpResult::Feasible(a) => {
                assert!(sys.satisfied_by(&a));
                assert_eq!(a[x], int(1));
            }
            other => panic!("{other:?}"),
        }
        let mut sys = LinearSystem::new();
        let x = sys.add_var("x", true);
        sys.add_constraint(vec![(x, int(1))], Relation::Le, int(-1));
        assert_eq!(lp_feasible(&sys), LpResult::Infeasible);
    }

    #[test]
    fn maximize_with_and_without_cap() {
        let mut sys = LinearSystem::new();
        let x = sys.add_var("x", true);
        sys.add_constraint(vec![(x, int(1))], Relation::Le, int(3));
        let max = lp_maximize(&sys, &[(x, int(1))], &int(10)).unwrap();
        assert_eq!(max.value, int(3));
        let mut open = LinearSystem::new();
        let y = open.add_var("y", true);
        let max = lp_maximize(&open, &[(y, int(1))], &int(1)).unwrap();
        assert_eq!(max.value, int(1));
        assert_eq!(
            lp_maximize_uncapped(&open, &[(y, int(1))]),
            LpResult::UnboundedObjective
        );
    }

    #[test]
    fn free_variables() {
        let mut sys = LinearSystem::new();
        let x = sys.add_var("x", false);
        let y = sys.add_var("y", true);
        sys.add_constraint(vec![(x, int(1)), (y, int(1))], Relation::Eq, int(-2));
        sys.add_constraint(vec![(y, int(2))], Relation::Eq, int(1));
        match lp_feasible(&sys) {
            LpResult::Feasible(a) => {
                assert_eq!(a[x], ratio(-5, 2));
                assert_eq!(a[y], ratio(1, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_redundant_equalities() {
        let mut sys = LinearSystem::new();
        let x = sys.add_var("x", true);
        let y = sys.add_var("y", true);
        let z = sys.add_var("z", true);
        for _ in 0..3 {
            sys.add_constraint(vec![(x, int(1)), (y, int(1)), (z, int(1))], Relation::Eq, int(0));
        }
        sys.add_constraint(vec![(x, int(2)), (y, int(2)), (z, int(2))], Relation::Eq, int(0));
        sys.add_constraint(vec![(x, int(1)), (y, int(-1))], Relation::Le, int(0));
        let max = lp_maximize(&sys, &[(x, int(1)), (z, int(1))], &int(5)).unwrap();
        assert_eq!(max.value, int(0));
        assert!(sys.satisfied_by(&max.assignment));
    }

    #[test]
    fn classic_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut sys = LinearSystem::new();
        let v: Vec<usize> = (0..4).map(|i| sys.add_var(format!("x{i}"), true)).collect();
        sys.add_constraint(
            vec![
                (v[0], ratio(1, 4)),
                (v[1], int(-60)),
                (v[2], ratio(-1, 25)),
                (v[3], int(9)),
            ],
            Relation::Le,
            int(0),
        );
        sys.add_constraint(
            vec![
                (v[0], ratio(1, 2)),
                (v[1], int(-90)),
                (v[2], ratio(-1, 50)),
                (v[3], int(3)),
            ],
            Relation::Le,
            int(0),
        );
        sys.add_constraint(vec![(v[2], int(1))], Relation::Le, int(1));
        let objective = vec![
            (v[0], ratio(3, 4)),
            (v[1], int(-150)),
            (v[2], ratio(1, 50)),
            (v[3], int(-6)),
        ];
        let max = lp_maximize(&sys, &objective, &int(100)).unwrap();
        assert_eq!(max.value, ratio(1, 20));
        assert!(sys.satisfied_by(&max.assignment));
    }
}
