//! CSP instances with a weight parameter, their structural parameters, and
//! the brute-force satisfiability oracle.

mod generate;
mod oracle;
mod transform;

pub use generate::{random_instance, GenConfig, Profile};
pub use oracle::{all_solutions, brute_force_solve, naive_solve};
pub(crate) use transform::fresh_name;
pub use transform::{lift_kle_to_k, reduce_parity_multiplicity};

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::relations::Relation;
use crate::subset::PosSet;

/// A variable, identified by its position in the instance's declaration
/// list. The declaration order is the total order used for witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    relation: Relation,
    scope: Vec<Var>,
}

impl Constraint {
    pub fn new(relation: Relation, scope: Vec<Var>) -> Result<Self> {
        if scope.len() != relation.arity() {
            return Err(Error::Domain(format!(
                "scope has {} entries but the relation has arity {}",
                scope.len(),
                relation.arity()
            )));
        }
        Ok(Constraint { relation, scope })
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn scope(&self) -> &[Var] {
        &self.scope
    }

    /// `T = {j | scope(j) is true}` under the membership predicate `is_true`.
    pub fn tuple_by(&self, is_true: impl Fn(Var) -> bool) -> PosSet {
        PosSet::new(
            self.scope
                .iter()
                .enumerate()
                .filter(|(_, &v)| is_true(v))
                .map(|(j, _)| j + 1),
        )
    }

    pub fn satisfied_by(&self, is_true: impl Fn(Var) -> bool) -> bool {
        self.relation.contains_unchecked(&self.tuple_by(is_true))
    }

    /// Number of scope positions holding `v`.
    pub fn multiplicity(&self, v: Var) -> usize {
        self.scope.iter().filter(|&&x| x == v).count()
    }

    /// Distinct variables of the scope, sorted.
    pub fn support(&self) -> Vec<Var> {
        let mut s = self.scope.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    Exact,
    AtMost,
}

/// The weight constraint `C(1)`: `W^{k}` (exact) or `W^{[0,k]}` (at most)
/// over all variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightParameter {
    pub mode: WeightMode,
    pub k: usize,
}

impl WeightParameter {
    pub fn exact(k: usize) -> Self {
        WeightParameter { mode: WeightMode::Exact, k }
    }

    pub fn at_most(k: usize) -> Self {
        WeightParameter { mode: WeightMode::AtMost, k }
    }

    pub fn admits(&self, weight: usize) -> bool {
        match self.mode {
            WeightMode::Exact => weight == self.k,
            WeightMode::AtMost => weight <= self.k,
        }
    }
}

impl fmt::Display for WeightParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            WeightMode::Exact => write!(f, "k={}", self.k),
            WeightMode::AtMost => write!(f, "k<={}", self.k),
        }
    }
}

/// An instance `(V, C)`; the weight constraint is carried as `weight` and
/// `body` holds the remaining constraints `C(2), ..., C(|C|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    variables: Vec<String>,
    weight: WeightParameter,
    body: Vec<Constraint>,
}

impl Instance {
    pub fn new(variables: Vec<String>, weight: WeightParameter, body: Vec<Constraint>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in &variables {
            if !seen.insert(name.as_str()) {
                return Err(Error::Domain(format!("duplicate variable {name:?}")));
            }
        }
        for (i, c) in body.iter().enumerate() {
            if let Some(v) = c.scope.iter().find(|v| v.0 >= variables.len()) {
                return Err(Error::Domain(format!(
                    "constraint {i} references undeclared variable #{}",
                    v.0
                )));
            }
        }
        Ok(Instance { variables, weight, body })
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn name(&self, v: Var) -> &str {
        &self.variables[v.0]
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.variables.iter().position(|n| n == name).map(Var)
    }

    pub fn weight(&self) -> WeightParameter {
        self.weight
    }

    pub fn body(&self) -> &[Constraint] {
        &self.body
    }

    /// Number of constraints including the weight constraint.
    pub fn param_u(&self) -> usize {
        self.body.len() + 1
    }

    /// Largest total number of body-scope occurrences of one variable.
    pub fn param_t(&self) -> usize {
        let mut total = vec![0usize; self.num_vars()];
        for c in &self.body {
            for v in &c.scope {
                total[v.0] += 1;
            }
        }
        total.into_iter().max().unwrap_or(0)
    }

    /// Largest number of occurrences of one variable within one body scope.
    pub fn param_e(&self) -> usize {
        self.body
            .iter()
            .flat_map(|c| {
                let mut s = c.scope.clone();
                s.sort_unstable();
                s.chunk_by(|a, b| a == b).map(<[Var]>::len).max()
            })
            .max()
            .unwrap_or(0)
    }

    /// Size of the instance encoding: one symbol per variable, plus the
    /// relation symbol and scope of every body constraint.
    pub fn input_size(&self) -> usize {
        self.num_vars() + self.body.iter().map(|c| c.scope.len() + 1).sum::<usize>()
    }

    pub fn satisfies(&self, d: &Assignment) -> Result<bool> {
        if let Some(v) = d.iter().find(|v| v.0 >= self.num_vars()) {
            return Err(Error::Domain(format!("variable #{} is not declared", v.0)));
        }
        if !self.weight.admits(d.len()) {
            return Ok(false);
        }
        let mut mask = vec![false; self.num_vars()];
        for v in d.iter() {
            mask[v.0] = true;
        }
        Ok(self.body_satisfied(&mask))
    }

    /// Body check for an assignment given as a truth vector; ignores weight.
    pub fn body_satisfied(&self, truth: &[bool]) -> bool {
        self.body.iter().all(|c| c.satisfied_by(|v| truth[v.0]))
    }

    pub fn assignment_names(&self, d: &Assignment) -> Vec<String> {
        d.iter().map(|v| self.variables[v.0].clone()).collect()
    }

    /// Same variables and weight, different body.
    pub fn with_body(&self, body: Vec<Constraint>) -> Result<Self> {
        Instance::new(self.variables.clone(), self.weight, body)
    }
}

/// The set of variables assigned 1, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<Var>);

impl Assignment {
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Self {
        let mut v: Vec<Var> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Assignment(v)
    }

    pub fn from_indices(idx: &[usize]) -> Self {
        Self::new(idx.iter().map(|&i| Var(i)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().copied()
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::WeightSet;

    pub(crate) fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    fn exact_cnf() -> Instance {
        let rel = Relation::w(WeightSet::finite([1]), 3).unwrap();
        let c = Constraint::new(rel, vec![Var(0), Var(1), Var(2)]).unwrap();
        Instance::new(names(&["x", "y", "z"]), WeightParameter::exact(1), vec![c]).unwrap()
    }

    #[test]
    fn satisfies_examples() {
        let i = exact_cnf();
        assert!(i.satisfies(&Assignment::new([Var(1)])).unwrap());
        assert!(!i.satisfies(&Assignment::default()).unwrap());
        assert!(matches!(i.satisfies(&Assignment::new([Var(7)])), Err(Error::Domain(_))));

        // Horn clause x -> y
        let horn = Relation::cw(WeightSet::initial_segment(1), 1, 1).unwrap();
        let c = Constraint::new(horn, vec![Var(0), Var(1)]).unwrap();
        let i = Instance::new(names(&["x", "y"]), WeightParameter::exact(1), vec![c]).unwrap();
        assert!(!i.satisfies(&Assignment::new([Var(0)])).unwrap());
        assert!(i.satisfies(&Assignment::new([Var(1)])).unwrap());
    }

    #[test]
    fn parameters() {
        let w = |m| Relation::w(WeightSet::even(), m).unwrap();
        let c1 = Constraint::new(w(3), vec![Var(0), Var(0), Var(1)]).unwrap();
        let c2 = Constraint::new(w(2), vec![Var(0), Var(0)]).unwrap();
        let i = Instance::new(names(&["x", "y"]), WeightParameter::exact(1), vec![c1, c2]).unwrap();
        assert_eq!((i.param_u(), i.param_t(), i.param_e()), (3, 4, 2));

        let empty = Instance::new(names(&["x"]), WeightParameter::exact(0), vec![]).unwrap();
        assert_eq!((empty.param_u(), empty.param_t(), empty.param_e()), (1, 0, 0));

        let c = Constraint::new(w(5), (0..5).map(Var).collect()).unwrap();
        let i = Instance::new(names(&["a", "b", "c", "d", "e"]), WeightParameter::exact(1), vec![c]).unwrap();
        assert_eq!(i.param_e(), 1);
        assert_eq!(i.param_t(), 1);
    }

    #[test]
    fn construction_errors() {
        let rel = Relation::w(WeightSet::even(), 2).unwrap();
        assert!(Constraint::new(rel.clone(), vec![Var(0)]).is_err());
        let c = Constraint::new(rel, vec![Var(0), Var(5)]).unwrap();
        assert!(Instance::new(names(&["x"]), WeightParameter::exact(0), vec![c]).is_err());
        assert!(Instance::new(names(&["x", "x"]), WeightParameter::exact(0), vec![]).is_err());
    }
}
