use std::collections::BTreeMap;

use super::{Checker, GuessCheckMachine};
use crate::error::{Error, Result};
use crate::instances::{Constraint, Instance, Var, WeightMode};
use crate::relations::CostModel;
use crate::subset::PosSet;

/// Checker of the appearance machine: every constraint touched by the guess
/// must hold, and every constraint that rejects the empty tuple must be
/// touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppearanceChecker {
    constraints: Vec<Constraint>,
    e_sets: Vec<Vec<usize>>,
    d_set: Vec<usize>,
    cost_model: CostModel,
    occurrences: Vec<Vec<(usize, usize)>>,
    closing: Vec<Vec<usize>>,
}

impl AppearanceChecker {
    pub fn new(num_vars: usize, constraints: Vec<Constraint>, cost_model: CostModel) -> Self {
        let mut occurrences = vec![Vec::new(); num_vars];
        let mut closing = vec![Vec::new(); num_vars];
        for (i, c) in constraints.iter().enumerate() {
            for (j, v) in c.scope().iter().enumerate() {
                occurrences[v.0].push((i, j + 1));
            }
            if let Some(last) = c.scope().iter().max() {
                closing[last.0].push(i);
            }
        }
        let e_sets = occurrences
            .iter()
            .map(|occ| {
                let mut e: Vec<usize> = occ.iter().map(|&(i, _)| i).collect();
                e.dedup();
                e
            })
            .collect();
        let d_set = (0..constraints.len())
            .filter(|&i| !constraints[i].relation().contains_empty())
            .collect();
        AppearanceChecker { constraints, e_sets, d_set, cost_model, occurrences, closing }
    }

    /// Rebuilds a checker and verifies the stored `E_v` and `D` against the
    /// constraint table.
    pub fn from_parts(
        num_vars: usize,
        constraints: Vec<Constraint>,
        e_sets: Vec<Vec<usize>>,
        d_set: Vec<usize>,
        cost_model: CostModel,
    ) -> Result<Self> {
        if let Some(v) = constraints.iter().flat_map(|c| c.scope()).find(|v| v.0 >= num_vars) {
            return Err(Error::Usage(format!("constraint scope uses element #{} outside the universe", v.0)));
        }
        let c = Self::new(num_vars, constraints, cost_model);
        if c.e_sets != e_sets {
            return Err(Error::Usage("E_v sets do not match the constraint table".into()));
        }
        if c.d_set != d_set {
            return Err(Error::Usage("D does not match the constraint table".into()));
        }
        Ok(c)
    }

    pub fn num_vars(&self) -> usize {
        self.e_sets.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn e_sets(&self) -> &[Vec<usize>] {
        &self.e_sets
    }

    pub fn d_set(&self) -> &[usize] {
        &self.d_set
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost_model
    }

    /// Steps 2 and 3 on guess `a`; returns the verdict and the steps spent.
    pub(super) fn check(&self, a: &[usize]) -> (bool, u64) {
        let mut steps = 0u64;
        let mut touched: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in a {
            for &(i, j) in &self.occurrences[v] {
                steps += 1;
                touched.entry(i).or_default().push(j);
            }
        }
        for (&i, positions) in &touched {
            let rel = self.constraints[i].relation();
            let t = PosSet::new(positions.iter().copied());
            steps += self.cost_model.membership_cost(rel, &t);
            if !rel.contains_unchecked(&t) {
                return (false, steps);
            }
        }
        for i in &self.d_set {
            steps += 1;
            if !touched.contains_key(i) {
                return (false, steps);
            }
        }
        (true, steps)
    }

    /// Constraints whose scope lies entirely at or before the prefix's last
    /// element are decided; one of them failing refutes the prefix.
    pub(super) fn refutes(&self, prefix: &[usize]) -> bool {
        let Some(&last) = prefix.last() else {
            return false;
        };
        let from = match prefix.len() {
            1 => 0,
            l => prefix[l - 2] + 1,
        };
        let in_prefix = |v: Var| prefix.binary_search(&v.0).is_ok();
        self.closing[from..=last]
            .iter()
            .flatten()
            .any(|&i| !self.constraints[i].satisfied_by(in_prefix))
    }
}

/// Largest step count of a guess of size `k0` when no variable occurs in
/// more than `t0` body positions.
fn appearance_budget(k0: usize, t0: usize, max_index: u64, cm: &CostModel) -> u64 {
    let (k0, kt) = (k0 as u64, (k0 * t0) as u64);
    let membership = cm.cost_at(k0 as usize * t0, max_index);
    k0 + 1 + kt + kt * membership + kt
}

/// Compiles an exact-weight instance into the appearance machine.
pub fn reduce_appearance(inst: &Instance, cm: &CostModel) -> Result<GuessCheckMachine> {
    let weight = inst.weight();
    if weight.mode != WeightMode::Exact {
        return Err(Error::Usage(
            "the appearance machine needs an exact weight; lift the at-most instance first".into(),
        ));
    }
    let checker = AppearanceChecker::new(inst.num_vars(), inst.body().to_vec(), *cm);
    let (k0, t0) = (weight.k, inst.param_t());
    let universe = inst.variables().to_vec();
    if checker.d_set.len() > k0 * t0 {
        return Ok(GuessCheckMachine { universe, weight, budget: 0, checker: Checker::AlwaysReject });
    }
    let max_index = inst.body().iter().map(|c| c.relation().index()).max().unwrap_or(1);
    let budget = appearance_budget(k0, t0, max_index, cm);
    Ok(GuessCheckMachine { universe, weight, budget, checker: Checker::Appearance(checker) })
}
