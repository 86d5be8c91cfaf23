use std::collections::HashSet;

use super::{Constraint, Instance, Var, WeightMode, WeightParameter};
use crate::error::{Error, Result};
use crate::relations::{Relation, RelationKind, WeightKind, WeightSet};

/// `name`, or `name` with a numeric suffix, not already in `taken`.
pub(crate) fn fresh_name(base: &str, taken: &mut HashSet<String>) -> String {
    let mut candidate = base.to_string();
    let mut i = 1;
    while taken.contains(&candidate) {
        candidate = format!("{base}~{i}");
        i += 1;
    }
    taken.insert(candidate.clone());
    candidate
}

/// Turns an at-most-`k` instance into an exact-`k` one by adding `k` padding
/// variables that occur in no constraint.
///
/// A witness of weight `j <= k` extends to one of weight `k` with `k - j`
/// padding variables, and dropping the padding maps witnesses back.
pub fn lift_kle_to_k(inst: &Instance) -> Result<Instance> {
    let w = inst.weight();
    if w.mode != WeightMode::AtMost {
        return Err(Error::Usage("lift_kle_to_k expects an at-most instance".into()));
    }
    let mut taken: HashSet<String> = inst.variables().iter().cloned().collect();
    let mut vars = inst.variables().to_vec();
    for i in 1..=w.k {
        vars.push(fresh_name(&format!("pad{i}"), &mut taken));
    }
    Instance::new(vars, WeightParameter::exact(w.k), inst.body().to_vec())
}

/// Rewrites every parity constraint so each variable occurs at most once:
/// occurrences cancel in pairs.
///
/// An `Even` constraint left with an empty scope is dropped. An `Odd` one is
/// unsatisfiable; it is replaced by `W^odd_1<v>` together with
/// `W^even_1<v>` on its first variable, which keeps the result inside the
/// parity language with `e <= 1`.
pub fn reduce_parity_multiplicity(inst: &Instance) -> Result<Instance> {
    let mut body = Vec::new();
    for (i, c) in inst.body().iter().enumerate() {
        let kind = match c.relation().kind() {
            RelationKind::W { weights, .. }
                if matches!(weights.kind(), WeightKind::Even | WeightKind::Odd) =>
            {
                weights.kind()
            }
            _ => {
                return Err(Error::Usage(format!(
                    "constraint {i} is not a parity W relation"
                )))
            }
        };
        let weights = c.relation().weights().expect("W relation").clone();
        let mut scope: Vec<Var> = Vec::new();
        for &v in c.scope() {
            if !scope.contains(&v) && c.multiplicity(v) % 2 == 1 {
                scope.push(v);
            }
        }
        if scope.is_empty() {
            if kind == WeightKind::Odd {
                let v = c.scope()[0];
                body.push(Constraint::new(Relation::w(WeightSet::odd(), 1)?, vec![v])?);
                body.push(Constraint::new(Relation::w(WeightSet::even(), 1)?, vec![v])?);
            }
            continue;
        }
        let rel = Relation::w(weights, scope.len())?.with_index(c.relation().index())?;
        body.push(Constraint::new(rel, scope)?);
    }
    inst.with_body(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{brute_force_solve, random_instance, GenConfig, Profile};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn lift_example() {
        let i = Instance::new(names(1), WeightParameter::at_most(1), vec![]).unwrap();
        let j = lift_kle_to_k(&i).unwrap();
        assert_eq!(j.num_vars(), 2);
        assert_eq!(j.weight(), WeightParameter::exact(1));
        assert!(brute_force_solve(&j).is_some());
        assert!(matches!(lift_kle_to_k(&j), Err(Error::Usage(_))));
    }

    #[test]
    fn lift_avoids_name_clash() {
        let i = Instance::new(vec!["pad1".into()], WeightParameter::at_most(2), vec![]).unwrap();
        let j = lift_kle_to_k(&i).unwrap();
        let set: HashSet<_> = j.variables().iter().collect();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn lift_preserves_satisfiability() {
        for seed in 0..500u64 {
            let mut cfg = GenConfig::new(2 + seed as usize % 11, seed as usize % 4, Profile::Mixed);
            cfg.at_most = true;
            let i = random_instance(seed, &cfg).unwrap();
            let j = lift_kle_to_k(&i).unwrap();
            let wi = brute_force_solve(&i);
            let wj = brute_force_solve(&j);
            assert_eq!(wi.is_some(), wj.is_some(), "seed {seed}");
            if let Some(wj) = wj {
                // drop padding: still a witness of I
                let orig = crate::instances::Assignment::new(wj.iter().filter(|v| v.0 < i.num_vars()));
                assert!(i.satisfies(&orig).unwrap());
                let pads = wj.len() - orig.len();
                assert_eq!(pads, i.weight().k - orig.len());
            }
        }
    }

    #[test]
    fn parity_examples() {
        let odd4 = Relation::w(WeightSet::odd(), 4).unwrap();
        let c = Constraint::new(odd4, vec![Var(0), Var(0), Var(1), Var(2)]).unwrap();
        let i = Instance::new(names(3), WeightParameter::exact(1), vec![c]).unwrap();
        let j = reduce_parity_multiplicity(&i).unwrap();
        assert_eq!(j.body().len(), 1);
        assert_eq!(j.body()[0].scope(), &[Var(1), Var(2)]);
        assert_eq!(j.body()[0].relation().arity(), 2);

        let even2 = Relation::w(WeightSet::even(), 2).unwrap();
        let c = Constraint::new(even2, vec![Var(0), Var(0)]).unwrap();
        let i = Instance::new(names(1), WeightParameter::exact(1), vec![c]).unwrap();
        assert!(reduce_parity_multiplicity(&i).unwrap().body().is_empty());

        let odd2 = Relation::w(WeightSet::odd(), 2).unwrap();
        let c = Constraint::new(odd2, vec![Var(0), Var(0)]).unwrap();
        let i = Instance::new(names(1), WeightParameter::exact(1), vec![c]).unwrap();
        let j = reduce_parity_multiplicity(&i).unwrap();
        assert!(brute_force_solve(&j).is_none());
        assert!(j.param_e() <= 1);
    }

    #[test]
    fn parity_rejects_other_relations() {
        let rel = Relation::w(WeightSet::finite([1]), 1).unwrap();
        let c = Constraint::new(rel, vec![Var(0)]).unwrap();
        let i = Instance::new(names(1), WeightParameter::exact(1), vec![c]).unwrap();
        assert!(matches!(reduce_parity_multiplicity(&i), Err(Error::Usage(_))));
    }

    #[test]
    fn parity_reduction_preserves_satisfiability() {
        for seed in 0..500u64 {
            let mut cfg = GenConfig::new(2 + seed as usize % 8, seed as usize % 4, Profile::Parity);
            cfg.max_arity = 6;
            cfg.at_most = seed % 2 == 0;
            let i = random_instance(seed, &cfg).unwrap();
            let j = reduce_parity_multiplicity(&i).unwrap();
            assert!(j.param_e() <= 1);
            assert_eq!(brute_force_solve(&i).is_some(), brute_force_solve(&j).is_some(), "seed {seed}");
        }
    }
}
