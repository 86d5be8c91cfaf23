use super::{Assignment, Instance, WeightMode};
use crate::subset::{walk_lex, Walk};

/// Lexicographically least satisfying assignment, by exhaustive search.
///
/// Candidates are visited in lexicographic order of their sorted variable
/// sequences. A prefix is abandoned only when some body constraint whose
/// variables are all already decided is violated, or when an exact weight
/// can no longer be reached, so the first hit is the least witness.
pub fn brute_force_solve(inst: &Instance) -> Option<Assignment> {
    let mut found = None;
    search(inst, |d| {
        found = Some(d);
        false
    });
    found
}

/// Every satisfying assignment, in lexicographic order, up to `limit`.
pub fn all_solutions(inst: &Instance, limit: usize) -> Vec<Assignment> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    search(inst, |d| {
        out.push(d);
        out.len() < limit
    });
    out
}

/// Plain enumeration of every weight-admissible subset without pruning.
/// Only for small instances; kept as a cross-check of [`brute_force_solve`].
pub fn naive_solve(inst: &Instance) -> Option<Assignment> {
    let w = inst.weight();
    let n = inst.num_vars();
    let mut found = None;
    walk_lex(n, w.k, |s| {
        if w.admits(s.len()) {
            let d = Assignment::from_indices(s);
            if inst.satisfies(&d).unwrap_or(false) {
                found = Some(d);
                return Walk::Stop;
            }
        }
        Walk::Descend
    });
    found
}

/// Drives the pruned walk; `emit` returns whether to keep going.
fn search(inst: &Instance, mut emit: impl FnMut(Assignment) -> bool) {
    let n = inst.num_vars();
    let w = inst.weight();
    // Constraints bucketed by the largest variable in their scope.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in inst.body().iter().enumerate() {
        if let Some(max) = c.scope().iter().max() {
            closing[max.0].push(i);
        }
    }
    let mut truth = vec![false; n];
    let mut prev: Vec<usize> = Vec::new();

    walk_lex(n, w.k, |s| {
        for &v in &prev {
            truth[v] = false;
        }
        for &v in s {
            truth[v] = true;
        }
        prev.clear();
        prev.extend_from_slice(s);

        let last = s.last().copied();
        if let Some(last) = last {
            if w.mode == WeightMode::Exact && s.len() + (n - last - 1) < w.k {
                return Walk::Skip;
            }
            let from = if s.len() >= 2 { s[s.len() - 2] + 1 } else { 0 };
            for bucket in &closing[from..=last] {
                for &i in bucket {
                    if !inst.body()[i].satisfied_by(|v| truth[v.0]) {
                        return Walk::Skip;
                    }
                }
            }
        }
        if w.admits(s.len()) && inst.body_satisfied(&truth) && !emit(Assignment::from_indices(s)) {
            return Walk::Stop;
        }
        Walk::Descend
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_instance, Constraint, GenConfig, Profile, Var, WeightParameter};
    use crate::relations::{Relation, WeightKind, WeightSet};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn least_witness() {
        let rel = Relation::w(WeightSet::finite([1]), 2).unwrap();
        let c = Constraint::new(rel, vec![Var(0), Var(1)]).unwrap();
        let i = Instance::new(names(2), WeightParameter::exact(1), vec![c]).unwrap();
        assert_eq!(brute_force_solve(&i), Some(Assignment::new([Var(0)])));
        assert_eq!(all_solutions(&i, 10).len(), 2);
    }

    #[test]
    fn contradictory_weights() {
        let rel = Relation::w(WeightSet::finite([0]), 1).unwrap();
        let c = Constraint::new(rel, vec![Var(0)]).unwrap();
        let i = Instance::new(names(1), WeightParameter::exact(1), vec![c]).unwrap();
        assert_eq!(brute_force_solve(&i), None);
    }

    #[test]
    fn at_most_prefers_prefixes() {
        let i = Instance::new(names(3), WeightParameter::at_most(2), vec![]).unwrap();
        assert_eq!(brute_force_solve(&i), Some(Assignment::default()));
        let sols = all_solutions(&i, 100);
        assert_eq!(sols.len(), 1 + 3 + 3);
        let mut sorted = sols.clone();
        sorted.sort();
        assert_eq!(sols, sorted);
    }

    #[test]
    fn pruned_matches_naive_on_random_instances() {
        let profiles = [
            Profile::MixedW,
            Profile::Parity,
            Profile::Cw { b: 2 },
            Profile::Explicit { max_member: 3 },
            Profile::SharedW(WeightKind::Finite),
            Profile::Mixed,
        ];
        for seed in 0..400u64 {
            let profile = profiles[seed as usize % profiles.len()].clone();
            let cfg = GenConfig {
                n: 3 + (seed as usize % 7),
                k: seed as usize % 4,
                at_most: seed % 3 == 0,
                min_body: 0,
                max_body: 4,
                min_arity: 1,
                max_arity: 4,
                profile,
            };
            let inst = random_instance(seed, &cfg).unwrap();
            let fast = brute_force_solve(&inst);
            assert_eq!(fast, naive_solve(&inst), "seed {seed}");
            if let Some(d) = &fast {
                assert!(inst.satisfies(d).unwrap());
            }
            // every enumerated solution is valid, and none are missed
            let sols = all_solutions(&inst, usize::MAX);
            let mut count = 0;
            walk_lex(inst.num_vars(), inst.weight().k, |s| {
                let d = Assignment::from_indices(s);
                if inst.satisfies(&d).unwrap() {
                    count += 1;
                    assert!(sols.contains(&d));
                }
                Walk::Descend
            });
            assert_eq!(count, sols.len());
        }
    }
}
