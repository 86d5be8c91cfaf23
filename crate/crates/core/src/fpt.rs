//! Occurrence-profile solvers for `W^E` instances.
//!
//! Every body relation is `W^E_m` for one shared `E`, so whether a chosen set
//! satisfies constraint `i` depends only on how often each chosen variable
//! occurs in that scope. Record for every variable the vector of those
//! multiplicities, capped at `h`; variables with equal vectors are
//! interchangeable. The solver enumerates multisets of `k` picks over the
//! resulting classes, a search whose size depends on `k`, `h` and the number
//! of constraints only.
//!
//! Capping: an occurrence count above `h` is recorded as [`Occurrence::Over`].
//! When `h = max E` such a pick overshoots every member of `E`, so the
//! constraint fails; when `h` is the largest excluded weight the sum clears
//! every excluded value, so the constraint holds. When `h = e(I)` nothing
//! is ever capped.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instances::{Assignment, Instance, Var, WeightMode};
use crate::relations::{RelationKind, WeightKind, WeightSet};
use crate::subset::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Occurrence {
    Count(usize),
    Over,
}

/// Capped multiplicities of one variable, one entry per body constraint.
pub type OccurrenceProfile = Vec<Occurrence>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileClass {
    pub profile: OccurrenceProfile,
    /// Variables sharing the profile, ascending.
    pub representatives: Vec<Var>,
}

impl ProfileClass {
    pub fn count(&self) -> usize {
        self.representatives.len()
    }
}

/// Instrumentation from one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FptStats {
    pub h: usize,
    pub classes: usize,
    /// Complete multisets whose feasibility was evaluated.
    pub multisets: u64,
}

/// The weight set shared by all body relations, `None` for an empty body.
pub fn shared_weights(inst: &Instance) -> Result<Option<WeightSet>> {
    let mut shared: Option<&WeightSet> = None;
    for (i, c) in inst.body().iter().enumerate() {
        let RelationKind::W { weights, .. } = c.relation().kind() else {
            return Err(Error::Usage(format!("constraint {i} is not a W relation")));
        };
        match shared {
            None => shared = Some(weights),
            Some(s) if s == weights => {}
            Some(_) => {
                return Err(Error::Usage(format!(
                    "constraint {i} uses a different weight set"
                )))
            }
        }
    }
    Ok(shared.cloned())
}

/// `h = min {e(I), max E, max(N0 \ E)}` over the terms that exist.
pub fn compute_h(inst: &Instance, weights: &WeightSet) -> Result<usize> {
    if let Some(shared) = shared_weights(inst)? {
        if &shared != weights {
            return Err(Error::Usage("body weight set differs from E".into()));
        }
    }
    let candidates = [Some(inst.param_e()), weights.max_member(), weights.max_excluded()];
    Ok(candidates.into_iter().flatten().min().expect("e(I) is always defined"))
}

pub fn profile_classes(inst: &Instance, h: usize) -> Vec<ProfileClass> {
    let n = inst.num_vars();
    let mut counts = vec![vec![0usize; inst.body().len()]; n];
    for (i, c) in inst.body().iter().enumerate() {
        for v in c.scope() {
            counts[v.0][i] += 1;
        }
    }
    let mut groups: BTreeMap<OccurrenceProfile, Vec<Var>> = BTreeMap::new();
    for (v, row) in counts.into_iter().enumerate() {
        let profile = row
            .into_iter()
            .map(|c| if c > h { Occurrence::Over } else { Occurrence::Count(c) })
            .collect();
        groups.entry(profile).or_default().push(Var(v));
    }
    let mut classes: Vec<ProfileClass> = groups
        .into_iter()
        .map(|(profile, representatives)| ProfileClass { profile, representatives })
        .collect();
    classes.sort_by_key(|c| c.representatives[0]);
    classes
}

pub fn solve_w_kue(inst: &Instance) -> Result<Option<Assignment>> {
    solve_w_kue_with_stats(inst).map(|(d, _)| d)
}

pub fn solve_w_kue_with_stats(inst: &Instance) -> Result<(Option<Assignment>, FptStats)> {
    let weights = shared_weights(inst)
        .map_err(|e| Error::NotApplicable(e.to_string()))?
        .unwrap_or_else(|| WeightSet::cofinite([]));
    let h = compute_h(inst, &weights)?;
    let classes = profile_classes(inst, h);
    let mut stats = FptStats { h, classes: classes.len(), multisets: 0 };

    let w = inst.weight();
    let targets: Vec<usize> = match w.mode {
        WeightMode::Exact => vec![w.k],
        WeightMode::AtMost => (0..=w.k).collect(),
    };
    for k in targets {
        let mut search = MultisetSearch {
            classes: &classes,
            weights: &weights,
            picks: vec![0; classes.len()],
            sums: vec![0; inst.body().len()],
            over: vec![0; inst.body().len()],
            examined: 0,
        };
        let hit = search.run(0, k);
        stats.multisets += search.examined;
        if hit {
            let witness = Assignment::new(
                classes
                    .iter()
                    .zip(&search.picks)
                    .flat_map(|(c, &n)| c.representatives[..n].iter().copied()),
            );
            return Ok((Some(witness), stats));
        }
    }
    Ok((None, stats))
}

struct MultisetSearch<'a> {
    classes: &'a [ProfileClass],
    weights: &'a WeightSet,
    picks: Vec<usize>,
    sums: Vec<usize>,
    /// Number of picks with an `Over` entry, per constraint.
    over: Vec<usize>,
    examined: u64,
}

impl MultisetSearch<'_> {
    /// Distributes `remaining` picks over classes `from..`; leaves `picks`
    /// holding the first feasible multiset on success.
    fn run(&mut self, from: usize, remaining: usize) -> bool {
        if from == self.classes.len() {
            if remaining > 0 {
                return false;
            }
            self.examined += 1;
            return self.feasible();
        }
        let cap = self.classes[from].count().min(remaining);
        for take in (0..=cap).rev() {
            self.apply(from, take, true);
            let ok = !self.dead() && self.run(from + 1, remaining - take);
            if ok {
                return true;
            }
            self.apply(from, take, false);
        }
        false
    }

    fn apply(&mut self, class: usize, take: usize, add: bool) {
        self.picks[class] = if add { take } else { 0 };
        if take == 0 {
            return;
        }
        for (i, occ) in self.classes[class].profile.iter().enumerate() {
            match (occ, add) {
                (Occurrence::Count(c), true) => self.sums[i] += c * take,
                (Occurrence::Count(c), false) => self.sums[i] -= c * take,
                (Occurrence::Over, true) => self.over[i] += take,
                (Occurrence::Over, false) => self.over[i] -= take,
            }
        }
    }

    /// Sums only grow, so a finite `E` is already violated once a sum
    /// passes `max E` or an over-cap pick appears.
    fn dead(&self) -> bool {
        if self.weights.kind() != WeightKind::Finite {
            return false;
        }
        let max = self.weights.max_member();
        self.sums.iter().zip(&self.over).any(|(&s, &o)| o > 0 || max.is_none_or(|m| s > m))
    }

    fn feasible(&self) -> bool {
        self.sums.iter().zip(&self.over).all(|(&s, &o)| {
            if o > 0 {
                // Over only arises below e(I): h is max E or the largest gap
                self.weights.kind() == WeightKind::Cofinite
            } else {
                self.weights.contains(s)
            }
        })
    }
}

/// The `(k, t)` variant: with `0 not in E`, every constraint needs a chosen
/// variable, and `k` variables cover at most `t * k` constraints.
pub fn solve_w_kt(inst: &Instance) -> Result<Option<Assignment>> {
    solve_w_kt_with_stats(inst).map(|(d, _)| d)
}

pub fn solve_w_kt_with_stats(inst: &Instance) -> Result<(Option<Assignment>, FptStats)> {
    let weights = shared_weights(inst).map_err(|e| Error::NotApplicable(e.to_string()))?;
    if weights.as_ref().is_some_and(|w| w.contains(0)) {
        return Err(Error::Usage("0 is a permitted weight; the (k, t) bound does not apply".into()));
    }
    if inst.body().len() > inst.param_t() * inst.weight().k {
        return Ok((None, FptStats::default()));
    }
    solve_w_kue_with_stats(inst)
}

/// Upper bound on [`FptStats::multisets`]: multisets of size `k` over
/// `classes` kinds, summed over the admissible weights.
pub fn multiset_bound(classes: usize, k: usize, at_most: bool) -> u128 {
    let one = |k: usize| {
        if classes == 0 {
            u128::from(k == 0)
        } else {
            binomial((classes + k - 1) as u64, k as u64)
        }
    };
    if at_most {
        (0..=k).map(one).sum()
    } else {
        one(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{brute_force_solve, random_instance, Constraint, GenConfig, Profile, WeightParameter};
    use crate::relations::Relation;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn w_inst(n: usize, k: usize, ws: WeightSet, scopes: &[&[usize]]) -> Instance {
        let body = scopes
            .iter()
            .map(|s| {
                let rel = Relation::w(ws.clone(), s.len()).unwrap();
                Constraint::new(rel, s.iter().map(|&i| Var(i)).collect()).unwrap()
            })
            .collect();
        Instance::new(names(n), WeightParameter::exact(k), body).unwrap()
    }

    #[test]
    fn h_examples() {
        let i = w_inst(2, 1, WeightSet::finite([1]), &[&[0, 0, 0, 0, 0, 1]]);
        assert_eq!(i.param_e(), 5);
        assert_eq!(compute_h(&i, &WeightSet::finite([1])).unwrap(), 1);

        let i = w_inst(2, 1, WeightSet::positive(), &[&[0, 0, 0, 1]]);
        assert_eq!(compute_h(&i, &WeightSet::positive()).unwrap(), 0);

        let i = w_inst(2, 1, WeightSet::even(), &[&[0, 0, 1]]);
        assert_eq!(compute_h(&i, &WeightSet::even()).unwrap(), 2);
    }

    #[test]
    fn mixed_weights_rejected() {
        let mut i = w_inst(2, 1, WeightSet::even(), &[&[0, 1]]);
        let odd = Constraint::new(Relation::w(WeightSet::odd(), 1).unwrap(), vec![Var(0)]).unwrap();
        i = i.with_body(vec![i.body()[0].clone(), odd]).unwrap();
        assert!(matches!(compute_h(&i, &WeightSet::even()), Err(Error::Usage(_))));
        assert!(matches!(solve_w_kue(&i), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn solve_examples() {
        let i = w_inst(3, 1, WeightSet::finite([1]), &[&[0, 1, 2]]);
        let d = solve_w_kue(&i).unwrap().unwrap();
        assert_eq!(d.len(), 1);
        assert!(i.satisfies(&d).unwrap());

        let i = w_inst(2, 1, WeightSet::positive(), &[&[0, 1]]);
        assert_eq!(solve_w_kue(&i).unwrap(), Some(Assignment::new([Var(0)])));
    }

    #[test]
    fn kt_pruning() {
        let scopes: Vec<Vec<usize>> = (0..10).map(|i| vec![i]).collect();
        let refs: Vec<&[usize]> = scopes.iter().map(Vec::as_slice).collect();
        let i = w_inst(10, 2, WeightSet::finite([1]), &refs);
        assert_eq!(i.param_t(), 1);
        let (d, stats) = solve_w_kt_with_stats(&i).unwrap();
        assert_eq!(d, None);
        assert_eq!(stats.multisets, 0);

        let i = w_inst(3, 1, WeightSet::even(), &[&[0, 1]]);
        assert!(matches!(solve_w_kt(&i), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_body() {
        let i = Instance::new(names(3), WeightParameter::exact(2), vec![]).unwrap();
        assert_eq!(solve_w_kt(&i).unwrap().map(|d| d.len()), Some(2));
        let i = Instance::new(names(3), WeightParameter::exact(4), vec![]).unwrap();
        assert_eq!(solve_w_kt(&i).unwrap(), None);
        let i = Instance::new(names(0), WeightParameter::exact(0), vec![]).unwrap();
        assert_eq!(solve_w_kue(&i).unwrap(), Some(Assignment::default()));
    }

    #[test]
    fn odd_with_small_t_matches_oracle() {
        for seed in 0..300u64 {
            let mut cfg = GenConfig::new(4 + seed as usize % 8, 1 + seed as usize % 3, Profile::Parity);
            cfg.profile = Profile::FixedW(WeightSet::odd());
            let i = random_instance(seed, &cfg).unwrap();
            if i.param_t() > 3 {
                continue;
            }
            assert_eq!(solve_w_kt(&i).unwrap().is_some(), brute_force_solve(&i).is_some(), "seed {seed}");
        }
    }

    #[test]
    fn class_exchange_invariance() {
        // swapping two variables with identical profiles keeps the decision
        for seed in 0..200u64 {
            let cfg = GenConfig::new(8, 2, Profile::SharedW(WeightKind::Finite));
            let i = random_instance(seed, &cfg).unwrap();
            let h = compute_h(&i, &shared_weights(&i).unwrap().unwrap_or_else(WeightSet::even)).unwrap();
            let classes = profile_classes(&i, h);
            let Some(class) = classes.iter().find(|c| c.count() >= 2) else { continue };
            let (a, b) = (class.representatives[0], class.representatives[1]);
            let swap = |v: Var| if v == a { b } else if v == b { a } else { v };
            let body = i
                .body()
                .iter()
                .map(|c| Constraint::new(c.relation().clone(), c.scope().iter().map(|&v| swap(v)).collect()).unwrap())
                .collect();
            let j = i.with_body(body).unwrap();
            assert_eq!(solve_w_kue(&i).unwrap().is_some(), solve_w_kue(&j).unwrap().is_some());
        }
    }

    #[test]
    fn work_is_independent_of_n() {
        // one constraint over the first three variables, the rest untouched
        let mut seen = None;
        for n in [10usize, 40, 160] {
            let i = w_inst(n, 3, WeightSet::finite([4]), &[&[0, 1, 2]]);
            let (d, stats) = solve_w_kue_with_stats(&i).unwrap();
            assert!(d.is_none());
            assert!(stats.classes as u128 <= 3u128.pow(1));
            assert!(u128::from(stats.multisets) <= multiset_bound(stats.classes, 3, false));
            match seen {
                None => seen = Some(stats),
                Some(s) => assert_eq!(s, stats),
            }
        }
    }
}
