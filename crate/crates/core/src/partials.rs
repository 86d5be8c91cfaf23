//! Completions and partial sets of a relation.
//!
//! A completion of a non-member `T` is a minimal member strictly above it.
//! `T` is partial when it is a non-member and every partial proper subset of
//! `T` has a completion inside `T`. Membership of any `D` is then decided by
//! looking only at the partial sets below `D`: `D` is a member iff each of
//! them has a completion below `D`.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::relations::Relation;
use crate::subset::PosSet;

/// Arity bound for the exhaustive enumerations in this module.
pub const DEFAULT_ARITY_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialsTable {
    relation: Relation,
    partials: Vec<PosSet>,
    completions: BTreeMap<PosSet, Vec<PosSet>>,
}

impl PartialsTable {
    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    /// Partial sets in canonical order.
    pub fn partials(&self) -> &[PosSet] {
        &self.partials
    }

    pub fn completions_of(&self, t: &PosSet) -> Option<&[PosSet]> {
        self.completions.get(t).map(Vec::as_slice)
    }

    /// One line per partial set: `T -> U1 U2 ...` (or `-> none`).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.partials {
            let _ = write!(out, "{t} ->");
            let comps = &self.completions[t];
            if comps.is_empty() {
                out.push_str(" none");
            }
            for u in comps {
                let _ = write!(out, " {u}");
            }
            out.push('\n');
        }
        out
    }
}

fn member_masks(rel: &Relation, limit: usize) -> Result<Vec<u64>> {
    let arity = rel.arity();
    if arity > limit.min(63) {
        return Err(Error::Capacity(format!(
            "arity {arity} exceeds the partial-set bound {}",
            limit.min(63)
        )));
    }
    Ok(rel
        .members_up_to(arity, limit)?
        .iter()
        .map(|m| m.to_mask().expect("positions within arity"))
        .collect())
}

/// Minimal elements among `candidates` (bit masks), sorted canonically.
fn minimal_supersets(t: u64, members: &[u64]) -> Vec<u64> {
    let above: Vec<u64> = members.iter().copied().filter(|&u| u & t == t && u != t).collect();
    let mut minimal: Vec<u64> = above
        .iter()
        .copied()
        .filter(|&u| !above.iter().any(|&v| v != u && v & u == v))
        .collect();
    minimal.sort_by_key(|&m| PosSet::from_mask(m));
    minimal
}

/// The completions of `t`, in canonical order; empty if there are none.
pub fn completions(rel: &Relation, t: &PosSet) -> Result<Vec<PosSet>> {
    if rel.contains(t)? {
        return Err(Error::Usage(format!("{t} is a member; completions are defined for non-members")));
    }
    let members = member_masks(rel, DEFAULT_ARITY_LIMIT)?;
    let t = t.to_mask().expect("checked range");
    Ok(minimal_supersets(t, &members).into_iter().map(PosSet::from_mask).collect())
}

pub fn compute_partials(rel: &Relation) -> Result<PartialsTable> {
    compute_partials_with_limit(rel, DEFAULT_ARITY_LIMIT)
}

/// Classifies every subset of `[arity]` in order of increasing size.
pub fn compute_partials_with_limit(rel: &Relation, limit: usize) -> Result<PartialsTable> {
    let members = member_masks(rel, limit)?;
    let member_set: HashSet<u64> = members.iter().copied().collect();
    let q = rel.arity();

    let mut by_size: Vec<u64> = (0..1u64 << q).collect();
    by_size.sort_by_key(|m| m.count_ones());

    // (partial, its completions)
    let mut found: Vec<(u64, Vec<u64>)> = Vec::new();
    for t in by_size {
        if member_set.contains(&t) {
            continue;
        }
        let is_partial = found
            .iter()
            .filter(|(p, _)| *p & t == *p && *p != t)
            .all(|(_, comps)| comps.iter().any(|&u| u & t == u));
        if is_partial {
            found.push((t, minimal_supersets(t, &members)));
        }
    }

    let mut completions = BTreeMap::new();
    for (t, comps) in found {
        completions.insert(
            PosSet::from_mask(t),
            comps.into_iter().map(PosSet::from_mask).collect(),
        );
    }
    let partials = completions.keys().cloned().collect();
    Ok(PartialsTable { relation: rel.clone(), partials, completions })
}

/// Membership of `d` decided from the partial sets below it.
pub fn characterize_membership(table: &PartialsTable, d: &PosSet) -> bool {
    table.partials.iter().filter(|t| t.is_subset(d)).all(|t| {
        table.completions[t].iter().any(|u| u.is_subset(d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::WeightSet;
    use crate::subset::lex_subsets;
    use proptest::prelude::*;

    fn ps(v: &[usize]) -> PosSet {
        PosSet::new(v.iter().copied())
    }

    fn all_subsets(q: usize) -> Vec<PosSet> {
        lex_subsets(q, 0, q).into_iter().map(|s| PosSet::new(s.into_iter().map(|i| i + 1))).collect()
    }

    /// Minimal supersets straight from the definition.
    fn brute_completions(rel: &Relation, t: &PosSet) -> Vec<PosSet> {
        let q = rel.arity();
        let members: Vec<PosSet> = all_subsets(q)
            .into_iter()
            .filter(|u| rel.contains(u).unwrap() && t.is_subset(u) && u != t)
            .collect();
        let mut out: Vec<PosSet> = members
            .iter()
            .filter(|u| !members.iter().any(|v| v != *u && v.is_subset(u)))
            .cloned()
            .collect();
        out.sort();
        out
    }

    /// Partial sets straight from the recursive definition.
    fn brute_partials(rel: &Relation) -> Vec<PosSet> {
        let mut subsets = all_subsets(rel.arity());
        subsets.sort_by_key(PosSet::len);
        let mut partial: Vec<PosSet> = Vec::new();
        for t in subsets {
            if rel.contains(&t).unwrap() {
                continue;
            }
            let ok = partial.iter().filter(|p| p.is_subset(&t) && **p != t).all(|p| {
                brute_completions(rel, p).iter().any(|u| u.is_subset(&t))
            });
            if ok {
                partial.push(t);
            }
        }
        partial.sort();
        partial
    }

    #[test]
    fn completion_examples() {
        let odd3 = Relation::w(WeightSet::odd(), 3).unwrap();
        assert_eq!(completions(&odd3, &ps(&[])).unwrap(), vec![ps(&[1]), ps(&[2]), ps(&[3])]);
        assert_eq!(completions(&odd3, &ps(&[1, 2])).unwrap(), brute_completions(&odd3, &ps(&[1, 2])));
        assert_eq!(completions(&odd3, &ps(&[1, 2])).unwrap(), vec![ps(&[1, 2, 3])]);
        assert!(matches!(completions(&odd3, &ps(&[1])), Err(Error::Usage(_))));

        let ex = Relation::explicit(4, [ps(&[1]), ps(&[2, 3])]).unwrap();
        assert!(completions(&ex, &ps(&[4])).unwrap().is_empty());
    }

    #[test]
    fn partials_examples() {
        let even2 = Relation::w(WeightSet::even(), 2).unwrap();
        let table = compute_partials(&even2).unwrap();
        assert!(!table.partials().contains(&PosSet::empty()));

        let odd3 = Relation::w(WeightSet::odd(), 3).unwrap();
        let table = compute_partials(&odd3).unwrap();
        assert_eq!(table.partials(), brute_partials(&odd3).as_slice());
        for t in [ps(&[]), ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])] {
            assert!(table.partials().contains(&t), "{t}");
        }
        assert_eq!(table.completions_of(&ps(&[1, 2])).unwrap(), &[ps(&[1, 2, 3])]);
        assert!(!characterize_membership(&table, &ps(&[1, 2])));
    }

    #[test]
    fn empty_partial_when_empty_is_not_a_member() {
        let r = Relation::w(WeightSet::finite([1]), 3).unwrap();
        let table = compute_partials(&r).unwrap();
        assert_eq!(table.partials()[0], PosSet::empty());
        // no partial sets below D = {} when {} is a member
        let e = Relation::w(WeightSet::finite([0, 2]), 3).unwrap();
        let table = compute_partials(&e).unwrap();
        assert!(characterize_membership(&table, &PosSet::empty()));
    }

    #[test]
    fn capacity_error() {
        let big = Relation::w(WeightSet::even(), 40).unwrap();
        assert!(matches!(compute_partials(&big), Err(Error::Capacity(_))));
    }

    #[test]
    fn render_is_canonical() {
        let odd3 = Relation::w(WeightSet::odd(), 3).unwrap();
        let text = compute_partials(&odd3).unwrap().render();
        assert!(text.starts_with("{} -> {1} {2} {3}\n"));
        assert!(text.contains("{1,2} -> {1,2,3}\n"));
    }

    fn explicit_strategy(max_q: usize, max_member: usize) -> impl Strategy<Value = Relation> {
        (1..=max_q).prop_flat_map(move |q| {
            let member = proptest::collection::vec(1..=q, 0..=max_member.min(q)).prop_map(PosSet::new);
            proptest::collection::vec(member, 0..6).prop_map(move |ms| Relation::explicit(q, ms).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn table_matches_definition(rel in explicit_strategy(6, 3)) {
            let table = compute_partials(&rel).unwrap();
            let expected = brute_partials(&rel);
            prop_assert_eq!(table.partials(), expected.as_slice());
            for t in table.partials() {
                prop_assert!(!rel.contains(t).unwrap());
                let expected = brute_completions(&rel, t);
                prop_assert_eq!(table.completions_of(t).unwrap(), expected.as_slice());
            }
        }

        #[test]
        fn characterization_is_sound(rel in explicit_strategy(8, 4)) {
            let table = compute_partials(&rel).unwrap();
            for d in all_subsets(rel.arity()) {
                prop_assert_eq!(characterize_membership(&table, &d), rel.contains(&d).unwrap());
            }
        }

        #[test]
        fn completions_respect_member_size(rel in explicit_strategy(7, 3)) {
            let table = compute_partials(&rel).unwrap();
            let d = rel.max_member_size().unwrap_or(0);
            for t in table.partials() {
                let comps = table.completions_of(t).unwrap();
                prop_assert!(comps.iter().all(|u| u.len() <= d));
                if t.len() >= d {
                    prop_assert!(comps.is_empty());
                }
            }
        }

        #[test]
        fn members_above_nonmembers_contain_a_completion(rel in explicit_strategy(6, 4)) {
            let subsets = all_subsets(rel.arity());
            for w in subsets.iter().filter(|w| rel.contains(w).unwrap()) {
                for t in subsets.iter().filter(|t| t.is_subset(w) && *t != w && !rel.contains(t).unwrap()) {
                    let comps = completions(&rel, t).unwrap();
                    prop_assert!(comps.iter().any(|u| u.is_subset(w)));
                }
            }
        }

        #[test]
        fn minimal_nonmembers_are_partial(rel in explicit_strategy(6, 3)) {
            let table = compute_partials(&rel).unwrap();
            let subsets = all_subsets(rel.arity());
            for t in subsets.iter().filter(|t| !rel.contains(t).unwrap()) {
                let minimal = !subsets.iter().any(|s| s.is_subset(t) && s != t && !rel.contains(s).unwrap());
                if minimal {
                    prop_assert!(table.partials().contains(t));
                }
            }
        }
    }

    #[test]
    fn small_weight_relations_characterized() {
        for ws in [WeightSet::odd(), WeightSet::even(), WeightSet::finite([1]), WeightSet::finite([0, 2]), WeightSet::positive()] {
            for m in 1..=5 {
                let rel = Relation::w(ws.clone(), m).unwrap();
                let table = compute_partials(&rel).unwrap();
                for d in all_subsets(m) {
                    assert_eq!(characterize_membership(&table, &d), rel.contains(&d).unwrap());
                }
            }
        }
        for (h, t) in [(1, 2), (2, 1), (2, 2), (0, 3)] {
            let rel = Relation::cw(WeightSet::initial_segment(1), h, t).unwrap();
            let table = compute_partials(&rel).unwrap();
            for d in all_subsets(h + t) {
                assert_eq!(characterize_membership(&table, &d), rel.contains(&d).unwrap());
            }
        }
    }
}
