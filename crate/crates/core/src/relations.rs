//! Weight sets, the three relation families, and the membership cost model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::PosSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Finite,
    Cofinite,
    Even,
    Odd,
}

/// A set of permitted tuple weights.
///
/// `values` lists the members for [`WeightKind::Finite`], the excluded
/// weights for [`WeightKind::Cofinite`], and is empty for the parity kinds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightSet {
    kind: WeightKind,
    values: Vec<usize>,
}

impl WeightSet {
    pub fn new(kind: WeightKind, values: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut values: Vec<usize> = values.into_iter().collect();
        values.sort_unstable();
        values.dedup();
        if matches!(kind, WeightKind::Even | WeightKind::Odd) && !values.is_empty() {
            return Err(Error::Domain(format!(
                "{kind:?} weight sets carry no values"
            )));
        }
        Ok(WeightSet { kind, values })
    }

    pub fn finite(values: impl IntoIterator<Item = usize>) -> Self {
        Self::new(WeightKind::Finite, values).expect("finite sets take any values")
    }

    /// All weights except `excluded`.
    pub fn cofinite(excluded: impl IntoIterator<Item = usize>) -> Self {
        Self::new(WeightKind::Cofinite, excluded).expect("cofinite sets take any values")
    }

    pub fn even() -> Self {
        WeightSet { kind: WeightKind::Even, values: Vec::new() }
    }

    pub fn odd() -> Self {
        WeightSet { kind: WeightKind::Odd, values: Vec::new() }
    }

    /// The positive integers, i.e. disjunction when used in `W`.
    pub fn positive() -> Self {
        Self::cofinite([0])
    }

    /// `[b] = {1, ..., b}`; empty for `b = 0`.
    pub fn initial_segment(b: usize) -> Self {
        Self::finite(1..=b)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn contains(&self, w: usize) -> bool {
        match self.kind {
            WeightKind::Finite => self.values.binary_search(&w).is_ok(),
            WeightKind::Cofinite => self.values.binary_search(&w).is_err(),
            WeightKind::Even => w % 2 == 0,
            WeightKind::Odd => w % 2 == 1,
        }
    }

    /// Largest member, if the set is finite and nonempty.
    pub fn max_member(&self) -> Option<usize> {
        match self.kind {
            WeightKind::Finite => self.values.last().copied(),
            _ => None,
        }
    }

    /// Largest excluded weight, if the complement is finite and nonempty.
    pub fn max_excluded(&self) -> Option<usize> {
        match self.kind {
            WeightKind::Cofinite => self.values.last().copied(),
            _ => None,
        }
    }

    /// Largest member not exceeding `bound`.
    pub fn max_member_up_to(&self, bound: usize) -> Option<usize> {
        (0..=bound).rev().find(|&w| self.contains(w))
    }

    /// `Some(b)` iff this is exactly `[b]`.
    pub fn as_initial_segment(&self) -> Option<usize> {
        if self.kind != WeightKind::Finite {
            return None;
        }
        let b = self.values.len();
        self.values.iter().copied().eq(1..=b).then_some(b)
    }
}

/// The shape of a relation; see [`Relation`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelationKind {
    /// `W^A_m`: all subsets of `[m]` whose size lies in `A`.
    W { weights: WeightSet, arity: usize },
    /// `CW^A_{d,m}`: if the whole head `[d]` is selected, the number of
    /// selected tail positions `[d+1, d+m]` must lie in `A`.
    CW { weights: WeightSet, head: usize, tail: usize },
    /// An explicitly listed relation, members kept sorted.
    Explicit { arity: usize, members: Vec<PosSet> },
}

/// A Boolean relation together with its index in the constraint language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    kind: RelationKind,
    index: u64,
}

impl Relation {
    pub fn w(weights: WeightSet, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Domain("W relation needs arity >= 1".into()));
        }
        Ok(Relation { kind: RelationKind::W { weights, arity }, index: 1 })
    }

    pub fn cw(weights: WeightSet, head: usize, tail: usize) -> Result<Self> {
        if head + tail == 0 {
            return Err(Error::Domain("CW relation needs d + m >= 1".into()));
        }
        Ok(Relation { kind: RelationKind::CW { weights, head, tail }, index: 1 })
    }

    pub fn explicit(arity: usize, members: impl IntoIterator<Item = PosSet>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Domain("explicit relation needs arity >= 1".into()));
        }
        let mut members: Vec<PosSet> = members.into_iter().collect();
        for m in &members {
            if let Some(p) = m.iter().find(|&p| p == 0 || p > arity) {
                return Err(Error::Domain(format!(
                    "member {m} has position {p} outside [1, {arity}]"
                )));
            }
        }
        members.sort();
        members.dedup();
        Ok(Relation { kind: RelationKind::Explicit { arity, members }, index: 1 })
    }

    pub fn with_index(mut self, index: u64) -> Result<Self> {
        if index == 0 {
            return Err(Error::Domain("relation index must be positive".into()));
        }
        self.index = index;
        Ok(self)
    }

    pub fn kind(&self) -> &RelationKind {
        &self.kind
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            RelationKind::W { arity, .. } | RelationKind::Explicit { arity, .. } => *arity,
            RelationKind::CW { head, tail, .. } => head + tail,
        }
    }

    /// Weight set of a `W` or `CW` relation.
    pub fn weights(&self) -> Option<&WeightSet> {
        match &self.kind {
            RelationKind::W { weights, .. } | RelationKind::CW { weights, .. } => Some(weights),
            RelationKind::Explicit { .. } => None,
        }
    }

    /// Membership of the tuple whose 1-positions are `t`.
    pub fn contains(&self, t: &PosSet) -> Result<bool> {
        let arity = self.arity();
        if let Some(p) = t.iter().find(|&p| p == 0 || p > arity) {
            return Err(Error::Domain(format!(
                "position {p} outside [1, {arity}]"
            )));
        }
        Ok(self.contains_unchecked(t))
    }

    /// Membership without the range check; positions must lie in `[arity]`.
    pub fn contains_unchecked(&self, t: &PosSet) -> bool {
        match &self.kind {
            RelationKind::W { weights, .. } => weights.contains(t.len()),
            RelationKind::CW { weights, head, tail } => {
                let head_full = t.count_in(1, *head) == *head;
                !head_full || weights.contains(t.count_in(head + 1, head + tail))
            }
            RelationKind::Explicit { members, .. } => members.binary_search(t).is_ok(),
        }
    }

    pub fn contains_empty(&self) -> bool {
        self.contains_unchecked(&PosSet::empty())
    }

    /// Size of the largest member, `None` if the relation is empty.
    pub fn max_member_size(&self) -> Option<usize> {
        match &self.kind {
            RelationKind::W { weights, arity } => weights.max_member_up_to(*arity),
            RelationKind::CW { weights, head, tail } => {
                let partial_head = (*head >= 1).then(|| head - 1 + tail);
                let full_head = weights.max_member_up_to(*tail).map(|w| head + w);
                partial_head.max(full_head)
            }
            RelationKind::Explicit { members, .. } => members.iter().map(PosSet::len).max(),
        }
    }

    /// Every member with at most `max_size` elements, in canonical order.
    ///
    /// Explicit relations answer from their member list; `W` and `CW`
    /// relations are enumerated and refused above `arity_limit`.
    pub fn members_up_to(&self, max_size: usize, arity_limit: usize) -> Result<Vec<PosSet>> {
        if let RelationKind::Explicit { members, .. } = &self.kind {
            return Ok(members.iter().filter(|m| m.len() <= max_size).cloned().collect());
        }
        let arity = self.arity();
        if arity > arity_limit {
            return Err(Error::Capacity(format!(
                "arity {arity} exceeds the enumeration bound {arity_limit}"
            )));
        }
        let mut out = Vec::new();
        crate::subset::walk_lex(arity, max_size, |idx| {
            let t = PosSet::new(idx.iter().map(|i| i + 1));
            if self.contains_unchecked(&t) {
                out.push(t);
            }
            crate::subset::Walk::Descend
        });
        out.sort();
        Ok(out)
    }

    /// The same relation as an explicit member list.
    pub fn to_explicit(&self, arity_limit: usize) -> Result<Relation> {
        let members = self.members_up_to(self.arity(), arity_limit)?;
        Relation::explicit(self.arity(), members)?.with_index(self.index)
    }
}

/// Step cost of a membership query: `f_B(|T|) * ceil(log2(index + 1))^c`
/// with the affine checker cost `f_B(w) = slope * w + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostModel {
    pub exponent: u32,
    pub slope: u64,
    pub offset: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { exponent: 1, slope: 1, offset: 1 }
    }
}

impl CostModel {
    pub fn checker_cost(&self, weight: usize) -> u64 {
        self.slope.saturating_mul(weight as u64).saturating_add(self.offset)
    }

    pub fn index_factor(&self, index: u64) -> u64 {
        ceil_log2(index.saturating_add(1)).saturating_pow(self.exponent)
    }

    pub fn cost_at(&self, weight: usize, index: u64) -> u64 {
        self.checker_cost(weight).saturating_mul(self.index_factor(index))
    }

    pub fn membership_cost(&self, rel: &Relation, t: &PosSet) -> u64 {
        self.cost_at(t.len(), rel.index())
    }
}

fn ceil_log2(x: u64) -> u64 {
    match x {
        0 | 1 => 0,
        _ => u64::from(64 - (x - 1).leading_zeros()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(v: &[usize]) -> PosSet {
        PosSet::new(v.iter().copied())
    }

    #[test]
    fn weightset_examples() {
        assert!(WeightSet::even().contains(0));
        assert!(!WeightSet::finite([1]).contains(2));
        assert!(WeightSet::positive().contains(5));
        assert!(!WeightSet::positive().contains(0));
        assert!(WeightSet::odd().contains(3));
        assert!(WeightSet::new(WeightKind::Even, [2]).is_err());
    }

    #[test]
    fn initial_segments() {
        assert_eq!(WeightSet::initial_segment(3).as_initial_segment(), Some(3));
        assert_eq!(WeightSet::initial_segment(0).as_initial_segment(), Some(0));
        assert_eq!(WeightSet::finite([2]).as_initial_segment(), None);
        assert_eq!(WeightSet::positive().as_initial_segment(), None);
    }

    #[test]
    fn membership_examples() {
        let w1 = Relation::w(WeightSet::finite([1]), 3).unwrap();
        assert!(w1.contains(&ps(&[2])).unwrap());

        let cw = Relation::cw(WeightSet::initial_segment(1), 2, 3).unwrap();
        assert!(cw.contains(&ps(&[1, 2, 4])).unwrap());
        assert!(cw.contains(&ps(&[1, 4, 5])).unwrap());
        assert!(!cw.contains(&ps(&[1, 2, 4, 5])).unwrap());
        assert!(!cw.contains(&ps(&[1, 2])).unwrap());

        // Nand
        let nand = Relation::cw(WeightSet::finite([1]), 2, 0).unwrap();
        assert!(!nand.contains(&ps(&[1, 2])).unwrap());
        assert!(nand.contains(&ps(&[2])).unwrap());
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let w = Relation::w(WeightSet::even(), 2).unwrap();
        assert!(matches!(w.contains(&ps(&[3])), Err(Error::Domain(_))));
        assert!(matches!(w.contains(&ps(&[0])), Err(Error::Domain(_))));
        assert!(Relation::explicit(2, [ps(&[3])]).is_err());
        assert!(Relation::w(WeightSet::even(), 0).is_err());
        assert!(Relation::cw(WeightSet::even(), 0, 0).is_err());
    }

    #[test]
    fn cost_examples() {
        let rel = Relation::w(WeightSet::even(), 4).unwrap();
        let c0 = CostModel { exponent: 0, ..CostModel::default() };
        assert_eq!(c0.membership_cost(&rel, &PosSet::empty()), c0.checker_cost(0));

        let c1 = CostModel::default();
        assert_eq!(c1.membership_cost(&rel, &ps(&[1, 2])), c1.checker_cost(2));

        let c2 = CostModel { exponent: 2, ..CostModel::default() };
        let rel7 = rel.clone().with_index(7).unwrap();
        assert_eq!(c2.membership_cost(&rel7, &ps(&[1, 2, 3])), c2.checker_cost(3) * 9);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn max_member_sizes() {
        assert_eq!(Relation::w(WeightSet::finite([1, 9]), 4).unwrap().max_member_size(), Some(1));
        assert_eq!(Relation::w(WeightSet::finite([]), 4).unwrap().max_member_size(), None);
        let cw = Relation::cw(WeightSet::initial_segment(1), 2, 3).unwrap();
        // head partially selected: one head position plus the whole tail
        assert_eq!(cw.max_member_size(), Some(4));
        for rel in [
            cw,
            Relation::cw(WeightSet::odd(), 1, 4).unwrap(),
            Relation::cw(WeightSet::finite([0]), 3, 0).unwrap(),
            Relation::w(WeightSet::cofinite([2]), 3).unwrap(),
        ] {
            let brute = rel.members_up_to(rel.arity(), 16).unwrap().iter().map(PosSet::len).max();
            assert_eq!(rel.max_member_size(), brute, "{rel:?}");
        }
    }

    fn weightset_strategy() -> impl Strategy<Value = WeightSet> {
        prop_oneof![
            proptest::collection::vec(0usize..6, 0..4).prop_map(WeightSet::finite),
            proptest::collection::vec(0usize..6, 0..4).prop_map(WeightSet::cofinite),
            Just(WeightSet::even()),
            Just(WeightSet::odd()),
        ]
    }

    fn subset_of(arity: usize) -> impl Strategy<Value = PosSet> {
        proptest::collection::vec(1..=arity, 0..=arity).prop_map(PosSet::new)
    }

    proptest! {
        #[test]
        fn finite_and_cofinite_are_complements(vals in proptest::collection::vec(0usize..10, 0..5), w in 0usize..20) {
            let f = WeightSet::finite(vals.clone());
            let c = WeightSet::cofinite(vals);
            prop_assert!(f.contains(w) ^ c.contains(w));
        }

        #[test]
        fn cw_with_empty_head_is_w(ws in weightset_strategy(), (m, t) in (1usize..7).prop_flat_map(|m| (Just(m), subset_of(m)))) {
            let cw = Relation::cw(ws.clone(), 0, m).unwrap();
            let w = Relation::w(ws, m).unwrap();
            prop_assert_eq!(cw.contains(&t).unwrap(), w.contains(&t).unwrap());
        }

        #[test]
        fn full_segment_is_disjunction((m, t) in (1usize..8).prop_flat_map(|m| (Just(m), subset_of(m)))) {
            let rel = Relation::w(WeightSet::initial_segment(m), m).unwrap();
            prop_assert_eq!(rel.contains(&t).unwrap(), !t.is_empty());
        }

        #[test]
        fn explicit_matches_linear_scan(
            (q, members, t) in (1usize..7).prop_flat_map(|q| (Just(q), proptest::collection::vec(subset_of(q), 0..8), subset_of(q)))
        ) {
            let rel = Relation::explicit(q, members.clone()).unwrap();
            prop_assert_eq!(rel.contains(&t).unwrap(), members.iter().any(|m| *m == t));
        }

        #[test]
        fn cost_is_monotone_in_weight(c in 0u32..4, idx in 1u64..1000, w in 0usize..50) {
            let cm = CostModel { exponent: c, ..CostModel::default() };
            prop_assert!(cm.cost_at(w, idx) <= cm.cost_at(w + 1, idx));
        }
    }
}
