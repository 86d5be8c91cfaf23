use std::collections::BTreeMap;

use super::{Checker, GuessCheckMachine};
use crate::error::{Error, Result};
use crate::instances::{Constraint, Instance, Var};
use crate::relations::RelationKind;
use crate::subset::{binomial, for_each_subset, sorted_subset};

/// `|Δ_{B,G}|` and `Λ_{B,G}` for one stored key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CwEntry {
    pub delta: usize,
    pub lambda: usize,
}

/// The lookup tables of the `CW^{[b]}` machine, keyed by head set `B` and
/// then by guard set `G`, both as sorted universe indices. Keys that are not
/// stored read as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CwTables {
    num_vars: usize,
    b: usize,
    k0: usize,
    heads: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, CwEntry>>,
    heads_by_max: Vec<Vec<Vec<usize>>>,
    bad_by_max: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
    singles: BTreeMap<Vec<usize>, (Vec<usize>, Vec<usize>)>,
}

type Key = (Vec<usize>, Vec<usize>);

impl CwTables {
    /// Builds tables from stored entries, checking the key bounds.
    pub fn from_entries(
        num_vars: usize,
        b: usize,
        k0: usize,
        entries: impl IntoIterator<Item = (Key, CwEntry)>,
    ) -> Result<Self> {
        let guard_cap = (b + 1).min(k0);
        let mut heads: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, CwEntry>> = BTreeMap::new();
        for ((head, guard), entry) in entries {
            for (name, key, cap) in [("head", &head, k0), ("guard", &guard, guard_cap)] {
                if key.len() > cap {
                    return Err(Error::Capacity(format!("{name} key of length {} exceeds {cap}", key.len())));
                }
                if key.windows(2).any(|w| w[0] >= w[1]) || key.iter().any(|&v| v >= num_vars) {
                    return Err(Error::Usage(format!("{name} key {key:?} is not a sorted subset of the universe")));
                }
            }
            if guard.is_empty() && entry.lambda != 0 {
                return Err(Error::Usage(format!("head {head:?}: the empty guard must have lambda 0")));
            }
            if heads.entry(head).or_default().insert(guard, entry).is_some() {
                return Err(Error::Usage("duplicate table key".into()));
            }
        }
        if let Some((h, _)) = heads.iter().find(|(_, g)| !g.contains_key(&Vec::new())) {
            return Err(Error::Usage(format!("head {h:?} has no entry for the empty guard")));
        }

        let mut heads_by_max = vec![Vec::new(); num_vars];
        let mut bad_by_max = vec![Vec::new(); num_vars];
        let mut singles = BTreeMap::new();
        for (head, guards) in &heads {
            if let Some(&m) = head.last() {
                heads_by_max[m].push(head.clone());
            }
            let mut vs = Vec::new();
            let mut ds = Vec::new();
            for (guard, e) in guards {
                if e.lambda > b {
                    let m = head.iter().chain(guard).max().copied().expect("bad entries have a nonempty guard");
                    bad_by_max[m].push((head.clone(), guard.clone()));
                }
                if guard.len() == 1 {
                    vs.push(guard[0]);
                    ds.push(e.delta);
                }
            }
            let mut suffix = vec![0usize; ds.len() + 1];
            for i in (0..ds.len()).rev() {
                suffix[i] = suffix[i + 1] + ds[i];
            }
            singles.insert(head.clone(), (vs, suffix));
        }
        Ok(CwTables { num_vars, b, k0, heads, heads_by_max, bad_by_max, singles })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn guess_bound(&self) -> usize {
        self.k0
    }

    /// Stored value for `(B, G)`, zero when not stored.
    pub fn lookup(&self, head: &[usize], guard: &[usize]) -> CwEntry {
        self.heads
            .get(head)
            .and_then(|g| g.get(guard))
            .copied()
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], &[usize], CwEntry)> + '_ {
        self.heads
            .iter()
            .flat_map(|(h, gs)| gs.iter().map(move |(g, e)| (h.as_slice(), g.as_slice(), *e)))
    }

    pub fn len(&self) -> usize {
        self.heads.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Stored heads contained in the sorted set `a`.
    fn heads_within<'a>(&'a self, a: &'a [usize]) -> impl Iterator<Item = &'a Vec<usize>> + 'a {
        let empty = self.heads.get_key_value(&Vec::new()).map(|(k, _)| k);
        empty.into_iter().chain(
            a.iter()
                .flat_map(|&v| &self.heads_by_max[v])
                .filter(move |h| sorted_subset(h, a)),
        )
    }

    fn violates_lambda(&self, a: &[usize]) -> bool {
        a.iter()
            .flat_map(|&v| &self.bad_by_max[v])
            .any(|(h, g)| sorted_subset(h, a) && sorted_subset(g, a))
    }

    /// Alternating sum of `|Δ_{B,G}|` over nonempty `G ⊆ a`, `|G| <= b`.
    pub fn union_size(&self, head: &[usize], a: &[usize]) -> i64 {
        let Some(guards) = self.heads.get(head) else {
            return 0;
        };
        let sign = |g: usize| if g % 2 == 1 { 1i64 } else { -1 };
        let subsets: u128 = (1..=self.b.min(a.len())).map(|j| binomial(a.len() as u64, j as u64)).sum();
        let mut sum = 0i64;
        if (guards.len() as u128) <= subsets {
            for (g, e) in guards {
                if (1..=self.b).contains(&g.len()) && sorted_subset(g, a) {
                    sum += sign(g.len()) * e.delta as i64;
                }
            }
        } else {
            for_each_subset(a, self.b, |g| {
                if let Some(e) = guards.get(g) {
                    if !g.is_empty() {
                        sum += sign(g.len()) * e.delta as i64;
                    }
                }
            });
        }
        sum
    }

    fn covers_all(&self, a: &[usize]) -> bool {
        self.heads_within(a)
            .all(|h| self.union_size(h, a) == self.lookup(h, &[]).delta as i64)
    }

    /// Steps 2 and 3 on guess `a`; each step runs to completion, so the
    /// charge depends on `|a|` and `b` only.
    pub(super) fn check(&self, a: &[usize]) -> (bool, u64) {
        let (step2, step3) = cw_step_counts(a.len(), self.b);
        if self.violates_lambda(a) {
            return (false, step2);
        }
        (self.covers_all(a), step2 + step3)
    }

    /// The same verdict as `check`, evaluated the way the machine reads its
    /// tables: every `B, G ⊆ a` is looked up.
    pub fn check_literal(&self, a: &[usize]) -> bool {
        let mut ok = true;
        for_each_subset(a, a.len(), |h| {
            for_each_subset(a, self.b + 1, |g| {
                if self.lookup(h, g).lambda > self.b {
                    ok = false;
                }
            });
        });
        if !ok {
            return false;
        }
        for_each_subset(a, a.len(), |h| {
            let mut sum = 0i64;
            for_each_subset(a, self.b, |g| {
                if !g.is_empty() {
                    let d = self.lookup(h, g).delta as i64;
                    sum += if g.len() % 2 == 1 { d } else { -d };
                }
            });
            if sum != self.lookup(h, &[]).delta as i64 {
                ok = false;
            }
        });
        ok
    }

    /// Prefix refutation: a `Λ` violation inside the prefix, or a head in
    /// the prefix whose constraints cannot all be covered even if every
    /// later element joined the guess.
    pub(super) fn refutes(&self, prefix: &[usize]) -> bool {
        if self.violates_lambda(prefix) {
            return true;
        }
        let after = prefix.last().map_or(0, |&l| l + 1);
        self.heads_within(prefix).any(|h| {
            let covered = self.union_size(h, prefix);
            let (vs, suffix) = &self.singles[h];
            let reachable = suffix[vs.partition_point(|&v| v < after)] as i64;
            covered + reachable < self.lookup(h, &[]).delta as i64
        })
    }
}

/// Steps charged for Steps 2 and 3 on a guess of size `a`. A lookup of
/// `(B, G)` costs `|B| + |G| + 1`; comparisons and additions cost 1.
pub fn cw_step_counts(a: usize, b: usize) -> (u64, u64) {
    let c = |j: usize| binomial(a as u64, j as u64);
    let mut step2: u128 = 0;
    let mut step3: u128 = 0;
    for i in 0..=a {
        for j in 0..=(b + 1).min(a) {
            step2 = step2.saturating_add(c(i).saturating_mul(c(j)).saturating_mul((i + j + 2) as u128));
        }
        for j in 1..=b.min(a) {
            step3 = step3.saturating_add(c(i).saturating_mul(c(j)).saturating_mul((i + j + 2) as u128));
        }
        step3 = step3.saturating_add(c(i).saturating_mul((i + 2) as u128));
    }
    let clamp = |x: u128| u64::try_from(x).unwrap_or(u64::MAX);
    (clamp(step2), clamp(step3))
}

/// Head and tail of a constraint read as `CW`; `W` is a `CW` with empty head.
fn cw_view(c: &Constraint) -> Option<(&[Var], &[Var])> {
    match c.relation().kind() {
        RelationKind::CW { head, .. } => Some(c.scope().split_at(*head)),
        RelationKind::W { .. } => Some(c.scope().split_at(0)),
        RelationKind::Explicit { .. } => None,
    }
}

fn sorted_set(vs: &[Var]) -> Vec<usize> {
    let mut s: Vec<usize> = vs.iter().map(|v| v.0).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// The common `b` of a body made of `CW^{[b]}` constraints (`W^{[b]}`
/// counts as a head-free one). An empty body has `b = 0`.
pub fn cw_weight_bound(inst: &Instance) -> Result<usize> {
    let mut b = None;
    for (i, c) in inst.body().iter().enumerate() {
        let seg = match c.relation().kind() {
            RelationKind::CW { weights, .. } | RelationKind::W { weights, .. } => weights.as_initial_segment(),
            RelationKind::Explicit { .. } => None,
        };
        let Some(seg) = seg else {
            return Err(Error::Usage(format!("constraint {i} is not CW with an initial-segment weight set")));
        };
        match b {
            None => b = Some(seg),
            Some(prev) if prev != seg => {
                return Err(Error::Usage(format!(
                    "constraint {i} has weight set [{seg}], earlier constraints use [{prev}]"
                )))
            }
            Some(_) => {}
        }
    }
    Ok(b.unwrap_or(0))
}

fn views(inst: &Instance) -> Result<Vec<(Vec<usize>, &[Var])>> {
    cw_weight_bound(inst)?;
    Ok(inst
        .body()
        .iter()
        .map(|c| {
            let (h, t) = cw_view(c).expect("checked by cw_weight_bound");
            (sorted_set(h), t)
        })
        .collect())
}

/// Body indices `i` whose head image is `B` and whose tail image contains `G`.
pub fn delta_set(inst: &Instance, head: &[Var], guard: &[Var]) -> Result<Vec<usize>> {
    let (head, guard) = (sorted_set(head), sorted_set(guard));
    Ok(views(inst)?
        .into_iter()
        .enumerate()
        .filter(|(_, (h, t))| *h == head && sorted_subset(&guard, &sorted_set(t)))
        .map(|(i, _)| i)
        .collect())
}

/// `Λ_{B,G}`: the largest number of tail positions mapped into `G` among
/// the constraints of `Δ_{B,G}`; 0 when `Δ_{B,G}` is empty.
pub fn lambda_value(inst: &Instance, head: &[Var], guard: &[Var]) -> Result<usize> {
    let g = sorted_set(guard);
    let idx = delta_set(inst, head, guard)?;
    Ok(idx
        .into_iter()
        .map(|i| {
            let (_, tail) = cw_view(&inst.body()[i]).expect("cw body");
            tail.iter().filter(|v| g.binary_search(&v.0).is_ok()).count()
        })
        .max()
        .unwrap_or(0))
}

/// Tables for guesses of size at most `k0`: a key `(B, G)` is stored when
/// some constraint has head image `B` and tail image containing `G`, with
/// `|B| <= k0` and `|G| <= min(b + 1, k0)`.
pub fn build_cw_tables(inst: &Instance, k0: usize) -> Result<CwTables> {
    let b = cw_weight_bound(inst)?;
    let guard_cap = (b + 1).min(k0);
    let mut acc: BTreeMap<Key, CwEntry> = BTreeMap::new();
    for (head, tail) in views(inst)? {
        if head.len() > k0 {
            continue;
        }
        let support = sorted_set(tail);
        let mult: Vec<usize> = support
            .iter()
            .map(|&v| tail.iter().filter(|x| x.0 == v).count())
            .collect();
        let idx: Vec<usize> = (0..support.len()).collect();
        for_each_subset(&idx, guard_cap, |sel| {
            let guard: Vec<usize> = sel.iter().map(|&i| support[i]).collect();
            let hits: usize = sel.iter().map(|&i| mult[i]).sum();
            let e = acc.entry((head.clone(), guard)).or_default();
            e.delta += 1;
            e.lambda = e.lambda.max(hits);
        });
    }
    let n = inst.input_size() as u128;
    let bound = n.saturating_mul((0..=b + 1).map(|i| binomial(n as u64, i as u64)).fold(0u128, u128::saturating_add));
    if acc.len() as u128 > bound {
        return Err(Error::Capacity(format!("{} stored values exceed the bound {bound}", acc.len())));
    }
    CwTables::from_entries(inst.num_vars(), b, k0, acc)
}

/// `Σ_{G ⊆ A, 0 < |G| <= b} (-1)^{|G|-1} |Δ_{B,G}|` from the tables.
pub fn inclusion_exclusion_union(tables: &CwTables, head: &[usize], a: &[usize]) -> i64 {
    tables.union_size(head, a)
}

/// Compiles a `CW^{[b]}` instance into the table-driven machine.
pub fn reduce_cw(inst: &Instance) -> Result<GuessCheckMachine> {
    let weight = inst.weight();
    let tables = build_cw_tables(inst, weight.k)?;
    let (s2, s3) = cw_step_counts(weight.k, tables.b);
    let budget = (weight.k as u64 + 1).saturating_add(s2).saturating_add(s3);
    Ok(GuessCheckMachine {
        universe: inst.variables().to_vec(),
        weight,
        budget,
        checker: Checker::Cw(tables),
    })
}
