//! Position sets and lexicographic subset enumeration.
//!
//! Tuples of a Boolean relation are identified with the set of their
//! 1-positions. [`PosSet`] keeps those positions sorted, 1-based, and never
//! materializes the full arity, so a tuple of weight 2 in a relation of arity
//! 10^6 costs two words.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A sorted, duplicate-free set of 1-based positions.
///
/// The derived `Ord` is the lexicographic order over the sorted element
/// sequence, which is the canonical order used for every list of sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PosSet(Vec<usize>);

impl PosSet {
    pub fn empty() -> Self {
        PosSet(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn new(positions: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = positions.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PosSet(v)
    }

    /// Builds from a bit mask where bit `j` stands for position `j + 1`.
    pub fn from_mask(mask: u64) -> Self {
        PosSet((0..64).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect())
    }

    /// Inverse of [`PosSet::from_mask`]; `None` if a position exceeds 64.
    pub fn to_mask(&self) -> Option<u64> {
        self.0.iter().try_fold(0u64, |m, &p| {
            if (1..=64).contains(&p) {
                Some(m | 1 << (p - 1))
            } else {
                None
            }
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn is_subset(&self, other: &PosSet) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of positions inside the closed interval `[lo, hi]`.
    pub fn count_in(&self, lo: usize, hi: usize) -> usize {
        self.0.iter().filter(|&&p| p >= lo && p <= hi).count()
    }
}

impl fmt::Display for PosSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for PosSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PosSet::new(iter)
    }
}

/// Subset test on two sorted, duplicate-free slices.
pub fn sorted_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// What a [`walk_lex`] visitor wants done after looking at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    /// Visit the node's extensions.
    Descend,
    /// Skip every extension of the node.
    Skip,
    /// Abort the walk.
    Stop,
}

/// Visits every strictly increasing sequence over `0..n` of length at most
/// `max_len` in lexicographic order, starting with the empty sequence.
///
/// This is a preorder walk of the prefix tree: a sequence is visited before
/// all its extensions, so a visitor that knows every extension of a prefix
/// fails can return [`Walk::Skip`] without disturbing the order of the rest.
pub fn walk_lex(n: usize, max_len: usize, mut visit: impl FnMut(&[usize]) -> Walk) {
    let mut cur: Vec<usize> = Vec::with_capacity(max_len);
    loop {
        match visit(&cur) {
            Walk::Stop => return,
            Walk::Descend if cur.len() < max_len => {
                let next = cur.last().map_or(0, |&l| l + 1);
                if next < n {
                    cur.push(next);
                    continue;
                }
            }
            _ => {}
        }
        loop {
            match cur.pop() {
                None => return,
                Some(e) if e + 1 < n => {
                    cur.push(e + 1);
                    break;
                }
                Some(_) => {}
            }
        }
    }
}

/// All subsets of `0..n` with size in `[min_len, max_len]`, lexicographically.
pub fn lex_subsets(n: usize, min_len: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    walk_lex(n, max_len, |s| {
        if s.len() >= min_len {
            out.push(s.to_vec());
        }
        Walk::Descend
    });
    out
}

/// Calls `f` on every subset of `items` (given sorted) with at most
/// `max_len` elements, in lexicographic order.
pub fn for_each_subset<T: Clone>(items: &[T], max_len: usize, mut f: impl FnMut(&[T])) {
    let mut buf: Vec<T> = Vec::with_capacity(max_len);
    walk_lex(items.len(), max_len, |idx| {
        buf.clear();
        buf.extend(idx.iter().map(|&i| items[i].clone()));
        f(&buf);
        Walk::Descend
    });
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_is_lexicographic_and_complete() {
        let all = lex_subsets(5, 0, 5);
        assert_eq!(all.len(), 32);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0], Vec::<usize>::new());
        assert_eq!(all[1], vec![0]);
    }

    #[test]
    fn size_window() {
        let three = lex_subsets(6, 3, 3);
        assert_eq!(three.len(), 20);
        assert!(three.iter().all(|s| s.len() == 3));
        assert_eq!(lex_subsets(3, 0, 1), vec![vec![], vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn skip_prunes_subtree() {
        let mut seen = Vec::new();
        walk_lex(4, 4, |s| {
            seen.push(s.to_vec());
            if s == [0] {
                Walk::Skip
            } else {
                Walk::Descend
            }
        });
        assert!(seen.iter().all(|s| s.first() != Some(&0) || s.len() == 1));
        assert!(seen.contains(&vec![1, 2, 3]));
    }

    #[test]
    fn pos_set_basics() {
        let a = PosSet::new([3, 1, 3]);
        assert_eq!(a.as_slice(), &[1, 3]);
        assert!(PosSet::new([1]).is_subset(&a));
        assert!(!PosSet::new([2]).is_subset(&a));
        assert_eq!(PosSet::from_mask(a.to_mask().unwrap()), a);
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(PosSet::new([0]).to_mask(), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 3), 1_313_400);
    }
}
