use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constraint, Instance, Var, WeightParameter};
use crate::error::{Error, Result};
use crate::relations::{Relation, WeightKind, WeightSet};
use crate::subset::PosSet;

/// Which relations the generator draws body constraints from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profile {
    /// `W` relations sharing one randomly drawn weight set of this kind.
    SharedW(WeightKind),
    /// `W` relations sharing the given weight set.
    FixedW(WeightSet),
    /// `W` relations with independently drawn weight sets.
    MixedW,
    /// `W^even` / `W^odd` relations.
    Parity,
    /// `CW^{[b]}` relations with random head/tail split.
    Cw { b: usize },
    /// Explicit relations whose members have at most `max_member` elements.
    Explicit { max_member: usize },
    /// Any of the above families.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub n: usize,
    pub k: usize,
    pub at_most: bool,
    pub min_body: usize,
    pub max_body: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    pub profile: Profile,
}

impl GenConfig {
    pub fn new(n: usize, k: usize, profile: Profile) -> Self {
        GenConfig {
            n,
            k,
            at_most: false,
            min_body: 1,
            max_body: 4,
            min_arity: 1,
            max_arity: 4,
            profile,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_arity == 0 {
            return Err(Error::Usage("min_arity must be positive".into()));
        }
        if self.min_arity > self.max_arity {
            return Err(Error::Usage("min_arity exceeds max_arity".into()));
        }
        if self.min_body > self.max_body {
            return Err(Error::Usage("min_body exceeds max_body".into()));
        }
        if self.n == 0 && self.max_body > 0 {
            return Err(Error::Usage("constraints need at least one variable".into()));
        }
        Ok(())
    }
}

/// Zero-padded variable names so that name order and declaration order agree.
pub(crate) fn var_names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("x{i:0width$}")).collect()
}

/// A random instance, fully determined by `seed` and `cfg`.
pub fn random_instance(seed: u64, cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = match &cfg.profile {
        Profile::SharedW(kind) => Some(random_weights(&mut rng, *kind)),
        Profile::FixedW(ws) => Some(ws.clone()),
        _ => None,
    };
    let body_len = rng.gen_range(cfg.min_body..=cfg.max_body);
    let mut body = Vec::with_capacity(body_len);
    for _ in 0..body_len {
        let arity = rng.gen_range(cfg.min_arity..=cfg.max_arity);
        let relation = match &cfg.profile {
            Profile::SharedW(_) | Profile::FixedW(_) => {
                Relation::w(shared.clone().expect("shared weights drawn above"), arity)?
            }
            Profile::MixedW => Relation::w(random_any_weights(&mut rng), arity)?,
            Profile::Parity => {
                let ws = if rng.gen_bool(0.5) { WeightSet::even() } else { WeightSet::odd() };
                Relation::w(ws, arity)?
            }
            Profile::Cw { b } => random_cw(&mut rng, WeightSet::initial_segment(*b), arity)?,
            Profile::Explicit { max_member } => random_explicit(&mut rng, arity, *max_member)?,
            Profile::Mixed => match rng.gen_range(0..3) {
                0 => Relation::w(random_any_weights(&mut rng), arity)?,
                1 => {
                    let ws = random_any_weights(&mut rng);
                    random_cw(&mut rng, ws, arity)?
                }
                _ => random_explicit(&mut rng, arity, 3)?,
            },
        };
        let scope = (0..arity).map(|_| Var(rng.gen_range(0..cfg.n))).collect();
        body.push(Constraint::new(relation, scope)?);
    }
    let weight = if cfg.at_most {
        WeightParameter::at_most(cfg.k)
    } else {
        WeightParameter::exact(cfg.k)
    };
    Instance::new(var_names(cfg.n), weight, body)
}

pub(crate) fn random_weights(rng: &mut impl Rng, kind: WeightKind) -> WeightSet {
    match kind {
        WeightKind::Finite => {
            let count = rng.gen_range(1..=2);
            WeightSet::finite((0..count).map(|_| rng.gen_range(0..=3)))
        }
        WeightKind::Cofinite => {
            let count = rng.gen_range(0..=2);
            WeightSet::cofinite((0..count).map(|_| rng.gen_range(0..=2)))
        }
        WeightKind::Even => WeightSet::even(),
        WeightKind::Odd => WeightSet::odd(),
    }
}

fn random_any_weights(rng: &mut impl Rng) -> WeightSet {
    let kind = *[WeightKind::Finite, WeightKind::Cofinite, WeightKind::Even, WeightKind::Odd]
        .choose(rng)
        .expect("nonempty");
    random_weights(rng, kind)
}

fn random_cw(rng: &mut impl Rng, weights: WeightSet, arity: usize) -> Result<Relation> {
    let head = rng.gen_range(0..=arity.min(2));
    Relation::cw(weights, head, arity - head)
}

fn random_explicit(rng: &mut impl Rng, arity: usize, max_member: usize) -> Result<Relation> {
    let count = rng.gen_range(1..=4);
    let positions: Vec<usize> = (1..=arity).collect();
    let members = (0..count).map(|_| {
        let size = rng.gen_range(0..=max_member.min(arity));
        PosSet::new(positions.choose_multiple(rng, size).copied())
    });
    Relation::explicit(arity, members.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::RelationKind;

    #[test]
    fn deterministic_in_seed() {
        let cfg = GenConfig::new(6, 2, Profile::SharedW(WeightKind::Finite));
        assert_eq!(random_instance(1, &cfg).unwrap(), random_instance(1, &cfg).unwrap());
        let a = random_instance(1, &cfg).unwrap();
        assert_eq!(a.num_vars(), 6);
        assert!(a.body().len() <= 4);
    }

    #[test]
    fn explicit_member_sizes_bounded() {
        for seed in 0..50 {
            let cfg = GenConfig::new(6, 2, Profile::Explicit { max_member: 2 });
            let inst = random_instance(seed, &cfg).unwrap();
            for c in inst.body() {
                match c.relation().kind() {
                    RelationKind::Explicit { members, .. } => {
                        assert!(members.iter().all(|m| m.len() <= 2))
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }

    #[test]
    fn shared_profile_shares_weights() {
        for seed in 0..30 {
            let cfg = GenConfig::new(5, 2, Profile::SharedW(WeightKind::Cofinite));
            let inst = random_instance(seed, &cfg).unwrap();
            let ws: Vec<_> = inst.body().iter().map(|c| c.relation().weights().unwrap().clone()).collect();
            assert!(ws.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn impossible_bounds() {
        let mut cfg = GenConfig::new(4, 1, Profile::Parity);
        cfg.min_arity = 0;
        assert!(matches!(random_instance(0, &cfg), Err(Error::Usage(_))));
        let mut cfg = GenConfig::new(0, 1, Profile::Parity);
        cfg.max_body = 2;
        assert!(random_instance(0, &cfg).is_err());
        let mut cfg = GenConfig::new(3, 1, Profile::Parity);
        cfg.min_body = 5;
        assert!(random_instance(0, &cfg).is_err());
    }

    #[test]
    fn names_sort_like_declaration() {
        let names = var_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
