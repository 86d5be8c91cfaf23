use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{combine_machines, reduce_appearance, reduce_cw, simulate_with, GuessCheckMachine, SimulationResult, Strategy};
use crate::error::{Error, Result};
use crate::instances::{lift_kle_to_k, Assignment, Constraint, Instance, Var, WeightMode, WeightParameter};
use crate::partials::{compute_partials, PartialsTable, DEFAULT_ARITY_LIMIT};
use crate::relations::{CostModel, Relation, RelationKind, WeightSet};
use crate::subset::PosSet;

/// Output of [`reduce_completion`]. The first `source_vars` variables of
/// `instance` are the source variables in their original order; variable
/// `source_vars + i` is the indicator of the set `lambda_sets[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionReduction {
    pub instance: Instance,
    pub source_vars: usize,
    pub lambda_sets: Vec<Vec<Var>>,
}

impl CompletionReduction {
    pub fn lambda_var(&self, i: usize) -> Var {
        Var(self.source_vars + i)
    }

    /// Restriction of an assignment of the reduced instance to the source
    /// variables.
    pub fn project(&self, a: &Assignment) -> Assignment {
        Assignment::new(a.iter().filter(|v| v.0 < self.source_vars))
    }
}

fn image(scope: &[Var], t: &PosSet) -> Vec<usize> {
    let mut s: Vec<usize> = t.iter().map(|j| scope[j - 1].0).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Rewrites an exact-weight instance whose relations have no member larger
/// than `d` into one over `W` and `CW^{[2^d]}` relations.
///
/// Every set `E` of source variables that is the image of a partial set or
/// of a completion gets an indicator `lambda[E]`, tied to `E ⊆ D` by the
/// binding constraints. Indicators are ordered by decreasing `|E|`.
pub fn reduce_completion(inst: &Instance, d: usize) -> Result<CompletionReduction> {
    if d == 0 {
        return Err(Error::Usage("the completion reduction needs d >= 1".into()));
    }
    let weight = inst.weight();
    if weight.mode != WeightMode::Exact {
        return Err(Error::Usage("the completion reduction expects an exact weight".into()));
    }
    if inst.num_vars() == 0 {
        return Err(Error::Usage("the completion reduction needs at least one variable".into()));
    }
    let k0 = weight.k;
    if k0 >= 48 || d >= 48 {
        return Err(Error::Capacity("2^k and 2^d must fit the weight parameter".into()));
    }

    let mut tables: HashMap<&Relation, PartialsTable> = HashMap::new();
    let mut pending: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
    let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (i, c) in inst.body().iter().enumerate() {
        let rel = c.relation();
        if let Some(s) = rel.max_member_size().filter(|&s| s > d) {
            return Err(Error::NotApplicable(format!(
                "constraint {i} has a member of size {s}, above d = {d}"
            )));
        }
        if !tables.contains_key(rel) {
            tables.insert(rel, compute_partials(rel)?);
        }
        let table = &tables[rel];
        for t in table.partials() {
            let e_t = image(c.scope(), t);
            let comps: Vec<Vec<usize>> = table
                .completions_of(t)
                .expect("partial sets have an entry")
                .iter()
                .map(|u| image(c.scope(), u))
                .collect();
            keys.insert(e_t.clone());
            keys.extend(comps.iter().cloned());
            pending.push((e_t, comps));
        }
    }

    let mut ordered: Vec<Vec<usize>> = keys.into_iter().collect();
    ordered.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let n1 = inst.num_vars();
    let index: BTreeMap<&[usize], usize> = ordered.iter().enumerate().map(|(i, e)| (e.as_slice(), n1 + i)).collect();

    let mut taken: HashSet<String> = inst.variables().iter().cloned().collect();
    let mut variables = inst.variables().to_vec();
    for e in &ordered {
        let names: Vec<&str> = e.iter().map(|&v| inst.variables()[v].as_str()).collect();
        variables.push(crate::instances::fresh_name(&format!("lambda[{}]", names.join(",")), &mut taken));
    }

    let b = 1usize << d;
    let mut body = Vec::new();
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for (e_t, comps) in &pending {
        let head = index[e_t.as_slice()];
        let tail: BTreeSet<usize> = comps.iter().map(|u| index[u.as_slice()]).collect();
        let tail: Vec<usize> = tail.into_iter().collect();
        if !seen.insert((head, tail.clone())) {
            continue;
        }
        let rel = Relation::cw(WeightSet::initial_segment(b), 1, tail.len())?;
        let scope = std::iter::once(head).chain(tail).map(Var).collect();
        body.push(Constraint::new(rel, scope)?);
    }
    for e in &ordered {
        let lambda = Var(index[e.as_slice()]);
        let scope = e.iter().map(|&v| Var(v)).chain([lambda]).collect();
        body.push(Constraint::new(Relation::cw(WeightSet::initial_segment(1), e.len(), 1)?, scope)?);
        for &x in e {
            body.push(Constraint::new(Relation::cw(WeightSet::initial_segment(1), 1, 1)?, vec![lambda, Var(x)])?);
        }
    }
    body.push(Constraint::new(
        Relation::w(WeightSet::finite([k0]), n1)?,
        (0..n1).map(Var).collect(),
    )?);

    let instance = Instance::new(variables, WeightParameter::at_most(k0 + (1usize << k0)), body)?;
    let lambda_sets = ordered.into_iter().map(|e| e.into_iter().map(Var).collect()).collect();
    Ok(CompletionReduction { instance, source_vars: n1, lambda_sets })
}

/// `CW^{[b']}_{d,m}` with `m <= min(b', b)` accepts the same tuples as
/// `CW^{[b]}_{d,m}`: with at most `m` tail positions, both only ask for one.
pub fn normalize_cw(rel: &Relation, b: usize) -> Option<Relation> {
    match rel.kind() {
        RelationKind::CW { weights, head, tail } => {
            let own = weights.as_initial_segment()?;
            if own == b {
                return Some(rel.clone());
            }
            (*tail <= own.min(b) && own >= 1)
                .then(|| Relation::cw(WeightSet::initial_segment(b), *head, *tail).ok())
                .flatten()
                .and_then(|r| r.with_index(rel.index()).ok())
        }
        _ => None,
    }
}

/// The reduced instance and the combined machine deciding it.
#[derive(Debug, Clone)]
pub struct PipelineMachine {
    pub reduction: CompletionReduction,
    pub machine: GuessCheckMachine,
}

fn check_pipeline_input(inst: &Instance, d: usize) -> Result<()> {
    if inst.weight().mode != WeightMode::Exact {
        return Err(Error::Usage("the pipeline expects an exact weight".into()));
    }
    for (i, c) in inst.body().iter().enumerate() {
        if let Some(s) = c.relation().max_member_size().filter(|&s| s > d) {
            return Err(Error::Usage(format!(
                "constraint {i} admits a tuple of size {s}; its weight set is not within [0, {d}]"
            )));
        }
    }
    Ok(())
}

/// Builds the machine the pipeline simulates; `d` must be at least 1.
pub fn pipeline_machine(inst: &Instance, d: usize, cm: &CostModel) -> Result<PipelineMachine> {
    check_pipeline_input(inst, d)?;
    let body = inst
        .body()
        .iter()
        .map(|c| Constraint::new(c.relation().to_explicit(DEFAULT_ARITY_LIMIT)?, c.scope().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let reduction = reduce_completion(&inst.with_body(body)?, d)?;
    let lifted = lift_kle_to_k(&reduction.instance)?;

    let b = 1usize << d;
    let mut w_part = Vec::new();
    let mut cw_part = Vec::new();
    for c in lifted.body() {
        if matches!(c.relation().kind(), RelationKind::W { .. }) {
            w_part.push(c.clone());
        } else {
            let rel = normalize_cw(c.relation(), b).expect("the reduction emits normalizable CW constraints");
            cw_part.push(Constraint::new(rel, c.scope().to_vec())?);
        }
    }
    let m1 = reduce_appearance(&lifted.with_body(w_part)?, cm)?;
    let m2 = reduce_cw(&lifted.with_body(cw_part)?)?;
    let machine = combine_machines(m1, m2)?;
    Ok(PipelineMachine { reduction, machine })
}

/// Outcome of the pipeline; `simulation` is absent when `d = 0` is settled
/// directly.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub witness: Option<Assignment>,
    pub simulation: Option<SimulationResult>,
}

pub fn run_wd_pipeline(inst: &Instance, d: usize, cm: &CostModel) -> Result<PipelineRun> {
    check_pipeline_input(inst, d)?;
    if d == 0 {
        let ok = inst.weight().k == 0 && inst.body().iter().all(|c| c.relation().contains_empty());
        return Ok(PipelineRun { witness: ok.then(Assignment::default), simulation: None });
    }
    let pm = pipeline_machine(inst, d, cm)?;
    let sim = simulate_with(&pm.machine, Strategy::Pruned);
    let witness = sim.witness.as_ref().map(|w| pm.reduction.project(w));
    Ok(PipelineRun { witness, simulation: Some(sim) })
}

/// Decides an exact-weight instance whose relations have no member larger
/// than `d`, through the completion reduction and the combined machine.
pub fn solve_wd_pipeline(inst: &Instance, d: usize) -> Result<Option<Assignment>> {
    Ok(run_wd_pipeline(inst, d, &CostModel::default())?.witness)
}
