//! JSON documents for instances and machines.
//!
//! Positions inside relation members are 1-based. Constraint indices in
//! machine documents refer to the document's own `constraints` array, and
//! table keys use 0-based universe indices: `"0,3|5"` is `B = {0, 3}`,
//! `G = {5}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{Constraint, Instance, Var, WeightMode, WeightParameter};
use crate::machine::{AppearanceChecker, Checker, CwEntry, CwTables, GuessCheckMachine};
use crate::relations::{CostModel, Relation, RelationKind, WeightKind, WeightSet};
use crate::subset::PosSet;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format_version: String,
    variables: Vec<String>,
    parameter: ParamDoc,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    weight_constraint_included: bool,
    constraints: Vec<ConstraintDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamDoc {
    kind: String,
    k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    relation: RelationDoc,
    scope: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum RelationDoc {
    W {
        weights: WeightsDoc,
        arity: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<u64>,
    },
    CW {
        weights: WeightsDoc,
        d: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<u64>,
    },
    #[serde(rename = "explicit")]
    Explicit {
        arity: usize,
        members: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<u64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    kind: WeightKind,
    #[serde(default)]
    values: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format_version: Option<String>,
    checker: String,
    universe: Vec<String>,
    parameter: ParamDoc,
    budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost_model: Option<CostModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraints: Option<Vec<ConstraintDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e_sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tables: Option<Vec<TableEntryDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first: Option<Box<MachineDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    second: Option<Box<MachineDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntryDoc {
    key: String,
    delta: usize,
    lambda: usize,
}

/// Serializer switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOptions {
    /// Emit the weight constraint as the first entry of `constraints`.
    pub materialize_weight_constraint: bool,
}

fn from_json<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::invalid(path, e.into_inner().to_string())
    })
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn param_doc(w: WeightParameter) -> ParamDoc {
    let kind = match w.mode {
        WeightMode::Exact => "exact",
        WeightMode::AtMost => "atmost",
    };
    ParamDoc { kind: kind.into(), k: w.k }
}

fn read_param(p: &ParamDoc, path: &str) -> Result<WeightParameter> {
    match p.kind.as_str() {
        "exact" => Ok(WeightParameter::exact(p.k)),
        "atmost" => Ok(WeightParameter::at_most(p.k)),
        other => Err(Error::invalid(
            format!("{path}.kind"),
            format!("expected \"exact\" or \"atmost\", found {other:?}"),
        )),
    }
}

fn weights_doc(ws: &WeightSet) -> WeightsDoc {
    WeightsDoc { kind: ws.kind(), values: ws.values().to_vec() }
}

fn relation_doc(rel: &Relation) -> RelationDoc {
    let index = (rel.index() != 1).then_some(rel.index());
    match rel.kind() {
        RelationKind::W { weights, arity } => RelationDoc::W { weights: weights_doc(weights), arity: *arity, index },
        RelationKind::CW { weights, head, tail } => {
            RelationDoc::CW { weights: weights_doc(weights), d: *head, m: *tail, index }
        }
        RelationKind::Explicit { arity, members } => RelationDoc::Explicit {
            arity: *arity,
            members: members.iter().map(|m| m.as_slice().to_vec()).collect(),
            index,
        },
    }
}

fn read_relation(doc: &RelationDoc, path: &str) -> Result<Relation> {
    let weights = |w: &WeightsDoc| {
        WeightSet::new(w.kind, w.values.iter().copied())
            .map_err(|e| Error::invalid(format!("{path}.weights"), e.to_string()))
    };
    let at = |field: &str| {
        let p = format!("{path}.{field}");
        move |e: Error| Error::invalid(p.clone(), e.to_string())
    };
    let (rel, index) = match doc {
        RelationDoc::W { weights: w, arity, index } => (Relation::w(weights(w)?, *arity).map_err(at("arity"))?, index),
        RelationDoc::CW { weights: w, d, m, index } => (Relation::cw(weights(w)?, *d, *m).map_err(at("m"))?, index),
        RelationDoc::Explicit { arity, members, index } => {
            for (j, m) in members.iter().enumerate() {
                if let Some(p) = m.iter().find(|&&p| p == 0 || p > *arity) {
                    return Err(Error::invalid(
                        format!("{path}.members[{j}]"),
                        format!("position {p} outside [1, {arity}]"),
                    ));
                }
            }
            let members = members.iter().map(|m| PosSet::new(m.iter().copied()));
            (Relation::explicit(*arity, members).map_err(at("arity"))?, index)
        }
    };
    match index {
        Some(i) => rel.with_index(*i).map_err(at("index")),
        None => Ok(rel),
    }
}

fn constraint_doc(c: &Constraint, names: &[String]) -> ConstraintDoc {
    ConstraintDoc {
        relation: relation_doc(c.relation()),
        scope: c.scope().iter().map(|v| names[v.0].clone()).collect(),
    }
}

fn read_constraints(docs: &[ConstraintDoc], lookup: &HashMap<&str, usize>, path: &str) -> Result<Vec<Constraint>> {
    let mut out = Vec::with_capacity(docs.len());
    for (i, c) in docs.iter().enumerate() {
        let base = format!("{path}[{i}]");
        let rel = read_relation(&c.relation, &format!("{base}.relation"))?;
        let mut scope = Vec::with_capacity(c.scope.len());
        for (j, name) in c.scope.iter().enumerate() {
            match lookup.get(name.as_str()) {
                Some(&v) => scope.push(Var(v)),
                None => {
                    return Err(Error::invalid(
                        format!("{base}.scope[{j}]"),
                        format!("undeclared variable {name:?}"),
                    ))
                }
            }
        }
        if scope.len() != rel.arity() {
            return Err(Error::invalid(
                format!("{base}.scope"),
                format!("{} entries for a relation of arity {}", scope.len(), rel.arity()),
            ));
        }
        out.push(Constraint::new(rel, scope).map_err(|e| Error::invalid(base.clone(), e.to_string()))?);
    }
    Ok(out)
}

fn name_lookup<'a>(names: &'a [String], path: &str) -> Result<HashMap<&'a str, usize>> {
    let mut lookup = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if lookup.insert(name.as_str(), i).is_some() {
            return Err(Error::invalid(format!("{path}[{i}]"), format!("duplicate name {name:?}")));
        }
    }
    Ok(lookup)
}

fn check_version(v: Option<&str>) -> Result<()> {
    match v {
        Some(FORMAT_VERSION) => Ok(()),
        Some(other) => Err(Error::invalid(
            "format_version",
            format!("unsupported version {other:?}, expected {FORMAT_VERSION:?}"),
        )),
        None => Err(Error::invalid("format_version", "missing field")),
    }
}

/// The weight constraint over all variables, as a body constraint.
fn weight_constraint(w: WeightParameter, n: usize) -> Result<Constraint> {
    let ws = match w.mode {
        WeightMode::Exact => WeightSet::finite([w.k]),
        WeightMode::AtMost => WeightSet::finite(0..=w.k),
    };
    Constraint::new(Relation::w(ws, n)?, (0..n).map(Var).collect())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = from_json(text)?;
    check_version(Some(&doc.format_version))?;
    let lookup = name_lookup(&doc.variables, "variables")?;
    let weight = read_param(&doc.parameter, "parameter")?;
    let mut body = read_constraints(&doc.constraints, &lookup, "constraints")?;
    if doc.weight_constraint_included {
        let expected = weight_constraint(weight, doc.variables.len()).ok();
        if body.first() != expected.as_ref() {
            return Err(Error::invalid(
                "constraints[0]",
                "expected the weight constraint over all variables in declaration order",
            ));
        }
        body.remove(0);
    }
    Instance::new(doc.variables, weight, body).map_err(|e| Error::invalid("constraints", e.to_string()))
}

pub fn serialize_instance(inst: &Instance) -> String {
    serialize_instance_with(inst, WriteOptions::default())
}

/// Canonical form: members and weight values sorted, default index omitted.
/// An instance without variables has no weight constraint to materialize.
pub fn serialize_instance_with(inst: &Instance, opts: WriteOptions) -> String {
    let names = inst.variables();
    let mut constraints: Vec<ConstraintDoc> = Vec::new();
    let materialize = opts.materialize_weight_constraint && !names.is_empty();
    if materialize {
        let c = weight_constraint(inst.weight(), names.len()).expect("at least one variable");
        constraints.push(constraint_doc(&c, names));
    }
    constraints.extend(inst.body().iter().map(|c| constraint_doc(c, names)));
    to_json(&InstanceDoc {
        format_version: FORMAT_VERSION.into(),
        variables: names.to_vec(),
        parameter: param_doc(inst.weight()),
        weight_constraint_included: materialize,
        constraints,
    })
}

fn key_string(head: &[usize], guard: &[usize]) -> String {
    let join = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    format!("{}|{}", join(head), join(guard))
}

fn parse_key(key: &str, path: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let bad = || Error::invalid(path, format!("malformed key {key:?}"));
    let (h, g) = key.split_once('|').ok_or_else(bad)?;
    let part = |s: &str| -> Result<Vec<usize>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|x| x.parse::<usize>().map_err(|_| bad())).collect()
    };
    Ok((part(h)?, part(g)?))
}

fn machine_doc(m: &GuessCheckMachine, top: bool) -> MachineDoc {
    let mut doc = MachineDoc {
        format_version: top.then(|| FORMAT_VERSION.to_string()),
        checker: m.kind_name().into(),
        universe: m.universe().to_vec(),
        parameter: param_doc(m.weight()),
        budget: m.budget(),
        cost_model: None,
        constraints: None,
        e_sets: None,
        d: None,
        b: None,
        tables: None,
        first: None,
        second: None,
    };
    match m.checker() {
        Checker::AlwaysReject => {}
        Checker::Appearance(c) => {
            doc.cost_model = Some(c.cost_model());
            doc.constraints = Some(c.constraints().iter().map(|x| constraint_doc(x, m.universe())).collect());
            doc.e_sets = Some(c.e_sets().to_vec());
            doc.d = Some(c.d_set().to_vec());
        }
        Checker::Cw(t) => {
            doc.b = Some(t.b());
            doc.tables = Some(
                t.entries()
                    .map(|(h, g, e)| TableEntryDoc { key: key_string(h, g), delta: e.delta, lambda: e.lambda })
                    .collect(),
            );
        }
        Checker::Combined(a, b) => {
            doc.first = Some(Box::new(machine_doc(a, false)));
            doc.second = Some(Box::new(machine_doc(b, false)));
        }
    }
    doc
}

fn required<'a, T>(field: &'a Option<T>, path: &str, name: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("{path}{name}"), "missing field for this checker"))
}

fn read_machine(doc: &MachineDoc, path: &str) -> Result<GuessCheckMachine> {
    let lookup = name_lookup(&doc.universe, &format!("{path}universe"))?;
    let weight = read_param(&doc.parameter, &format!("{path}parameter"))?;
    let n = doc.universe.len();
    let wrap = |e: Error| match e {
        Error::Invalid { .. } => e,
        other => Error::invalid(format!("{path}checker"), other.to_string()),
    };
    let checker = match doc.checker.as_str() {
        "always-reject" => Checker::AlwaysReject,
        "appearance" => {
            let cm = *required(&doc.cost_model, path, "cost_model")?;
            let cons = read_constraints(required(&doc.constraints, path, "constraints")?, &lookup, &format!("{path}constraints"))?;
            let e_sets = required(&doc.e_sets, path, "e_sets")?.clone();
            let d = required(&doc.d, path, "d")?.clone();
            Checker::Appearance(AppearanceChecker::from_parts(n, cons, e_sets, d, cm).map_err(wrap)?)
        }
        "cw" => {
            let b = *required(&doc.b, path, "b")?;
            let mut entries = Vec::new();
            for (i, e) in required(&doc.tables, path, "tables")?.iter().enumerate() {
                let key = parse_key(&e.key, &format!("{path}tables[{i}].key"))?;
                entries.push((key, CwEntry { delta: e.delta, lambda: e.lambda }));
            }
            Checker::Cw(CwTables::from_entries(n, b, weight.k, entries).map_err(|e| {
                Error::invalid(format!("{path}tables"), e.to_string())
            })?)
        }
        "combined" => {
            let first = read_machine(required(&doc.first, path, "first")?, &format!("{path}first."))?;
            let second = read_machine(required(&doc.second, path, "second")?, &format!("{path}second."))?;
            Checker::Combined(Box::new(first), Box::new(second))
        }
        other => {
            return Err(Error::invalid(
                format!("{path}checker"),
                format!("unknown checker {other:?}"),
            ))
        }
    };
    GuessCheckMachine::from_parts(doc.universe.clone(), weight, doc.budget, checker).map_err(wrap)
}

pub fn parse_machine(text: &str) -> Result<GuessCheckMachine> {
    let doc: MachineDoc = from_json(text)?;
    check_version(doc.format_version.as_deref())?;
    read_machine(&doc, "")
}

pub fn serialize_machine(m: &GuessCheckMachine) -> String {
    to_json(&machine_doc(m, true))
}
