//! The JSON system document: parsing with field-path diagnostics and
//! deterministic emission.
//!
//! Weights serialize as exact literals (`"3/4"`, `"inf"`, JSON booleans for
//! the boolean semiring) — never floats — so emitted documents re-parse to
//! identical in-memory systems.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::segala::{ConvexArrow, ConvexSystem, Gen};
use crate::semiring::{Semiring, SemiringKind, SemiringOps, Weight};
use crate::wlts::{KleisliMap, LabelAlgebra, StateSpace, System};
use crate::Result;

/// A parsed system document: either a weighted system or a convex one.
#[derive(Debug, Clone)]
pub enum ParsedSystem {
    Weighted(System),
    Segala(ConvexSystem),
}

impl ParsedSystem {
    pub fn states(&self) -> &Arc<StateSpace> {
        match self {
            ParsedSystem::Weighted(s) => s.states(),
            ParsedSystem::Segala(s) => s.states(),
        }
    }

    pub fn algebra(&self) -> &Arc<LabelAlgebra> {
        match self {
            ParsedSystem::Weighted(s) => s.algebra(),
            ParsedSystem::Segala(s) => s.algebra(),
        }
    }

    pub fn initial(&self) -> Option<usize> {
        match self {
            ParsedSystem::Weighted(s) => s.initial(),
            ParsedSystem::Segala(s) => s.initial(),
        }
    }

    pub fn kind_name(&self) -> String {
        match self {
            ParsedSystem::Weighted(s) => s.semiring().kind().to_string(),
            ParsedSystem::Segala(_) => "segala".to_string(),
        }
    }
}

fn get<'v>(obj: &'v Map<String, Value>, key: &str, ctx: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::document(ctx, format!("missing field {key:?}")))
}

fn as_str<'v>(v: &'v Value, ctx: &str) -> Result<&'v str> {
    v.as_str()
        .ok_or_else(|| Error::document(ctx, "expected a string"))
}

fn as_obj<'v>(v: &'v Value, ctx: &str) -> Result<&'v Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::document(ctx, "expected an object"))
}

fn as_arr<'v>(v: &'v Value, ctx: &str) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::document(ctx, "expected an array"))
}

/// Parses the `labels` + `algebra` fields into a label algebra. The
/// groupoidal table pairs each label `L` with `L^-1` when both are listed.
pub fn parse_algebra(doc: &Map<String, Value>) -> Result<LabelAlgebra> {
    let labels: Vec<String> = match doc.get("labels") {
        None => Vec::new(),
        Some(v) => as_arr(v, "labels")?
            .iter()
            .enumerate()
            .map(|(i, l)| as_str(l, &format!("labels[{i}]")).map(str::to_string))
            .collect::<Result<_>>()?,
    };
    let algebra = match doc.get("algebra") {
        None => "tau",
        Some(v) => as_str(v, "algebra")?,
    };
    match algebra {
        "tau" => LabelAlgebra::tau_absorption(&labels),
        "groupoidal" => {
            let mut pairs: Vec<(String, String)> = Vec::new();
            let mut plain: Vec<String> = Vec::new();
            let mut used = std::collections::BTreeSet::new();
            for l in &labels {
                if used.contains(l) {
                    continue;
                }
                let inv = format!("{l}^-1");
                if !l.ends_with("^-1") && labels.contains(&inv) {
                    pairs.push((l.clone(), inv.clone()));
                    used.insert(l.clone());
                    used.insert(inv);
                } else {
                    plain.push(l.clone());
                    used.insert(l.clone());
                }
            }
            let pair_refs: Vec<(&str, &str)> = pairs
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect();
            let plain_refs: Vec<&str> = plain.iter().map(String::as_str).collect();
            LabelAlgebra::groupoidal(&pair_refs, &plain_refs)
        }
        other => Err(Error::document(
            "algebra",
            format!("expected \"tau\" or \"groupoidal\", got {other:?}"),
        )),
    }
}

fn parse_weight(v: &Value, semiring: &Semiring, ctx: &str) -> Result<Weight> {
    let w = match v {
        Value::Bool(b) => Weight::Bool(*b),
        Value::String(s) => {
            Weight::parse(s).map_err(|e| Error::document(ctx, e.to_string()))?
        }
        _ => {
            return Err(Error::document(
                ctx,
                "weights are exact literals: a string like \"3/4\" or \"inf\", or a boolean",
            ))
        }
    };
    semiring
        .check_weight(&w)
        .map_err(|e| Error::document(ctx, e.to_string()))?;
    Ok(w)
}

fn positive_rational(v: &Value, ctx: &str) -> Result<BigRational> {
    let s = as_str(v, ctx)?;
    let r = crate::semiring::parse_rational(s)
        .ok_or_else(|| Error::document(ctx, format!("cannot parse rational {s:?}")))?;
    if !r.is_positive() {
        return Err(Error::document(ctx, "choice weights must be positive"));
    }
    Ok(r)
}

/// Parses a full system document.
pub fn parse_system(value: &Value) -> Result<ParsedSystem> {
    let doc = as_obj(value, "document")?;
    for key in doc.keys() {
        if !matches!(
            key.as_str(),
            "semiring" | "labels" | "algebra" | "states" | "initial" | "transitions"
        ) {
            return Err(Error::document(key, "unknown field"));
        }
    }
    let kind_str = as_str(get(doc, "semiring", "document")?, "semiring")?;
    let algebra = Arc::new(parse_algebra(doc)?);
    if !algebra.is_valid() {
        return Err(Error::document(
            "algebra",
            "this label algebra fails its laws and cannot carry systems; run `validate` to see the report",
        ));
    }
    let state_names: Vec<String> = as_arr(get(doc, "states", "document")?, "states")?
        .iter()
        .enumerate()
        .map(|(i, s)| as_str(s, &format!("states[{i}]")).map(str::to_string))
        .collect::<Result<_>>()?;
    let states =
        StateSpace::new(&state_names).map_err(|e| Error::document("states", e.to_string()))?;
    let initial = match doc.get("initial") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let name = as_str(v, "initial")?;
            Some(
                states
                    .index(name)
                    .ok_or_else(|| Error::document("initial", format!("unknown state {name:?}")))?,
            )
        }
    };
    let no_transitions = Vec::new();
    let transitions = match doc.get("transitions") {
        None => &no_transitions,
        Some(v) => as_arr(v, "transitions")?,
    };

    if kind_str == "segala" {
        let sys = parse_segala(algebra, states, transitions)?;
        return Ok(ParsedSystem::Segala(match initial {
            Some(i) => sys.with_initial(i)?,
            None => sys,
        }));
    }

    let kind: SemiringKind = kind_str
        .parse()
        .map_err(|_| Error::document("semiring", format!("unknown kind {kind_str:?}")))?;
    let semiring = Semiring::new(kind);
    let mut map = KleisliMap::zero(semiring, algebra.clone(), states.clone(), states.clone());
    for (i, t) in transitions.iter().enumerate() {
        let ctx = format!("transitions[{i}]");
        let obj = as_obj(t, &ctx)?;
        if obj.contains_key("choices") {
            return Err(Error::document(
                &ctx,
                "\"choices\" entries belong to \"semiring\": \"segala\" documents",
            ));
        }
        let from_name = as_str(get(obj, "from", &ctx)?, &format!("{ctx}.from"))?;
        let from = states.index(from_name).ok_or_else(|| {
            Error::document(format!("{ctx}.from"), format!("unknown state {from_name:?}"))
        })?;
        let label_name = as_str(get(obj, "label", &ctx)?, &format!("{ctx}.label"))?;
        let label = algebra.label(label_name).ok_or_else(|| {
            Error::document(format!("{ctx}.label"), format!("unknown label {label_name:?}"))
        })?;
        let to_name = as_str(get(obj, "to", &ctx)?, &format!("{ctx}.to"))?;
        let to = states.index(to_name).ok_or_else(|| {
            Error::document(format!("{ctx}.to"), format!("unknown state {to_name:?}"))
        })?;
        let weight = match obj.get("weight") {
            None => semiring.one(),
            Some(v) => parse_weight(v, &semiring, &format!("{ctx}.weight"))?,
        };
        // repeated (from, label, to) entries accumulate
        map.accumulate(from, label, to, weight);
    }
    let sys = System::new(map)?;
    Ok(ParsedSystem::Weighted(match initial {
        Some(i) => sys.with_initial(i)?,
        None => sys,
    }))
}

fn parse_segala(
    algebra: Arc<LabelAlgebra>,
    states: Arc<StateSpace>,
    transitions: &[Value],
) -> Result<ConvexSystem> {
    // default row: the single zero generator (a terminal state)
    let mut rows: Vec<Option<Vec<Gen>>> = vec![None; states.len()];
    for (i, t) in transitions.iter().enumerate() {
        let ctx = format!("transitions[{i}]");
        let obj = as_obj(t, &ctx)?;
        let from_name = as_str(get(obj, "from", &ctx)?, &format!("{ctx}.from"))?;
        let from = states.index(from_name).ok_or_else(|| {
            Error::document(format!("{ctx}.from"), format!("unknown state {from_name:?}"))
        })?;
        let choices = as_arr(get(obj, "choices", &ctx)?, &format!("{ctx}.choices"))?;
        if choices.is_empty() {
            return Err(Error::document(
                format!("{ctx}.choices"),
                "a segala row needs at least one choice (use [[]] for a terminal state)",
            ));
        }
        let mut gens = Vec::with_capacity(choices.len());
        for (j, choice) in choices.iter().enumerate() {
            let cctx = format!("{ctx}.choices[{j}]");
            let entries = as_arr(choice, &cctx)?;
            let mut g = Gen::new();
            for (k, e) in entries.iter().enumerate() {
                let ectx = format!("{cctx}[{k}]");
                let eobj = as_obj(e, &ectx)?;
                let label_name = as_str(get(eobj, "label", &ectx)?, &format!("{ectx}.label"))?;
                let label = algebra.label(label_name).ok_or_else(|| {
                    Error::document(
                        format!("{ectx}.label"),
                        format!("unknown label {label_name:?}"),
                    )
                })?;
                let to_name = as_str(get(eobj, "to", &ectx)?, &format!("{ectx}.to"))?;
                let to = states.index(to_name).ok_or_else(|| {
                    Error::document(format!("{ectx}.to"), format!("unknown state {to_name:?}"))
                })?;
                let w = positive_rational(
                    get(eobj, "weight", &ectx)?,
                    &format!("{ectx}.weight"),
                )?;
                let entry = g.entry((label, to)).or_insert_with(num_traits::Zero::zero);
                *entry += w;
            }
            gens.push(g);
        }
        match &mut rows[from] {
            Some(existing) => existing.extend(gens),
            slot => *slot = Some(gens),
        }
    }
    let rows: Vec<Vec<Gen>> = rows
        .into_iter()
        .map(|r| r.unwrap_or_else(|| vec![Gen::new()]))
        .collect();
    let arrow = ConvexArrow::new(algebra, states.clone(), states, rows)?;
    ConvexSystem::new(arrow)
}

/// Reads and parses a system document from disk.
pub fn load_system(path: &std::path::Path) -> Result<ParsedSystem> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    parse_system(&value)
}

fn weight_value(w: &Weight) -> Value {
    match w {
        Weight::Bool(b) => Value::Bool(*b),
        other => Value::String(other.to_string()),
    }
}

fn algebra_fields(algebra: &LabelAlgebra, out: &mut Map<String, Value>) {
    out.insert(
        "labels".into(),
        Value::Array(
            algebra
                .observable_names()
                .iter()
                .map(|n| Value::String(n.clone()))
                .collect(),
        ),
    );
    out.insert("algebra".into(), Value::String("tau".into()));
}

/// Emits a parsed system back to its document form.
pub fn system_to_value(sys: &ParsedSystem) -> Value {
    let mut out = Map::new();
    out.insert("semiring".into(), Value::String(sys.kind_name()));
    algebra_fields(sys.algebra(), &mut out);
    out.insert(
        "states".into(),
        Value::Array(
            sys.states()
                .names()
                .iter()
                .map(|n| Value::String(n.clone()))
                .collect(),
        ),
    );
    if let Some(i) = sys.initial() {
        out.insert(
            "initial".into(),
            Value::String(sys.states().name(i).to_string()),
        );
    }
    let transitions = match sys {
        ParsedSystem::Weighted(s) => s
            .map()
            .entries()
            .map(|((x, a, y), w)| {
                json!({
                    "from": s.states().name(x),
                    "label": s.algebra().name(a),
                    "to": s.states().name(y),
                    "weight": weight_value(w),
                })
            })
            .collect(),
        ParsedSystem::Segala(s) => s
            .states()
            .indices()
            .map(|x| {
                let choices: Vec<Value> = s
                    .arrow()
                    .generators(x)
                    .iter()
                    .map(|g| gen_to_value(g, s.algebra(), s.states()))
                    .collect();
                json!({ "from": s.states().name(x), "choices": choices })
            })
            .collect(),
    };
    out.insert("transitions".into(), Value::Array(transitions));
    Value::Object(out)
}

pub fn gen_to_value(g: &Gen, algebra: &LabelAlgebra, targets: &StateSpace) -> Value {
    Value::Array(
        g.iter()
            .map(|((l, y), v)| {
                json!({
                    "label": algebra.name(*l),
                    "to": targets.name(*y),
                    "weight": Weight::Rat(v.clone()).to_string(),
                })
            })
            .collect(),
    )
}

/// Parses a partition document: a JSON array of arrays of state names.
pub fn parse_partition(
    value: &Value,
    states: &StateSpace,
) -> Result<crate::bisim::Partition> {
    let arr = as_arr(value, "partition")?;
    let mut blocks = Vec::with_capacity(arr.len());
    for (i, b) in arr.iter().enumerate() {
        let ctx = format!("partition[{i}]");
        let names = as_arr(b, &ctx)?;
        let mut block = Vec::with_capacity(names.len());
        for (j, n) in names.iter().enumerate() {
            let nctx = format!("{ctx}[{j}]");
            let name = as_str(n, &nctx)?;
            block.push(
                states
                    .index(name)
                    .ok_or_else(|| Error::document(&nctx, format!("unknown state {name:?}")))?,
            );
        }
        blocks.push(block);
    }
    crate::bisim::Partition::new(blocks, states.len())
        .map_err(|e| Error::document("partition", e.to_string()))
}

/// DOT rendering of a system; τ edges are dashed, the initial state is a
/// double circle.
pub fn to_dot(sys: &ParsedSystem) -> String {
    let mut out = String::from("digraph system {\n  rankdir=LR;\n");
    let states = sys.states();
    for x in states.indices() {
        let shape = if sys.initial() == Some(x) {
            "doublecircle"
        } else {
            "circle"
        };
        out.push_str(&format!("  \"{}\" [shape={shape}];\n", states.name(x)));
    }
    match sys {
        ParsedSystem::Weighted(s) => {
            for ((x, a, y), w) in s.map().entries() {
                let style = if a.is_tau() { ", style=dashed" } else { "" };
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{},{}\"{style}];\n",
                    states.name(x),
                    states.name(y),
                    s.algebra().name(a),
                    w
                ));
            }
        }
        ParsedSystem::Segala(s) => {
            for x in states.indices() {
                for (i, g) in s.arrow().generators(x).iter().enumerate() {
                    for ((l, y), v) in g {
                        let style = if l.is_tau() { ", style=dashed" } else { "" };
                        out.push_str(&format!(
                            "  \"{}\" -> \"{}\" [label=\"{i}: {},{}\"{style}];\n",
                            states.name(x),
                            states.name(*y),
                            s.algebra().name(*l),
                            Weight::Rat(v.clone()),
                        ));
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
