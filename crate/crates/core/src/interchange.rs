//! JSON import and export for models and class specifications.
//!
//! Object keys are emitted in sorted order and optional fields are omitted
//! when absent, so export is byte-deterministic.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use crate::bridge::{Attribute, ClassSpec, Method, MethodKind};
use crate::diagnostic::Diagnostic;
use crate::dynamics::{Chronology, CmpOp, Cond, Event, EventKind, Literal, Program, Stmt};
use crate::model::{Edge, Machine, Model, ModelError, Path, StageKind};
use crate::types::ValueType;
use crate::validate::validate_all;

/// An import failure with a JSON-pointer location such as `/flows/3/to`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

fn schema<T>(pointer: &str, message: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() })
}

// ---- export ----

fn machine_json(m: &Machine) -> Value {
    let mut obj = Map::new();
    obj.insert("name".into(), json!(m.name));
    obj.insert("stages".into(), m.stages.iter().map(|k| json!(k.keyword())).collect());
    obj.insert("children".into(), m.children.iter().map(machine_json).collect());
    if let Some(owner) = &m.of_owner {
        obj.insert("of".into(), json!(owner.to_string()));
    }
    if !m.metadata.is_empty() {
        obj.insert("metadata".into(), json!(m.metadata));
    }
    Value::Object(obj)
}

fn edges_json(edges: &[Edge]) -> Value {
    edges.iter().map(|e| json!({"from": e.from.to_string(), "to": e.to.to_string()})).collect()
}

fn event_json(e: &Event) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(e.id));
    obj.insert("label".into(), json!(e.label));
    obj.insert("region".into(), e.region.iter().map(|p| json!(p.to_string())).collect());
    obj.insert("kind".into(), json!(e.kind.tag()));
    if let Some(t) = e.kind.target() {
        obj.insert("target".into(), json!(t.to_string()));
    }
    if let Some(t) = &e.time {
        obj.insert("time".into(), json!(t));
    }
    if let Some(m) = &e.meta {
        obj.insert("meta".into(), json!(m));
    }
    Value::Object(obj)
}

fn stmts_json(body: &[Stmt]) -> Value {
    body.iter()
        .map(|s| match s {
            Stmt::Fire(id) => json!({ "fire": id }),
            Stmt::If { cond, then, otherwise } => {
                let rhs = match &cond.rhs {
                    Literal::Null => Value::Null,
                    Literal::Str(s) => json!(s),
                    Literal::Int(i) => json!(i),
                };
                let op = match cond.op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                };
                let mut obj = Map::new();
                obj.insert("if".into(), json!({"lhs": cond.lhs.to_string(), "op": op, "rhs": rhs}));
                obj.insert("then".into(), stmts_json(then));
                if let Some(o) = otherwise {
                    obj.insert("else".into(), stmts_json(o));
                }
                Value::Object(obj)
            }
            Stmt::Repeat { count, body } => json!({"repeat": count, "body": stmts_json(body)}),
        })
        .collect()
}

/// The model as a JSON value.
pub fn model_to_value(model: &Model) -> Value {
    json!({
        "machines": model.machines.iter().map(machine_json).collect::<Value>(),
        "flows": edges_json(&model.flows),
        "triggers": edges_json(&model.triggers),
        "events": model.events.iter().map(event_json).collect::<Value>(),
        "chronology": model.chronology.edges().iter().map(|(a, b)| json!([a, b])).collect::<Value>(),
        "programs": model
            .programs
            .iter()
            .map(|p| json!({"name": p.name, "body": stmts_json(&p.body)}))
            .collect::<Value>(),
    })
}

/// Pretty-printed JSON for a valid model.
pub fn export_json(model: &Model) -> Result<String, ModelError> {
    let errors: Vec<_> = validate_all(model).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(ModelError::InvalidInput(errors));
    }
    Ok(pretty(&model_to_value(model)))
}

pub(crate) fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

// ---- import ----

struct Obj<'a> {
    map: &'a Map<String, Value>,
    at: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, at: &str, allowed: &[&str]) -> Result<Obj<'a>, SchemaError> {
        let Some(map) = v.as_object() else { return schema(at, "expected an object") };
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return schema(at, format!("unknown field `{k}`"));
        }
        Ok(Obj { map, at: at.to_string() })
    }

    fn ptr(&self, key: &str) -> String {
        format!("{}/{}", self.at, key.replace('~', "~0").replace('/', "~1"))
    }

    fn opt(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn str(&self, key: &str) -> Result<&'a str, SchemaError> {
        match self.map.get(key) {
            Some(Value::String(s)) => Ok(s),
            Some(_) => schema(&self.ptr(key), "expected a string"),
            None => schema(&self.at, format!("missing field `{key}`")),
        }
    }

    fn opt_str(&self, key: &str) -> Result<Option<&'a str>, SchemaError> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => schema(&self.ptr(key), "expected a string"),
        }
    }

    fn array(&self, key: &str) -> Result<&'a [Value], SchemaError> {
        match self.opt(key) {
            None => Ok(&[]),
            Some(Value::Array(a)) => Ok(a),
            Some(_) => schema(&self.ptr(key), "expected an array"),
        }
    }

    fn path(&self, key: &str) -> Result<Path, SchemaError> {
        let s = self.str(key)?;
        s.parse().or_else(|e: crate::model::PathSyntaxError| schema(&self.ptr(key), e.to_string()))
    }
}

fn machine_from(v: &Value, at: &str) -> Result<Machine, SchemaError> {
    let o = Obj::new(v, at, &["name", "stages", "children", "of", "metadata"])?;
    let mut m = Machine::new(o.str("name")?);
    for (i, s) in o.array("stages")?.iter().enumerate() {
        let p = format!("{}/{i}", o.ptr("stages"));
        let Some(kind) = s.as_str().and_then(StageKind::from_keyword) else {
            return schema(&p, "expected a stage kind (create, process, receive, release, transfer)");
        };
        if !m.stages.insert(kind) {
            return schema(&p, format!("stage `{kind}` listed twice"));
        }
    }
    for (i, c) in o.array("children")?.iter().enumerate() {
        m.children.push(machine_from(c, &format!("{}/{i}", o.ptr("children")))?);
    }
    if o.opt("of").is_some() {
        m.of_owner = Some(o.path("of")?);
    }
    if let Some(meta) = o.opt("metadata") {
        let Some(map) = meta.as_object() else { return schema(&o.ptr("metadata"), "expected an object") };
        for (k, v) in map {
            let Some(v) = v.as_str() else { return schema(&format!("{}/{k}", o.ptr("metadata")), "expected a string") };
            m.metadata.insert(k.clone(), v.to_string());
        }
    }
    Ok(m)
}

fn edges_from(model: &Model, o: &Obj, key: &str) -> Result<Vec<Edge>, SchemaError> {
    let mut out = Vec::new();
    for (i, e) in o.array(key)?.iter().enumerate() {
        let eo = Obj::new(e, &format!("{}/{i}", o.ptr(key)), &["from", "to"])?;
        let mut ends = Vec::new();
        for end in ["from", "to"] {
            let p = eo.path(end)?;
            if !model.resolves(&p) {
                return schema(&eo.ptr(end), format!("`{p}` does not resolve"));
            }
            ends.push(p);
        }
        let to = ends.pop().expect("two ends");
        let from = ends.pop().expect("two ends");
        out.push(Edge::new(from, to));
    }
    Ok(out)
}

fn event_from(v: &Value, at: &str) -> Result<Event, SchemaError> {
    let o = Obj::new(v, at, &["id", "label", "region", "kind", "target", "time", "meta"])?;
    let mut region = BTreeSet::new();
    for (i, p) in o.array("region")?.iter().enumerate() {
        let ptr = format!("{}/{i}", o.ptr("region"));
        let Some(s) = p.as_str() else { return schema(&ptr, "expected a path string") };
        region.insert(s.parse().or_else(|e: crate::model::PathSyntaxError| schema(&ptr, e.to_string()))?);
    }
    let kind = match o.opt_str("kind")?.unwrap_or("plain") {
        "plain" => {
            if o.opt("target").is_some() {
                return schema(&o.ptr("target"), "plain events have no target");
            }
            EventKind::Plain
        }
        "ctor" => EventKind::Ctor(o.path("target")?),
        "set" => EventKind::Set(o.path("target")?),
        "get" => EventKind::Get(o.path("target")?),
        other => return schema(&o.ptr("kind"), format!("unknown event kind `{other}`")),
    };
    Ok(Event {
        id: o.str("id")?.to_string(),
        label: o.opt_str("label")?.unwrap_or_default().to_string(),
        region,
        time: o.opt_str("time")?.map(str::to_string),
        meta: o.opt_str("meta")?.map(str::to_string),
        kind,
    })
}

fn stmts_from(v: &[Value], at: &str) -> Result<Vec<Stmt>, SchemaError> {
    let mut out = Vec::new();
    for (i, s) in v.iter().enumerate() {
        let at = format!("{at}/{i}");
        let Some(map) = s.as_object() else { return schema(&at, "expected a statement object") };
        let stmt = if map.contains_key("fire") {
            let o = Obj::new(s, &at, &["fire"])?;
            Stmt::Fire(o.str("fire")?.to_string())
        } else if map.contains_key("if") {
            let o = Obj::new(s, &at, &["if", "then", "else"])?;
            let c = Obj::new(&map["if"], &o.ptr("if"), &["lhs", "op", "rhs"])?;
            let op = match c.str("op")? {
                "==" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                _ => return schema(&c.ptr("op"), "expected `==` or `!=`"),
            };
            let rhs = match c.map.get("rhs") {
                None | Some(Value::Null) => Literal::Null,
                Some(Value::String(s)) => Literal::Str(s.clone()),
                Some(Value::Number(n)) if n.is_i64() => Literal::Int(n.as_i64().expect("checked")),
                Some(_) => return schema(&c.ptr("rhs"), "expected a string, integer or null"),
            };
            let otherwise = match o.opt("else") {
                Some(_) => Some(stmts_from(o.array("else")?, &o.ptr("else"))?),
                None => None,
            };
            Stmt::If {
                cond: Cond { lhs: c.path("lhs")?, op, rhs },
                then: stmts_from(o.array("then")?, &o.ptr("then"))?,
                otherwise,
            }
        } else if map.contains_key("repeat") {
            let o = Obj::new(s, &at, &["repeat", "body"])?;
            let Some(count) = map["repeat"].as_u64().and_then(|c| u32::try_from(c).ok()) else {
                return schema(&o.ptr("repeat"), "expected a non-negative integer count");
            };
            Stmt::Repeat { count, body: stmts_from(o.array("body")?, &o.ptr("body"))? }
        } else {
            return schema(&at, "expected one of `fire`, `if`, `repeat`");
        };
        out.push(stmt);
    }
    Ok(out)
}

/// Builds a model from a JSON value. Only the schema and arrow endpoints are
/// checked here; run [`crate::validate_all`] for the full rule set.
pub fn model_from_value(v: &Value) -> Result<Model, SchemaError> {
    let root = Obj::new(v, "", &["machines", "flows", "triggers", "events", "chronology", "programs"])?;
    let mut model = Model::new();
    for (i, m) in root.array("machines")?.iter().enumerate() {
        model.machines.push(machine_from(m, &format!("/machines/{i}"))?);
    }
    model.flows = edges_from(&model, &root, "flows")?;
    model.triggers = edges_from(&model, &root, "triggers")?;
    for (i, e) in root.array("events")?.iter().enumerate() {
        model.events.push(event_from(e, &format!("/events/{i}"))?);
    }
    let mut chronology = Chronology::new();
    for (i, pair) in root.array("chronology")?.iter().enumerate() {
        match pair.as_array().map(Vec::as_slice) {
            Some([Value::String(a), Value::String(b)]) => {
                chronology.insert(a.clone(), b.clone());
            }
            _ => return schema(&format!("/chronology/{i}"), "expected a pair of event ids"),
        }
    }
    model.chronology = chronology;
    for (i, p) in root.array("programs")?.iter().enumerate() {
        let at = format!("/programs/{i}");
        let o = Obj::new(p, &at, &["name", "body"])?;
        model
            .programs
            .push(Program { name: o.str("name")?.to_string(), body: stmts_from(o.array("body")?, &o.ptr("body"))? });
    }
    Ok(model)
}

pub fn import_json(text: &str) -> Result<Model, SchemaError> {
    let v: Value = serde_json::from_str(text).or_else(|e| schema("", format!("not JSON: {e}")))?;
    model_from_value(&v)
}

// ---- class specs ----

pub fn class_to_value(spec: &ClassSpec) -> Value {
    let mut obj = Map::new();
    obj.insert("name".into(), json!(spec.name));
    obj.insert(
        "attributes".into(),
        spec.attributes.iter().map(|a| json!({"name": a.name, "type": a.ty.name()})).collect(),
    );
    obj.insert(
        "methods".into(),
        spec.methods
            .iter()
            .map(|m| {
                let mut o = Map::new();
                o.insert("name".into(), json!(m.name));
                o.insert("kind".into(), json!(m.kind.tag()));
                if let Some(a) = m.kind.attribute() {
                    o.insert("attribute".into(), json!(a));
                }
                Value::Object(o)
            })
            .collect(),
    );
    if let Some(s) = &spec.superclass {
        obj.insert("extends".into(), json!(s));
    }
    Value::Object(obj)
}

pub fn export_class_json(spec: &ClassSpec) -> String {
    pretty(&class_to_value(spec))
}

/// Reads a class spec. Methods may be objects with an explicit kind, or bare
/// names whose kind is inferred from the class and attribute names.
pub fn class_from_value(v: &Value, at: &str) -> Result<ClassSpec, SchemaError> {
    let o = Obj::new(v, at, &["name", "attributes", "methods", "extends"])?;
    let mut spec = ClassSpec::new(o.str("name")?);
    spec.superclass = o.opt_str("extends")?.map(str::to_string);
    for (i, a) in o.array("attributes")?.iter().enumerate() {
        let ao = Obj::new(a, &format!("{}/{i}", o.ptr("attributes")), &["name", "type"])?;
        let ty: ValueType =
            ao.str("type")?.parse().or_else(|e: crate::types::UnknownType| schema(&ao.ptr("type"), e.to_string()))?;
        spec.attributes.push(Attribute::new(ao.str("name")?, ty));
    }
    let mut methods = Vec::new();
    for (i, m) in o.array("methods")?.iter().enumerate() {
        let at = format!("{}/{i}", o.ptr("methods"));
        if let Some(name) = m.as_str() {
            methods.push(Method::new(name, spec.infer_kind(name)));
            continue;
        }
        let mo = Obj::new(m, &at, &["name", "kind", "attribute"])?;
        let name = mo.str("name")?;
        let attr = || mo.str("attribute").map(str::to_string);
        let kind = match mo.opt_str("kind")? {
            None => spec.infer_kind(name),
            Some("constructor") => MethodKind::Constructor,
            Some("setter") => MethodKind::Setter(attr()?),
            Some("getter") => MethodKind::Getter(attr()?),
            Some("plain") => MethodKind::Plain,
            Some(other) => return schema(&mo.ptr("kind"), format!("unknown method kind `{other}`")),
        };
        methods.push(Method::new(name, kind));
    }
    spec.methods = methods;
    Ok(spec)
}

/// Reads one class object or an array of them.
pub fn import_classes_json(text: &str) -> Result<Vec<ClassSpec>, SchemaError> {
    let v: Value = serde_json::from_str(text).or_else(|e| schema("", format!("not JSON: {e}")))?;
    match &v {
        Value::Array(items) => items.iter().enumerate().map(|(i, c)| class_from_value(c, &format!("/{i}"))).collect(),
        _ => Ok(vec![class_from_value(&v, "")?]),
    }
}
