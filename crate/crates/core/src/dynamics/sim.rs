//! Deterministic, event-granular execution of programs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{store_of, CmpOp, Cond, DynamicsError, EventKind, Literal, Program, Stmt, Violation};
use crate::model::{Model, Path};
use crate::types::ValueType;
use crate::validate::validate_all;

/// Upper bound on firings per run, so nested `repeat` blocks cannot run away.
pub const MAX_FIRINGS: usize = 1_000_000;

/// Current value of every store machine; `None` is null.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimState {
    values: BTreeMap<Path, Option<String>>,
}

impl SimState {
    /// Every store machine of the model, set to null.
    pub fn initial(model: &Model) -> SimState {
        let values = model.walk().into_iter().filter(|(_, m)| m.name == "store").map(|(p, _)| (p, None)).collect();
        SimState { values }
    }

    pub fn get(&self, store: &Path) -> Option<&str> {
        self.values.get(store).and_then(|v| v.as_deref())
    }

    /// Overwrites a store. Returns false (and does nothing) if `store` is not
    /// a store of this state.
    pub fn set(&mut self, store: &Path, value: Option<String>) -> bool {
        match self.values.get_mut(store) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    pub fn stores(&self) -> impl Iterator<Item = (&Path, Option<&str>)> {
        self.values.iter().map(|(p, v)| (p, v.as_deref()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    Rejected,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Applied => "applied",
            Outcome::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDelta {
    pub store: Path,
    pub old: Option<String>,
    pub new: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub step: usize,
    pub event: String,
    pub outcome: Outcome,
    pub delta: Vec<StateDelta>,
    pub output: Option<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub firings: Vec<Firing>,
    pub final_state: SimState,
}

fn show(v: &Option<String>) -> String {
    match v {
        Some(s) => serde_json::to_string(s).expect("strings serialize"),
        None => "null".to_string(),
    }
}

impl Trace {
    pub fn event_ids(&self) -> Vec<&str> {
        self.firings.iter().map(|f| f.event.as_str()).collect()
    }

    /// One line per firing: `step<TAB>event<TAB>outcome<TAB>detail`, where the
    /// detail is the state change (`store: old -> new`, joined by `; `), the
    /// output of a read (`=> value`), or empty.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.firings {
            let detail = match &f.output {
                Some(v) => format!("=> {}", show(v)),
                None => f
                    .delta
                    .iter()
                    .map(|d| format!("{}: {} -> {}", d.store, show(&d.old), show(&d.new)))
                    .collect::<Vec<_>>()
                    .join("; "),
            };
            let _ = writeln!(out, "{}\t{}\t{}\t{}", f.step, f.event, f.outcome.as_str(), detail);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let firings: Vec<Value> = self
            .firings
            .iter()
            .map(|f| {
                let mut obj = json!({
                    "step": f.step,
                    "event": f.event,
                    "outcome": f.outcome.as_str(),
                });
                if !f.delta.is_empty() {
                    obj["delta"] = f
                        .delta
                        .iter()
                        .map(|d| json!({"store": d.store.to_string(), "old": d.old, "new": d.new}))
                        .collect();
                }
                if let Some(v) = &f.output {
                    obj["output"] = json!(v);
                }
                obj
            })
            .collect();
        let state: serde_json::Map<String, Value> =
            self.final_state.stores().map(|(p, v)| (p.to_string(), json!(v))).collect();
        json!({ "firings": firings, "final_state": state })
    }
}

type Closure<'a> = BTreeMap<&'a str, BTreeSet<&'a str>>;

struct Run<'a> {
    model: &'a Model,
    bindings: &'a BTreeMap<String, String>,
    state: SimState,
    firings: Vec<Firing>,
    /// `Some` when chronology order is enforced: successor closure and the
    /// events fired so far, in first-firing order.
    chronology: Option<(Closure<'a>, Vec<String>)>,
}

impl<'a> Run<'a> {
    fn block(&mut self, body: &[Stmt]) -> Result<(), DynamicsError> {
        for stmt in body {
            match stmt {
                Stmt::Fire(id) => self.fire(id)?,
                Stmt::If { cond, then, otherwise } => {
                    if self.eval(cond) {
                        self.block(then)?;
                    } else if let Some(o) = otherwise {
                        self.block(o)?;
                    }
                }
                Stmt::Repeat { count, body } => {
                    for _ in 0..*count {
                        self.block(body)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, cond: &Cond) -> bool {
        let current = store_of(self.model, &cond.lhs).and_then(|s| self.state.get(&s).map(str::to_string));
        let equal = match (&cond.rhs, current.as_deref()) {
            (Literal::Null, v) => v.is_none(),
            (Literal::Str(s), Some(v)) => s == v,
            (Literal::Int(i), Some(v)) => v.trim_start_matches('+').parse::<i64>() == Ok(*i),
            (_, None) => false,
        };
        match cond.op {
            CmpOp::Eq => equal,
            CmpOp::Ne => !equal,
        }
    }

    fn check_order(&mut self, id: &str) -> Result<(), DynamicsError> {
        let Some((closure, fired)) = &mut self.chronology else { return Ok(()) };
        if fired.iter().any(|f| f == id) {
            return Ok(());
        }
        if let Some(later) = closure.get(id) {
            if let Some(b) = fired.iter().find(|f| later.contains(f.as_str())) {
                return Err(DynamicsError::ChronologyViolation {
                    violation: Violation { before: id.to_string(), after: b.clone() },
                    partial: Trace { firings: std::mem::take(&mut self.firings), final_state: self.state.clone() },
                });
            }
        }
        fired.push(id.to_string());
        Ok(())
    }

    fn fire(&mut self, id: &str) -> Result<(), DynamicsError> {
        if self.firings.len() >= MAX_FIRINGS {
            return Err(DynamicsError::StepLimit);
        }
        let event = self.model.event(id).ok_or_else(|| DynamicsError::UnknownEvent(id.to_string()))?;
        self.check_order(id)?;
        let mut firing = Firing {
            step: self.firings.len(),
            event: id.to_string(),
            outcome: Outcome::Applied,
            delta: Vec::new(),
            output: None,
        };
        match &event.kind {
            EventKind::Plain => {}
            EventKind::Ctor(class) => {
                let stores: Vec<Path> = self
                    .state
                    .stores()
                    .filter(|(p, v)| p.starts_with(class) && v.is_some())
                    .map(|(p, _)| p.clone())
                    .collect();
                for store in stores {
                    let old = self.state.get(&store).map(str::to_string);
                    self.state.set(&store, None);
                    firing.delta.push(StateDelta { store, old, new: None });
                }
            }
            EventKind::Set(attr) => {
                let value = self.bindings.get(id).ok_or_else(|| DynamicsError::MissingBinding(id.to_string()))?;
                let store = store_of(self.model, attr).ok_or_else(|| DynamicsError::UnknownEvent(id.to_string()))?;
                if declared_type(self.model, attr).conforms(Some(value)) {
                    let old = self.state.get(&store).map(str::to_string);
                    self.state.set(&store, Some(value.clone()));
                    firing.delta.push(StateDelta { store, old, new: Some(value.clone()) });
                } else {
                    firing.outcome = Outcome::Rejected;
                }
            }
            EventKind::Get(attr) => {
                let store = store_of(self.model, attr).ok_or_else(|| DynamicsError::UnknownEvent(id.to_string()))?;
                firing.output = Some(self.state.get(&store).map(str::to_string));
            }
        }
        self.firings.push(firing);
        Ok(())
    }
}

/// The type recorded in the attribute's type-descriptor machine; values of an
/// attribute without one are unchecked.
fn declared_type(model: &Model, attr: &Path) -> ValueType {
    let owner = if attr.last_name() == "store" { attr.parent() } else { Some(attr.clone()) };
    owner
        .and_then(|a| model.find_machine(&a.child("typedesc")))
        .and_then(|t| t.metadata.get("type"))
        .and_then(|t| t.parse().ok())
        .unwrap_or(ValueType::String)
}

/// The ids a run of `program` fires, starting from `state`.
///
/// Control flow is resolved as execution proceeds: a condition sees the
/// store values left by the events fired before it.
pub fn expand(
    model: &Model,
    program: &Program,
    state: &SimState,
    bindings: &BTreeMap<String, String>,
) -> Result<Vec<String>, DynamicsError> {
    let mut run = Run { model, bindings, state: state.clone(), firings: Vec::new(), chronology: None };
    run.block(&program.body)?;
    Ok(run.firings.into_iter().map(|f| f.event).collect())
}

/// Runs `program` from the all-null state, enforcing the model's chronology.
pub fn simulate(model: &Model, program: &Program, bindings: &BTreeMap<String, String>) -> Result<Trace, DynamicsError> {
    let errors: Vec<_> = validate_all(model).into_iter().filter(|d| d.is_error()).collect();
    if !errors.is_empty() {
        return Err(DynamicsError::Invalid(errors));
    }
    let known: HashSet<&str> = model.events.iter().map(|e| e.id.as_str()).collect();
    if let Some(id) = program.fired_ids().into_iter().find(|id| !known.contains(id)) {
        return Err(DynamicsError::UnknownEvent(id.to_string()));
    }
    let mut run = Run {
        model,
        bindings,
        state: SimState::initial(model),
        firings: Vec::new(),
        chronology: Some((model.chronology.successors_closure(), Vec::new())),
    };
    run.block(&program.body)?;
    Ok(Trace { firings: run.firings, final_state: run.state })
}
