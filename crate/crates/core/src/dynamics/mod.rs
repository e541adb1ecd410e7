//! The event level (regions of the static model) and the control level
//! (chronology, programs, simulation).

mod chronology;
mod sim;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

pub use chronology::{check_actualization, Chronology, Violation};
pub use sim::{expand, simulate, Firing, Outcome, SimState, StateDelta, Trace, MAX_FIRINGS};

use crate::diagnostic::{self, codes, Diagnostic};
use crate::model::{is_valid_name, Model, Path, Resolved};

/// What an event does when the simulator fires it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum EventKind {
    /// No effect on state.
    #[default]
    Plain,
    /// Resets every store under the given class machine to null.
    Ctor(Path),
    /// Writes a bound value into the given attribute's store, if it type-checks.
    Set(Path),
    /// Reads the given attribute's store.
    Get(Path),
}

impl EventKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EventKind::Plain => "plain",
            EventKind::Ctor(_) => "ctor",
            EventKind::Set(_) => "set",
            EventKind::Get(_) => "get",
        }
    }

    pub fn target(&self) -> Option<&Path> {
        match self {
            EventKind::Plain => None,
            EventKind::Ctor(p) | EventKind::Set(p) | EventKind::Get(p) => Some(p),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target() {
            Some(p) => write!(f, "{} {p}", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

/// An event, represented by the region of the static model where it unfolds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Event {
    pub id: String,
    pub label: String,
    pub region: BTreeSet<Path>,
    /// Carried, not interpreted.
    pub time: Option<String>,
    /// Free-form annotation (e.g. intensity). Carried, not interpreted.
    pub meta: Option<String>,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Null,
    Str(String),
    Int(i64),
}

/// `lhs op rhs`, where `lhs` names an attribute machine (or its store).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond {
    pub lhs: Path,
    pub op: CmpOp,
    pub rhs: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Fire(String),
    If { cond: Cond, then: Vec<Stmt>, otherwise: Option<Vec<Stmt>> },
    Repeat { count: u32, body: Vec<Stmt> },
}

/// A named actualization: event firings under control structure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub name: String,
    pub body: Vec<Stmt>,
}

impl Program {
    /// Every event id fired anywhere in the body.
    pub fn fired_ids(&self) -> Vec<&str> {
        fn walk<'a>(body: &'a [Stmt], out: &mut Vec<&'a str>) {
            for s in body {
                match s {
                    Stmt::Fire(id) => out.push(id),
                    Stmt::If { then, otherwise, .. } => {
                        walk(then, out);
                        if let Some(o) = otherwise {
                            walk(o, out);
                        }
                    }
                    Stmt::Repeat { body, .. } => walk(body, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    fn conds(&self) -> Vec<&Cond> {
        fn walk<'a>(body: &'a [Stmt], out: &mut Vec<&'a Cond>) {
            for s in body {
                match s {
                    Stmt::Fire(_) => {}
                    Stmt::If { cond, then, otherwise } => {
                        out.push(cond);
                        walk(then, out);
                        if let Some(o) = otherwise {
                            walk(o, out);
                        }
                    }
                    Stmt::Repeat { body, .. } => walk(body, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynamicsError {
    #[error("event region is empty")]
    EmptyRegion,
    #[error("event region is not connected")]
    DisconnectedRegion,
    #[error("region path `{0}` does not resolve")]
    UnknownPath(Path),
    #[error("event `{0}` is already defined")]
    DuplicateId(String),
    #[error("`{0}` is not a valid event id")]
    BadId(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("set event `{0}` has no bound value")]
    MissingBinding(String),
    #[error("{violation} (after {} firing(s))", .partial.firings.len())]
    ChronologyViolation { violation: Violation, partial: Trace },
    #[error("program exceeds {MAX_FIRINGS} firings")]
    StepLimit,
    #[error("model is invalid ({} diagnostic(s), first: {})", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
}

/// The store machine holding the value of the attribute (or store) at `p`.
pub(crate) fn store_of(model: &Model, p: &Path) -> Option<Path> {
    let m = model.find_machine(p)?;
    if p.is_stage() {
        return None;
    }
    if m.name == "store" {
        Some(p.clone())
    } else if m.child("store").is_some() {
        Some(p.child("store"))
    } else {
        None
    }
}

/// True if the region elements form one connected piece.
///
/// Elements are stage or machine paths. Elements anchored in the same machine
/// are adjacent; otherwise two elements are adjacent when a flow or trigger
/// joins something each of them covers (a machine element covers its own
/// stages).
pub fn region_is_connected(model: &Model, region: &BTreeSet<Path>) -> bool {
    let elems: Vec<&Path> = region.iter().collect();
    if elems.len() <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..elems.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    };

    let mut by_anchor: HashMap<Path, usize> = HashMap::new();
    for (i, e) in elems.iter().enumerate() {
        if let Some(&j) = by_anchor.get(&e.machine_path()) {
            union(i, j, &mut parent);
        } else {
            by_anchor.insert(e.machine_path(), i);
        }
    }

    let covers = |elem: &Path, endpoint: &Path| {
        elem == endpoint || (!elem.is_stage() && endpoint.is_stage() && endpoint.machine_path() == *elem)
    };
    for edge in model.flows.iter().chain(model.triggers.iter()) {
        let froms: Vec<usize> = (0..elems.len()).filter(|&i| covers(elems[i], &edge.from)).collect();
        let tos: Vec<usize> = (0..elems.len()).filter(|&i| covers(elems[i], &edge.to)).collect();
        for &a in &froms {
            for &b in &tos {
                union(a, b, &mut parent);
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..elems.len()).all(|i| find(&mut parent, i) == root)
}

impl Model {
    /// Adds a plain event over `region` after checking the region is
    /// non-empty, resolves, and is connected.
    pub fn define_event(
        &mut self,
        id: &str,
        label: &str,
        region: impl IntoIterator<Item = Path>,
    ) -> Result<&Event, DynamicsError> {
        self.define_tagged_event(id, label, region, EventKind::Plain)
    }

    pub fn define_tagged_event(
        &mut self,
        id: &str,
        label: &str,
        region: impl IntoIterator<Item = Path>,
        kind: EventKind,
    ) -> Result<&Event, DynamicsError> {
        if !is_valid_name(id) {
            return Err(DynamicsError::BadId(id.to_string()));
        }
        if self.event(id).is_some() {
            return Err(DynamicsError::DuplicateId(id.to_string()));
        }
        let region: BTreeSet<Path> = region.into_iter().collect();
        if region.is_empty() {
            return Err(DynamicsError::EmptyRegion);
        }
        if let Some(p) = region.iter().find(|p| !self.resolves(p)) {
            return Err(DynamicsError::UnknownPath(p.clone()));
        }
        if !region_is_connected(self, &region) {
            return Err(DynamicsError::DisconnectedRegion);
        }
        self.events.push(Event { id: id.to_string(), label: label.to_string(), region, time: None, meta: None, kind });
        Ok(self.events.last().expect("just pushed"))
    }
}

/// Validates events, the chronology and programs against the static model.
pub fn validate_dynamics(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for e in &model.events {
        let loc = format!("event {}", e.id);
        if !is_valid_name(&e.id) {
            out.push(Diagnostic::error(codes::BAD_NAME, &loc, format!("`{}` is not a valid event id", e.id)));
        }
        if !ids.insert(e.id.as_str()) {
            out.push(Diagnostic::error(codes::DUPLICATE_EVENT, &loc, "event id defined more than once"));
        }
        if e.region.is_empty() {
            out.push(Diagnostic::error(codes::EMPTY_REGION, &loc, "event has an empty region"));
        }
        let unknown: Vec<_> = e.region.iter().filter(|p| !model.resolves(p)).collect();
        for p in &unknown {
            out.push(Diagnostic::error(codes::UNKNOWN_PATH, &loc, format!("region path `{p}` does not resolve")));
        }
        if unknown.is_empty() && !region_is_connected(model, &e.region) {
            out.push(Diagnostic::error(codes::DISCONNECTED_REGION, &loc, "event region is not connected"));
        }
        match &e.kind {
            EventKind::Plain => {}
            EventKind::Ctor(p) => {
                if !matches!(model.resolve(p), Ok(Resolved::Machine(_))) {
                    out.push(Diagnostic::error(
                        codes::BAD_EVENT_KIND,
                        &loc,
                        format!("constructor target `{p}` is not a machine"),
                    ));
                }
            }
            EventKind::Set(p) | EventKind::Get(p) => {
                if store_of(model, p).is_none() {
                    out.push(Diagnostic::error(
                        codes::BAD_EVENT_KIND,
                        &loc,
                        format!("{} target `{p}` has no store machine", e.kind.tag()),
                    ));
                }
            }
        }
    }

    out.extend(chronology::diagnostics(model));

    let mut names = HashSet::new();
    for p in &model.programs {
        let loc = format!("program {}", p.name);
        if !is_valid_name(&p.name) {
            out.push(Diagnostic::error(codes::BAD_NAME, &loc, format!("`{}` is not a valid program name", p.name)));
        }
        if !names.insert(p.name.as_str()) {
            out.push(Diagnostic::error(codes::DUPLICATE_PROGRAM, &loc, "program name defined more than once"));
        }
        let mut reported = HashSet::new();
        for id in p.fired_ids() {
            if model.event(id).is_none() && reported.insert(id) {
                out.push(Diagnostic::error(codes::UNKNOWN_EVENT, &loc, format!("program fires unknown event `{id}`")));
            }
        }
        for c in p.conds() {
            if store_of(model, &c.lhs).is_none() {
                out.push(Diagnostic::error(
                    codes::BAD_COND,
                    &loc,
                    format!("condition reads `{}`, which holds no store", c.lhs),
                ));
            }
        }
    }
    diagnostic::sort(&mut out);
    out
}
