//! The static metamodel: machines, their stages, and the arrows between stages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{Chronology, Event, Program};
use crate::grammar;

/// One of the five operations a machine may perform on the things flowing through it.
///
/// The derived ordering (Create < Process < Receive < Release < Transfer) is
/// also the alphabetical ordering of the keywords, and is the order used for
/// every sorted output in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageKind {
    Create,
    Process,
    Receive,
    Release,
    Transfer,
}

impl StageKind {
    pub const ALL: [StageKind; 5] =
        [StageKind::Create, StageKind::Process, StageKind::Receive, StageKind::Release, StageKind::Transfer];

    /// The lowercase DSL keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            StageKind::Create => "create",
            StageKind::Process => "process",
            StageKind::Receive => "receive",
            StageKind::Release => "release",
            StageKind::Transfer => "transfer",
        }
    }

    /// The capitalized display label.
    pub fn label(self) -> &'static str {
        match self {
            StageKind::Create => "Create",
            StageKind::Process => "Process",
            StageKind::Receive => "Receive",
            StageKind::Release => "Release",
            StageKind::Transfer => "Transfer",
        }
    }

    pub fn from_keyword(s: &str) -> Option<StageKind> {
        StageKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Returns true if `name` can be used as a machine, event, or class name.
///
/// Names are identifiers and must not collide with a stage keyword, since stage
/// keywords are the reserved terminal segment of a [`Path`].
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && StageKind::from_keyword(name).is_none()
}

/// A dotted reference to a machine (`Author.name`) or to one of its stages
/// (`Author.name.receive`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    segments: Vec<String>,
    stage: Option<StageKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed path `{0}`")]
pub struct PathSyntaxError(pub String);

impl Path {
    /// Builds a machine path. Panics if `segments` is empty.
    pub fn machine<I, S>(segments: I) -> Path
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        assert!(!segments.is_empty(), "a path needs at least one segment");
        Path { segments, stage: None }
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn stage(&self) -> Option<StageKind> {
        self.stage
    }

    pub fn is_stage(&self) -> bool {
        self.stage.is_some()
    }

    /// The machine part of the path (drops a terminal stage segment).
    pub fn machine_path(&self) -> Path {
        Path { segments: self.segments.clone(), stage: None }
    }

    pub fn with_stage(&self, kind: StageKind) -> Path {
        Path { segments: self.segments.clone(), stage: Some(kind) }
    }

    /// Appends a machine segment. Only meaningful on machine paths.
    pub fn child(&self, name: impl Into<String>) -> Path {
        debug_assert!(self.stage.is_none());
        let mut segments = self.segments.clone();
        segments.push(name.into());
        Path { segments, stage: None }
    }

    /// The enclosing machine path, if this machine path is not top level.
    pub fn parent(&self) -> Option<Path> {
        if self.stage.is_some() {
            return Some(self.machine_path());
        }
        if self.segments.len() < 2 {
            return None;
        }
        let segments = self.segments[..self.segments.len() - 1].to_vec();
        Some(Path { segments, stage: None })
    }

    pub fn last_name(&self) -> &str {
        self.segments.last().expect("non-empty path")
    }

    /// True if `self` names `prefix` or something nested inside it.
    pub fn starts_with(&self, prefix: &Path) -> bool {
        if prefix.stage.is_some() {
            return self == prefix;
        }
        self.segments.len() >= prefix.segments.len() && self.segments[..prefix.segments.len()] == prefix.segments[..]
    }

    pub(crate) fn from_parts(segments: Vec<String>, stage: Option<StageKind>) -> Path {
        debug_assert!(!segments.is_empty());
        Path { segments, stage }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))?;
        if let Some(kind) = self.stage {
            write!(f, ".{kind}")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Path, PathSyntaxError> {
        let mut parts: Vec<&str> = s.split('.').collect();
        let stage = match parts.last().and_then(|p| StageKind::from_keyword(p)) {
            Some(kind) => {
                parts.pop();
                Some(kind)
            }
            None => None,
        };
        if parts.is_empty() || !parts.iter().all(|p| is_valid_name(p)) {
            return Err(PathSyntaxError(s.to_string()));
        }
        Ok(Path { segments: parts.into_iter().map(str::to_string).collect(), stage })
    }
}

/// Parses a path literal, panicking on malformed input. Intended for tests and
/// for building fixed models in code.
pub fn path(s: &str) -> Path {
    s.parse().unwrap_or_else(|e| panic!("{e}"))
}

/// A named node in the machine tree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Machine {
    pub name: String,
    pub stages: BTreeSet<StageKind>,
    pub children: Vec<Machine>,
    /// The top-level thing this machine is a projected part of.
    pub of_owner: Option<Path>,
    pub metadata: BTreeMap<String, String>,
}

impl Machine {
    pub fn new(name: impl Into<String>) -> Machine {
        Machine { name: name.into(), ..Machine::default() }
    }

    pub fn with_stages(mut self, stages: impl IntoIterator<Item = StageKind>) -> Machine {
        self.stages.extend(stages);
        self
    }

    pub fn with_child(mut self, child: Machine) -> Machine {
        self.children.push(child);
        self
    }

    pub fn with_owner(mut self, owner: Path) -> Machine {
        self.of_owner = Some(owner);
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Machine {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn child(&self, name: &str) -> Option<&Machine> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn has_stage(&self, kind: StageKind) -> bool {
        self.stages.contains(&kind)
    }
}

/// A directed arrow between two stages (or, in an elided model, two machines).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: Path,
    pub to: Path,
}

impl Edge {
    pub fn new(from: Path, to: Path) -> Edge {
        Edge { from, to }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// Solid arrow: a thing moves between stages.
    Flow,
    /// Dashed arrow: one stage sets off activity in another.
    Trigger,
}

/// Root container for a thinging machine model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub machines: Vec<Machine>,
    pub flows: Vec<Edge>,
    pub triggers: Vec<Edge>,
    pub events: Vec<Event>,
    pub chronology: Chronology,
    pub programs: Vec<Program>,
}

/// What a [`Path`] resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved<'a> {
    Machine(&'a Machine),
    Stage(&'a Machine, StageKind),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("`{0}` does not name anything in the model")]
    NotFound(Path),
    #[error("`{0}` is not a stage")]
    NotAStage(Path),
    #[error("`{0}` is not a machine")]
    NotAMachine(Path),
    #[error("flow {from} -> {to} is not allowed: {} may not flow into {}", .from.stage().map_or("?", |k| k.keyword()), .to.stage().map_or("?", |k| k.keyword()))]
    FlowGrammar { from: Path, to: Path },
    #[error("flow {from} -> {to} crosses machines but is not transfer -> transfer")]
    CrossMachineNonTransfer { from: Path, to: Path },
    #[error("{kind:?} {from} -> {to} already exists")]
    Duplicate { kind: EdgeKind, from: Path, to: Path },
    #[error("trigger from `{0}` to itself")]
    SelfLoop(Path),
    #[error("model is invalid ({} diagnostic(s), first: {})", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    InvalidInput(Vec<crate::Diagnostic>),
    #[error("machines to merge must be at least two distinct siblings")]
    NotSiblings,
    #[error("name `{0}` is already used among the siblings")]
    NameClash(String),
    #[error("`{0}` is not a valid machine name")]
    BadName(String),
    #[error("merging would collapse {kind:?} {from} -> {to} into a self-loop")]
    CollapsedEdge { kind: EdgeKind, from: Path, to: Path },
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn machine(&self, name: &str) -> Option<&Machine> {
        self.machines.iter().find(|m| m.name == name)
    }

    /// Looks up the machine named by a machine path (a stage segment is ignored).
    pub fn find_machine(&self, path: &Path) -> Option<&Machine> {
        let mut segments = path.segments().iter();
        let mut current = self.machine(segments.next()?)?;
        for seg in segments {
            current = current.child(seg)?;
        }
        Some(current)
    }

    pub(crate) fn find_machine_mut(&mut self, path: &Path) -> Option<&mut Machine> {
        let mut segments = path.segments().iter();
        let first = segments.next()?;
        let mut current = self.machines.iter_mut().find(|m| &m.name == first)?;
        for seg in segments {
            current = current.children.iter_mut().find(|c| &c.name == seg)?;
        }
        Some(current)
    }

    /// Resolves `path` to the unique machine or stage it names.
    pub fn resolve(&self, path: &Path) -> Result<Resolved<'_>, ModelError> {
        let machine = self.find_machine(path).ok_or_else(|| ModelError::NotFound(path.clone()))?;
        match path.stage() {
            None => Ok(Resolved::Machine(machine)),
            Some(kind) if machine.has_stage(kind) => Ok(Resolved::Stage(machine, kind)),
            Some(_) => Err(ModelError::NotFound(path.clone())),
        }
    }

    pub fn resolves(&self, path: &Path) -> bool {
        self.resolve(path).is_ok()
    }

    fn resolve_stage(&self, path: &Path) -> Result<StageKind, ModelError> {
        match self.resolve(path)? {
            Resolved::Stage(_, kind) => Ok(kind),
            Resolved::Machine(_) => Err(ModelError::NotAStage(path.clone())),
        }
    }

    /// Appends a flow between two stages if the flow grammar allows it.
    /// On error the model is left untouched.
    pub fn add_flow(&mut self, from: Path, to: Path) -> Result<&Edge, ModelError> {
        let from_kind = self.resolve_stage(&from)?;
        let to_kind = self.resolve_stage(&to)?;
        if from.machine_path() == to.machine_path() {
            if !grammar::allows(from_kind, to_kind) {
                return Err(ModelError::FlowGrammar { from, to });
            }
        } else if !grammar::allows_between_machines(from_kind, to_kind) {
            return Err(ModelError::CrossMachineNonTransfer { from, to });
        }
        let edge = Edge::new(from, to);
        if self.flows.contains(&edge) {
            return Err(ModelError::Duplicate { kind: EdgeKind::Flow, from: edge.from, to: edge.to });
        }
        self.flows.push(edge);
        Ok(self.flows.last().expect("just pushed"))
    }

    /// Appends a trigger between two distinct stages. Triggers are not
    /// constrained by the flow grammar.
    pub fn add_trigger(&mut self, from: Path, to: Path) -> Result<&Edge, ModelError> {
        self.resolve_stage(&from)?;
        self.resolve_stage(&to)?;
        if from == to {
            return Err(ModelError::SelfLoop(from));
        }
        let edge = Edge::new(from, to);
        if self.triggers.contains(&edge) {
            return Err(ModelError::Duplicate { kind: EdgeKind::Trigger, from: edge.from, to: edge.to });
        }
        self.triggers.push(edge);
        Ok(self.triggers.last().expect("just pushed"))
    }

    pub fn edges(&self, kind: EdgeKind) -> &[Edge] {
        match kind {
            EdgeKind::Flow => &self.flows,
            EdgeKind::Trigger => &self.triggers,
        }
    }

    /// Every machine in document order (pre-order), paired with its path.
    pub fn walk(&self) -> Vec<(Path, &Machine)> {
        fn visit<'a>(prefix: &Path, m: &'a Machine, out: &mut Vec<(Path, &'a Machine)>) {
            let here = prefix.child(&m.name);
            out.push((here.clone(), m));
            for c in &m.children {
                visit(&here, c, out);
            }
        }
        let mut out = Vec::new();
        for m in &self.machines {
            let here = Path::machine([m.name.clone()]);
            out.push((here.clone(), m));
            for c in &m.children {
                visit(&here, c, &mut out);
            }
        }
        out
    }

    pub fn machine_count(&self) -> usize {
        self.walk().len()
    }

    /// Every stage path in the model, in document order.
    pub fn stage_paths_all(&self) -> Vec<Path> {
        self.walk()
            .into_iter()
            .flat_map(|(p, m)| m.stages.iter().map(move |k| p.with_stage(*k)).collect::<Vec<_>>())
            .collect()
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn program(&self, name: &str) -> Option<&Program> {
        self.programs.iter().find(|p| p.name == name)
    }

    /// True if no machine carries a stage (the machine-level view).
    pub fn is_elided(&self) -> bool {
        self.walk().iter().all(|(_, m)| m.stages.is_empty())
    }
}
