//! Graphviz DOT output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::diagnostic::Diagnostic;
use crate::model::{Edge, Machine, Model, ModelError, Path};
use crate::transform::elide_stages;
use crate::validate::validate_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Level {
    /// Every stage is a node.
    #[default]
    Full,
    /// Machines only, arrows lifted to machine level.
    Elided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub level: Level,
    pub show_triggers: bool,
    /// Events whose regions are highlighted. `None` highlights nothing.
    pub show_events: Option<Vec<String>>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { level: Level::Full, show_triggers: true, show_events: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("model is invalid ({} diagnostic(s))", .0.len())]
    InvalidInput(Vec<Diagnostic>),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
}

const HIGHLIGHT: &str = "color=red, penwidth=2";

fn q(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Anchor node standing in for a machine as an arrow endpoint.
fn anchor(p: &Path) -> String {
    q(&format!("{p}#"))
}

fn node_id(p: &Path) -> String {
    if p.is_stage() {
        q(&p.to_string())
    } else {
        anchor(p)
    }
}

struct Ctx<'a> {
    anchors: BTreeSet<Path>,
    /// Highlighted element -> event ids touching it.
    marks: BTreeMap<&'a Path, Vec<&'a str>>,
}

impl Ctx<'_> {
    fn marked(&self, p: &Path) -> Option<String> {
        self.marks.get(p).map(|ids| ids.join(","))
    }

    fn covers(&self, endpoint: &Path) -> bool {
        self.marks.contains_key(endpoint) || (endpoint.is_stage() && self.marks.contains_key(&endpoint.machine_path()))
    }
}

/// Renders the model as a DOT digraph: machines are nested clusters, stages
/// are nodes, flows are solid edges and triggers dashed ones.
pub fn render_dot(model: &Model, opts: &RenderOptions) -> Result<String, RenderError> {
    let errors: Vec<_> = validate_all(model).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(RenderError::InvalidInput(errors));
    }
    if let Some(ids) = &opts.show_events {
        if let Some(bad) = ids.iter().find(|id| model.event(id).is_none()) {
            return Err(RenderError::UnknownEvent(bad.clone()));
        }
    }
    let elided;
    let model = match opts.level {
        Level::Full => model,
        Level::Elided => {
            elided = elide_stages(model).map_err(|e| match e {
                ModelError::InvalidInput(d) => RenderError::InvalidInput(d),
                other => unreachable!("elide_stages only fails on invalid input: {other}"),
            })?;
            &elided
        }
    };

    let triggers: &[Edge] = if opts.show_triggers { &model.triggers } else { &[] };
    let mut ctx = Ctx { anchors: BTreeSet::new(), marks: BTreeMap::new() };
    for e in model.flows.iter().chain(triggers) {
        for p in [&e.from, &e.to] {
            if !p.is_stage() {
                ctx.anchors.insert(p.clone());
            }
        }
    }
    if let Some(ids) = &opts.show_events {
        for id in ids {
            let event = model.event(id).expect("checked above");
            for p in &event.region {
                let entry = ctx.marks.entry(p).or_default();
                if !entry.contains(&event.id.as_str()) {
                    entry.push(&event.id);
                }
            }
        }
    }

    let mut out = String::from("digraph tm {\n  compound=true;\n  node [shape=box];\n");
    for m in &model.machines {
        cluster(&mut out, &ctx, &Path::machine([m.name.clone()]), m, 1);
    }
    for (edges, style) in [(&model.flows[..], ""), (triggers, "style=dashed")] {
        for e in edges {
            let mut attrs: Vec<String> = Vec::new();
            if !style.is_empty() {
                attrs.push(style.to_string());
            }
            if !e.from.is_stage() {
                attrs.push(format!("ltail={}", q(&format!("cluster_{}", e.from))));
            }
            if !e.to.is_stage() {
                attrs.push(format!("lhead={}", q(&format!("cluster_{}", e.to))));
            }
            if ctx.covers(&e.from) && ctx.covers(&e.to) {
                attrs.push(HIGHLIGHT.to_string());
            }
            write!(out, "  {} -> {}", node_id(&e.from), node_id(&e.to)).unwrap();
            if !attrs.is_empty() {
                write!(out, " [{}]", attrs.join(", ")).unwrap();
            }
            out.push_str(";\n");
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn cluster(out: &mut String, ctx: &Ctx, here: &Path, m: &Machine, depth: usize) {
    let pad = "  ".repeat(depth);
    writeln!(out, "{pad}subgraph {} {{", q(&format!("cluster_{here}"))).unwrap();
    let mut label = m.name.clone();
    if let Some(owner) = &m.of_owner {
        write!(label, " (of {owner})").unwrap();
    }
    writeln!(out, "{pad}  label={};", q(&label)).unwrap();
    if let Some(ids) = ctx.marked(here) {
        writeln!(out, "{pad}  {HIGHLIGHT};").unwrap();
        writeln!(out, "{pad}  xlabel={};", q(&ids)).unwrap();
    }
    if ctx.anchors.contains(here) {
        writeln!(out, "{pad}  {} [shape=point, style=invis];", anchor(here)).unwrap();
    }
    for k in &m.stages {
        let p = here.with_stage(*k);
        write!(out, "{pad}  {} [label={}", q(&p.to_string()), q(k.label())).unwrap();
        if let Some(ids) = ctx.marked(&p) {
            write!(out, ", {HIGHLIGHT}, xlabel={}", q(&ids)).unwrap();
        }
        out.push_str("];\n");
    }
    for c in &m.children {
        cluster(out, ctx, &here.child(&c.name), c, depth + 1);
    }
    writeln!(out, "{pad}}}").unwrap();
}
