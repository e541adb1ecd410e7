//! Model-to-model simplifications: stage elision, sibling merge, pruning.

use std::collections::{BTreeSet, HashSet};

use crate::dynamics::{EventKind, Stmt};
use crate::model::{is_valid_name, Edge, EdgeKind, Machine, Model, ModelError, Path, Resolved};
use crate::validate::validate;

fn require_valid(model: &Model) -> Result<(), ModelError> {
    let errors: Vec<_> = validate(model).into_iter().filter(|d| d.is_error()).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ModelError::InvalidInput(errors))
    }
}

/// Lifts every arrow of `kind` to the machines owning its endpoints.
///
/// Arrows that stay inside one machine vanish; the rest are deduplicated,
/// keeping first-occurrence order.
pub fn lifted_edges(model: &Model, kind: EdgeKind) -> Vec<Edge> {
    let mut seen = HashSet::new();
    model
        .edges(kind)
        .iter()
        .map(|e| Edge::new(e.from.machine_path(), e.to.machine_path()))
        .filter(|e| e.from != e.to)
        .filter(|e| seen.insert(e.clone()))
        .collect()
}

/// Removes every stage, keeping the machine tree and lifting arrows and event
/// regions to machine level. Idempotent.
pub fn elide_stages(model: &Model) -> Result<Model, ModelError> {
    require_valid(model)?;
    fn strip(m: &mut Machine) {
        m.stages.clear();
        m.children.iter_mut().for_each(strip);
    }
    let mut out = model.clone();
    out.machines.iter_mut().for_each(strip);
    out.flows = lifted_edges(model, EdgeKind::Flow);
    out.triggers = lifted_edges(model, EdgeKind::Trigger);
    for event in &mut out.events {
        event.region = event.region.iter().map(Path::machine_path).collect();
    }
    Ok(out)
}

/// Replaces two or more sibling machines with a single machine.
///
/// Stage sets and metadata are unioned (first sibling wins on key clashes),
/// children of the merged machines are renamed `<original>_<child>`, and every
/// path in the model is re-targeted. Arrows that become identical are
/// deduplicated; an arrow that would become a self-loop is an error.
pub fn merge_machines(model: &Model, paths: &[Path], merged_name: &str) -> Result<Model, ModelError> {
    let mut targets = Vec::new();
    for p in paths {
        match model.resolve(p)? {
            Resolved::Machine(_) => {}
            Resolved::Stage(..) => return Err(ModelError::NotAMachine(p.clone())),
        }
        if !targets.contains(p) {
            targets.push(p.clone());
        }
    }
    if targets.len() < 2 {
        return Err(ModelError::NotSiblings);
    }
    let parent = targets[0].parent();
    if targets.iter().any(|p| p.parent() != parent) {
        return Err(ModelError::NotSiblings);
    }
    if !is_valid_name(merged_name) {
        return Err(ModelError::BadName(merged_name.to_string()));
    }
    let names: HashSet<&str> = targets.iter().map(|p| p.last_name()).collect();

    let mut out = model.clone();
    let siblings: &mut Vec<Machine> = match &parent {
        Some(p) => &mut out.find_machine_mut(p).expect("parent resolves").children,
        None => &mut out.machines,
    };
    if siblings.iter().any(|m| m.name == merged_name && !names.contains(m.name.as_str())) {
        return Err(ModelError::NameClash(merged_name.to_string()));
    }

    let position = siblings.iter().position(|m| names.contains(m.name.as_str())).expect("targets exist");
    let mut merged = Machine::new(merged_name);
    let mut child_names = HashSet::new();
    let mut kept = Vec::with_capacity(siblings.len());
    for m in siblings.drain(..) {
        if !names.contains(m.name.as_str()) {
            kept.push(m);
            continue;
        }
        merged.stages.extend(m.stages.iter().copied());
        for (k, v) in &m.metadata {
            merged.metadata.entry(k.clone()).or_insert_with(|| v.clone());
        }
        if merged.of_owner.is_none() {
            merged.of_owner = m.of_owner.clone();
        }
        for mut c in m.children {
            c.name = format!("{}_{}", m.name, c.name);
            if !child_names.insert(c.name.clone()) {
                return Err(ModelError::NameClash(c.name));
            }
            merged.children.push(c);
        }
    }
    kept.insert(position, merged);
    *siblings = kept;

    let depth = parent.as_ref().map_or(0, |p| p.segments().len());
    let retarget = |p: &Path| -> Path {
        let segs = p.segments();
        if segs.len() <= depth || !names.contains(segs[depth].as_str()) {
            return p.clone();
        }
        if let Some(par) = &parent {
            if segs[..depth] != par.segments()[..] {
                return p.clone();
            }
        }
        let mut next: Vec<String> = segs[..depth].to_vec();
        next.push(merged_name.to_string());
        if segs.len() > depth + 1 {
            next.push(format!("{}_{}", segs[depth], segs[depth + 1]));
            next.extend(segs[depth + 2..].iter().cloned());
        }
        Path::from_parts(next, p.stage())
    };
    map_paths(&mut out, &retarget);

    for kind in [EdgeKind::Flow, EdgeKind::Trigger] {
        let edges = match kind {
            EdgeKind::Flow => &mut out.flows,
            EdgeKind::Trigger => &mut out.triggers,
        };
        let mut seen = HashSet::new();
        let mut deduped = Vec::with_capacity(edges.len());
        for e in edges.drain(..) {
            if e.from == e.to {
                return Err(ModelError::CollapsedEdge { kind, from: e.from, to: e.to });
            }
            if seen.insert(e.clone()) {
                deduped.push(e);
            }
        }
        *edges = deduped;
    }
    Ok(out)
}

/// Deletes the machines at `paths` with their descendants, every arrow
/// touching them, and every event-region element inside them.
pub fn prune_machines(model: &Model, paths: &[Path]) -> Model {
    let doomed = |p: &Path| paths.iter().any(|d| p.starts_with(d));
    let mut out = model.clone();
    fn prune(list: &mut Vec<Machine>, here: Option<&Path>, doomed: &dyn Fn(&Path) -> bool) {
        list.retain(|m| {
            let p = here.map_or_else(|| Path::machine([m.name.clone()]), |h| h.child(&m.name));
            !doomed(&p)
        });
        for m in list.iter_mut() {
            let p = here.map_or_else(|| Path::machine([m.name.clone()]), |h| h.child(&m.name));
            prune(&mut m.children, Some(&p), doomed);
        }
    }
    prune(&mut out.machines, None, &doomed);
    out.flows.retain(|e| !doomed(&e.from) && !doomed(&e.to));
    out.triggers.retain(|e| !doomed(&e.from) && !doomed(&e.to));
    for event in &mut out.events {
        event.region.retain(|p| !doomed(p));
    }
    out
}

/// Applies `f` to every path stored in the model.
pub(crate) fn map_paths(model: &mut Model, f: &dyn Fn(&Path) -> Path) {
    fn owners(m: &mut Machine, f: &dyn Fn(&Path) -> Path) {
        if let Some(o) = &m.of_owner {
            m.of_owner = Some(f(o));
        }
        m.children.iter_mut().for_each(|c| owners(c, f));
    }
    fn stmts(body: &mut [Stmt], f: &dyn Fn(&Path) -> Path) {
        for s in body {
            match s {
                Stmt::Fire(_) => {}
                Stmt::If { cond, then, otherwise } => {
                    cond.lhs = f(&cond.lhs);
                    stmts(then, f);
                    if let Some(o) = otherwise {
                        stmts(o, f);
                    }
                }
                Stmt::Repeat { body, .. } => stmts(body, f),
            }
        }
    }
    model.machines.iter_mut().for_each(|m| owners(m, f));
    for e in model.flows.iter_mut().chain(model.triggers.iter_mut()) {
        e.from = f(&e.from);
        e.to = f(&e.to);
    }
    for event in &mut model.events {
        event.region = event.region.iter().map(f).collect::<BTreeSet<_>>();
        event.kind = match &event.kind {
            EventKind::Plain => EventKind::Plain,
            EventKind::Ctor(p) => EventKind::Ctor(f(p)),
            EventKind::Set(p) => EventKind::Set(f(p)),
            EventKind::Get(p) => EventKind::Get(f(p)),
        };
    }
    for program in &mut model.programs {
        stmts(&mut program.body, f);
    }
}

/// The machine-name tree, used to check that transforms keep hierarchy intact.
pub fn name_tree(model: &Model) -> Vec<Path> {
    model.walk().into_iter().map(|(p, _)| p).collect()
}
