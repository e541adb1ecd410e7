//! Static validation of a [`Model`].

use std::collections::HashSet;

use crate::diagnostic::{self, codes, Diagnostic};
use crate::grammar;
use crate::model::{is_valid_name, Edge, EdgeKind, Machine, Model, Path, Resolved};

/// Checks every structural invariant of the static model: names, ownership
/// annotations, endpoint resolution, the flow grammar, and duplicate arrows.
///
/// Arrows come in two shapes. Stage-to-stage arrows obey the flow grammar;
/// machine-to-machine arrows are what [`crate::elide_stages`] produces and only
/// need to be non-looping and unique. Mixing the two in one arrow is an error.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_names(model, &mut out);
    check_owners(model, &mut out);
    check_edges(model, EdgeKind::Flow, &mut out);
    check_edges(model, EdgeKind::Trigger, &mut out);
    diagnostic::sort(&mut out);
    out
}

/// Static validation plus events, chronology and programs.
pub fn validate_all(model: &Model) -> Vec<Diagnostic> {
    let mut out = validate(model);
    out.extend(crate::dynamics::validate_dynamics(model));
    diagnostic::sort(&mut out);
    out
}

fn check_names(model: &Model, out: &mut Vec<Diagnostic>) {
    fn siblings(parent: Option<&Path>, machines: &[Machine], out: &mut Vec<Diagnostic>) {
        let mut seen = HashSet::new();
        for m in machines {
            let here = match parent {
                Some(p) if is_valid_name(&m.name) => p.child(&m.name).to_string(),
                Some(p) => format!("{p}.{}", m.name),
                None => m.name.clone(),
            };
            if !is_valid_name(&m.name) {
                out.push(Diagnostic::error(
                    codes::BAD_NAME,
                    &here,
                    format!("`{}` is not a valid machine name", m.name),
                ));
            }
            if !seen.insert(m.name.as_str()) {
                out.push(Diagnostic::error(
                    codes::DUPLICATE_MACHINE,
                    &here,
                    format!("machine name `{}` is used more than once here", m.name),
                ));
            }
            for key in m.metadata.keys() {
                if !is_identifier(key) {
                    out.push(Diagnostic::error(codes::BAD_NAME, &here, format!("`{key}` is not a valid metadata key")));
                }
            }
            if is_valid_name(&m.name) {
                let path = match parent {
                    Some(p) => p.child(&m.name),
                    None => Path::machine([m.name.clone()]),
                };
                siblings(Some(&path), &m.children, out);
            }
        }
    }
    siblings(None, &model.machines, out);
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_owners(model: &Model, out: &mut Vec<Diagnostic>) {
    for (here, m) in model.walk() {
        let Some(owner) = &m.of_owner else { continue };
        let loc = here.to_string();
        if owner.is_stage() || owner.segments().len() != 1 {
            out.push(Diagnostic::error(
                codes::BAD_OWNER,
                loc,
                format!("owner `{owner}` must name a top-level machine"),
            ));
        } else if model.machine(owner.last_name()).is_none() {
            out.push(Diagnostic::error(codes::DANGLING_PATH, loc, format!("owner `{owner}` does not exist")));
        } else if here.starts_with(owner) {
            out.push(Diagnostic::error(codes::BAD_OWNER, loc, format!("owner `{owner}` encloses this machine")));
        }
    }
}

fn edge_location(kind: EdgeKind, e: &Edge) -> String {
    match kind {
        EdgeKind::Flow => format!("flow {e}"),
        EdgeKind::Trigger => format!("trigger {} => {}", e.from, e.to),
    }
}

fn check_edges(model: &Model, kind: EdgeKind, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for e in model.edges(kind) {
        let loc = edge_location(kind, e);
        if !seen.insert(e) {
            let code = match kind {
                EdgeKind::Flow => codes::DUPLICATE_FLOW,
                EdgeKind::Trigger => codes::DUPLICATE_TRIGGER,
            };
            out.push(Diagnostic::error(code, &loc, "arrow declared more than once"));
            continue;
        }
        let from = model.resolve(&e.from);
        let to = model.resolve(&e.to);
        let mut dangling = false;
        for (p, r) in [(&e.from, &from), (&e.to, &to)] {
            if r.is_err() {
                out.push(Diagnostic::error(codes::DANGLING_PATH, &loc, format!("`{p}` does not resolve")));
                dangling = true;
            }
        }
        if dangling {
            continue;
        }
        match (from.unwrap(), to.unwrap()) {
            (Resolved::Stage(_, fk), Resolved::Stage(_, tk)) => {
                if kind == EdgeKind::Trigger {
                    if e.from == e.to {
                        out.push(Diagnostic::error(
                            codes::SELF_LOOP,
                            &loc,
                            "trigger starts and ends on the same stage",
                        ));
                    }
                } else if e.from.machine_path() == e.to.machine_path() {
                    if !grammar::allows(fk, tk) {
                        out.push(Diagnostic::error(
                            codes::FLOW_GRAMMAR,
                            &loc,
                            format!("{fk} may not flow into {tk} inside one machine"),
                        ));
                    }
                } else if !grammar::allows_between_machines(fk, tk) {
                    out.push(Diagnostic::error(
                        codes::CROSS_MACHINE_FLOW,
                        &loc,
                        format!("flows between machines must be transfer -> transfer, not {fk} -> {tk}"),
                    ));
                }
            }
            (Resolved::Machine(_), Resolved::Machine(_)) => {
                if e.from == e.to {
                    out.push(Diagnostic::error(codes::SELF_LOOP, &loc, "machine-level arrow loops on itself"));
                }
            }
            _ => out.push(Diagnostic::error(
                codes::MIXED_ENDPOINTS,
                &loc,
                "an arrow must join two stages or two machines",
            )),
        }
    }
}
