//! Read-only queries over a model.

use std::collections::BTreeSet;

use crate::model::{Machine, Model, ModelError, Path, Resolved, StageKind};

/// Every descendant of `grand` that is annotated as a part of some other
/// thing, paired with that owner, in document order.
pub fn foreign_parts(model: &Model, grand: &Path) -> Result<Vec<(Path, Path)>, ModelError> {
    let root = match model.resolve(grand)? {
        Resolved::Machine(m) => m,
        Resolved::Stage(..) => return Err(ModelError::NotAMachine(grand.clone())),
    };
    fn visit(here: &Path, m: &Machine, out: &mut Vec<(Path, Path)>) {
        for c in &m.children {
            let p = here.child(&c.name);
            if let Some(owner) = &c.of_owner {
                out.push((p.clone(), owner.clone()));
            }
            visit(&p, c, out);
        }
    }
    let mut out = Vec::new();
    visit(&grand.machine_path(), root, &mut out);
    Ok(out)
}

/// Enumerates the simple stage paths through one machine, following only the
/// flows internal to it.
///
/// A path starts at the create stage, or at the transfer stage acting as the
/// input port, and ends when it reaches transfer acting as the output port.
/// Results are in lexicographic order of stage kinds.
pub fn stage_paths(model: &Model, machine: &Path) -> Result<Vec<Vec<StageKind>>, ModelError> {
    let m = model.find_machine(machine).ok_or_else(|| ModelError::NotFound(machine.clone()))?;
    let here = machine.machine_path();
    let succ: BTreeSet<(StageKind, StageKind)> = model
        .flows
        .iter()
        .filter(|e| e.from.machine_path() == here && e.to.machine_path() == here)
        .filter_map(|e| Some((e.from.stage()?, e.to.stage()?)))
        .filter(|(a, b)| m.has_stage(*a) && m.has_stage(*b))
        .collect();

    fn dfs(succ: &BTreeSet<(StageKind, StageKind)>, path: &mut Vec<StageKind>, out: &mut Vec<Vec<StageKind>>) {
        let last = *path.last().expect("non-empty");
        for &(_, next) in succ.iter().filter(|(a, _)| *a == last) {
            if next == StageKind::Transfer {
                path.push(next);
                out.push(path.clone());
                path.pop();
            } else if !path.contains(&next) {
                path.push(next);
                dfs(succ, path, out);
                path.pop();
            }
        }
    }

    let mut out = Vec::new();
    for source in [StageKind::Create, StageKind::Transfer] {
        if m.has_stage(source) {
            dfs(&succ, &mut vec![source], &mut out);
        }
    }
    out.sort();
    Ok(out)
}
