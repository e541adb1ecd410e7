use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::diagnostic::{codes, Diagnostic};
use crate::model::Model;

/// Precedence edges between event ids. Inserting an existing edge is a no-op.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chronology {
    edges: Vec<(String, String)>,
}

impl Chronology {
    pub fn new() -> Chronology {
        Chronology::default()
    }

    pub fn insert(&mut self, before: impl Into<String>, after: impl Into<String>) -> bool {
        let edge = (before.into(), after.into());
        if self.edges.contains(&edge) {
            return false;
        }
        self.edges.push(edge);
        true
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// For every event, the set of events that must come after it
    /// (transitive closure of the edges).
    pub fn successors_closure(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut direct: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.edges {
            direct.entry(a).or_default().push(b);
            direct.entry(b).or_default();
        }
        let mut closure = BTreeMap::new();
        for &start in direct.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<&str> = direct[start].clone();
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    stack.extend(direct[n].iter().copied());
                }
            }
            closure.insert(start, seen);
        }
        closure
    }

    /// Groups of events that lie on a common cycle, each sorted, in sorted order.
    pub fn cycles(&self) -> Vec<Vec<String>> {
        let mut graph = DiGraph::<&str, ()>::new();
        let mut index = HashMap::new();
        for (a, b) in &self.edges {
            let ia = *index.entry(a.as_str()).or_insert_with(|| graph.add_node(a));
            let ib = *index.entry(b.as_str()).or_insert_with(|| graph.add_node(b));
            graph.add_edge(ia, ib, ());
        }
        let mut out: Vec<Vec<String>> = tarjan_scc(&graph)
            .into_iter()
            .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
            .map(|scc| {
                let mut names: Vec<String> = scc.into_iter().map(|i| graph[i].to_string()).collect();
                names.sort();
                names
            })
            .collect();
        out.sort();
        out
    }
}

/// `before` had to occur before `after`, but the sequence first fired it later.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub before: String,
    pub after: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} must occur before {}", self.before, self.after)
    }
}

/// Checks that `sequence` respects `chronology`, comparing first occurrences.
///
/// Events may repeat, and events missing from the sequence impose nothing,
/// so any prefix or subsequence of an accepted sequence is accepted too. The
/// reported pair is found the way the simulator finds it: at the first
/// position where an event occurs after one of its successors already has.
pub fn check_actualization<S: AsRef<str>>(sequence: &[S], chronology: &Chronology) -> Result<(), Violation> {
    let closure = chronology.successors_closure();
    let mut seen: Vec<&str> = Vec::new();
    for id in sequence {
        let a = id.as_ref();
        if seen.contains(&a) {
            continue;
        }
        if let Some(later) = closure.get(a) {
            if let Some(b) = seen.iter().find(|b| later.contains(**b)) {
                return Err(Violation { before: a.to_string(), after: b.to_string() });
            }
        }
        seen.push(a);
    }
    Ok(())
}

pub(super) fn diagnostics(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (a, b) in model.chronology.edges() {
        for id in [a, b] {
            if model.event(id).is_none() {
                out.push(Diagnostic::error(
                    codes::UNKNOWN_EVENT,
                    format!("chronology {a} -> {b}"),
                    format!("`{id}` is not a defined event"),
                ));
            }
        }
    }
    for cycle in model.chronology.cycles() {
        out.push(Diagnostic::error(
            codes::CHRONO_CYCLE,
            "chronology",
            format!("events {} precede each other", cycle.join(", ")),
        ));
    }
    out
}
