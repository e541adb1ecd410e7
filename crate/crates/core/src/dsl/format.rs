use std::fmt::Write;

use super::Document;
use crate::bridge::ClassSpec;
use crate::dynamics::{CmpOp, EventKind, Literal, Stmt};
use crate::model::{Machine, Model, ModelError};
use crate::validate::validate_all;

pub(super) const HEADER: &str = "# tm-dsl v1";

pub(super) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(super) fn format_model(model: &Model) -> Result<String, ModelError> {
    format_parts(model, &[])
}

pub(super) fn format_document(doc: &Document) -> Result<String, ModelError> {
    format_parts(&doc.model, &doc.classes)
}

fn format_parts(model: &Model, classes: &[ClassSpec]) -> Result<String, ModelError> {
    let diags: Vec<_> = validate_all(model).into_iter().filter(|d| d.is_error()).collect();
    if !diags.is_empty() {
        return Err(ModelError::InvalidInput(diags));
    }
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');

    let mut sections: Vec<String> = Vec::new();
    for m in &model.machines {
        let mut s = String::new();
        machine(&mut s, m, 0);
        sections.push(s);
    }
    let mut edges = String::new();
    for e in &model.flows {
        writeln!(edges, "flow {} -> {}", e.from, e.to).unwrap();
    }
    for e in &model.triggers {
        writeln!(edges, "trigger {} => {}", e.from, e.to).unwrap();
    }
    if !edges.is_empty() {
        sections.push(edges);
    }
    for e in &model.events {
        let mut s = format!("event {}", e.id);
        if !e.label.is_empty() {
            write!(s, " {}", quote(&e.label)).unwrap();
        }
        s.push_str(" {\n");
        let region: Vec<String> = e.region.iter().map(|p| p.to_string()).collect();
        writeln!(s, "  region: {}", region.join(", ")).unwrap();
        match &e.kind {
            EventKind::Plain => {}
            k => writeln!(s, "  kind: {k}").unwrap(),
        }
        if let Some(t) = &e.time {
            writeln!(s, "  time: {}", quote(t)).unwrap();
        }
        if let Some(m) = &e.meta {
            writeln!(s, "  meta: {}", quote(m)).unwrap();
        }
        s.push_str("}\n");
        sections.push(s);
    }
    if !model.chronology.is_empty() {
        let mut s = String::from("chronology {\n");
        for (a, b) in model.chronology.edges() {
            writeln!(s, "  {a} -> {b}").unwrap();
        }
        s.push_str("}\n");
        sections.push(s);
    }
    for p in &model.programs {
        let mut s = format!("program {} {{\n", p.name);
        block(&mut s, &p.body, 1);
        s.push_str("}\n");
        sections.push(s);
    }
    for c in classes {
        sections.push(class(c));
    }
    for s in sections {
        out.push('\n');
        out.push_str(&s);
    }
    Ok(out)
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn machine(out: &mut String, m: &Machine, depth: usize) {
    indent(out, depth);
    write!(out, "machine {}", m.name).unwrap();
    if let Some(owner) = &m.of_owner {
        write!(out, " of {owner}").unwrap();
    }
    if m.stages.is_empty() && m.metadata.is_empty() && m.children.is_empty() {
        out.push_str(" {}\n");
        return;
    }
    out.push_str(" {\n");
    for k in &m.stages {
        indent(out, depth + 1);
        writeln!(out, "stage {k}").unwrap();
    }
    for (key, value) in &m.metadata {
        indent(out, depth + 1);
        writeln!(out, "meta {key}: {}", quote(value)).unwrap();
    }
    for c in &m.children {
        machine(out, c, depth + 1);
    }
    indent(out, depth);
    out.push_str("}\n");
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for stmt in body {
        indent(out, depth);
        match stmt {
            Stmt::Fire(id) => writeln!(out, "{id};").unwrap(),
            Stmt::If { cond, then, otherwise } => {
                let op = match cond.op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                };
                let rhs = match &cond.rhs {
                    Literal::Null => "null".to_string(),
                    Literal::Str(s) => quote(s),
                    Literal::Int(i) => i.to_string(),
                };
                writeln!(out, "if {} {op} {rhs} {{", cond.lhs).unwrap();
                block(out, then, depth + 1);
                indent(out, depth);
                match otherwise {
                    Some(o) => {
                        out.push_str("} else {\n");
                        block(out, o, depth + 1);
                        indent(out, depth);
                        out.push_str("}\n");
                    }
                    None => out.push_str("}\n"),
                }
            }
            Stmt::Repeat { count, body } => {
                writeln!(out, "repeat {count} {{").unwrap();
                block(out, body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
    }
}

fn class(c: &ClassSpec) -> String {
    let mut s = format!("class {}", c.name);
    if let Some(sup) = &c.superclass {
        write!(s, " extends {sup}").unwrap();
    }
    s.push_str(" {\n");
    for a in &c.attributes {
        writeln!(s, "  attr {}: {};", a.name, a.ty).unwrap();
    }
    for m in &c.methods {
        writeln!(s, "  method {};", m.name).unwrap();
    }
    s.push_str("}\n");
    s
}
