use std::fs;
use std::path::PathBuf;

use tm_core::dsl::{self, Document};
use tm_core::json::{export_json, import_json};
use tm_core::{render_dot, Level, RenderOptions};

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "tm"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

fn parse(name: &str, text: &str) -> Document {
    match dsl::parse(text) {
        Ok(doc) => doc,
        Err(dsl::ParseError::Invalid { diagnostics, .. }) => panic!("{name}: {diagnostics:?}"),
        Err(e) => panic!("{name}: {e}"),
    }
}

#[test]
fn corpus_has_twenty_files() {
    assert!(corpus().len() >= 20);
}

#[test]
fn corpus_round_trips() {
    for (name, text) in corpus() {
        let doc = parse(&name, &text);
        let once = dsl::format_document(&doc).unwrap();
        let again = parse(&name, &once);
        assert_eq!(again.model, doc.model, "{name}");
        assert_eq!(again.classes, doc.classes, "{name}");
        assert_eq!(dsl::format_document(&again).unwrap(), once, "{name}: format is not idempotent");
    }
}

#[test]
fn corpus_json_and_dot_are_stable() {
    for (name, text) in corpus() {
        let model = parse(&name, &text).model;
        let json = export_json(&model).unwrap();
        assert_eq!(import_json(&json).unwrap(), model, "{name}");
        assert_eq!(export_json(&import_json(&json).unwrap()).unwrap(), json, "{name}");
        for level in [Level::Full, Level::Elided] {
            let opts = RenderOptions { level, ..RenderOptions::default() };
            assert_eq!(render_dot(&model, &opts).unwrap(), render_dot(&model, &opts).unwrap(), "{name}");
        }
    }
}

#[test]
fn every_element_has_a_span() {
    for (name, text) in corpus() {
        let doc = parse(&name, &text);
        for (p, _) in doc.model.walk() {
            assert!(doc.span_of(&p.to_string()).is_some(), "{name}: {p}");
        }
        for e in &doc.model.flows {
            assert!(doc.span_of(&format!("flow {} -> {}", e.from, e.to)).is_some(), "{name}");
        }
        for e in &doc.model.events {
            assert!(doc.span_of(&format!("event {}", e.id)).is_some(), "{name}");
        }
    }
}

#[test]
fn golden_author() {
    let golden = include_str!("golden/author.tm");
    let spec = tm_core::ClassSpec::new("Author")
        .attr("name", tm_core::ValueType::String)
        .attr("email", tm_core::ValueType::String)
        .attr("gender", tm_core::ValueType::Char);
    let model = tm_core::from_class(&spec).unwrap().into_model();
    assert_eq!(dsl::format(&model).unwrap(), golden);
    let parsed = parse("golden", golden).model;
    assert_eq!(parsed, model);
    let attrs: Vec<_> = parsed.machines[0].children.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(attrs, ["name", "email", "gender"]);
    for a in &parsed.machines[0].children {
        assert!(a.child("typedesc").is_some() && a.child("store").is_some());
    }
}
