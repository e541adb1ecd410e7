//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Run with `cargo test -p tm-core --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use tm_core::json::{export_json, import_json};
use tm_core::{
    check_actualization, dsl, from_class, from_hierarchy, parse, path, render_dot, simulate, stage_paths, to_class,
    to_hierarchy, validate, ClassSpec, Edge, Level, Machine, MethodKind, Model, RenderOptions, StageKind,
};

use common::{arb_class_spec, author, brute_force_paths};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bind(k: &str, v: &str) -> BTreeMap<String, String> {
    BTreeMap::from([(k.to_string(), v.to_string())])
}

fn plain(name: &str, methods: &[&str]) -> ClassSpec {
    methods.iter().fold(ClassSpec::new(name), |c, m| c.method(m, MethodKind::Plain))
}

fn by_name(mut v: Vec<ClassSpec>) -> Vec<ClassSpec> {
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

fn author_events() -> Outcome {
    let bundle = from_class(&author()).map_err(|e| e.to_string())?;
    let events = bundle.events();
    ensure!(events.len() == 7, "{} events", events.len());
    let tags: Vec<_> = events.iter().map(|e| e.kind.tag()).collect();
    ensure!(tags == ["ctor", "set", "get", "set", "get", "set", "get"], "tags {tags:?}");
    let ids: Vec<_> = events.iter().map(|e| e.id.as_str()).collect();
    ensure!(ids == ["E1", "E2", "E3", "E4", "E5", "E6", "E7"], "ids {ids:?}");
    let labels: Vec<_> = events.iter().map(|e| e.label.as_str()).collect();
    let expected = [
        "Create the constructor of the class Author",
        "setName",
        "getName",
        "setEmail",
        "getEmail",
        "setGender",
        "getGender",
    ];
    ensure!(labels == expected, "labels {labels:?}");
    Ok(())
}

fn class_round_trip() -> Outcome {
    let a = author().normalized();
    let back = to_class(&from_class(&a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(back == a, "Author: {back:?}");
    let mut runner = TestRunner::deterministic();
    let strategy = arb_class_spec();
    let mut seen_sizes = BTreeSet::new();
    for i in 0..100 {
        let spec = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        seen_sizes.insert(spec.attributes.len());
        let bundle = from_class(&spec).map_err(|e| format!("case {i}: {e}"))?;
        let back = to_class(&bundle).map_err(|e| format!("case {i}: {e}"))?;
        ensure!(back == spec, "case {i}: {spec:?} came back as {back:?}");
    }
    ensure!(seen_sizes.len() > 1, "generator only produced sizes {seen_sizes:?}");
    Ok(())
}

fn program_trace() -> Outcome {
    let m = parse(include_str!("corpus/author.tm")).map_err(|e| e.to_string())?.model;
    let p1 = m.program("P1").ok_or("no P1")?;
    let john = simulate(&m, p1, &bind("E2", "John")).map_err(|e| e.to_string())?;
    // hand expansion: E1, E2, then the repeat body ten times
    let expected: Vec<&str> = [["E1", "E2"].as_slice(), &["E3"; 10]].concat();
    ensure!(john.event_ids() == expected, "John: {:?}", john.event_ids());
    let name = john.final_state.get(&path("Author.name.store"));
    ensure!(name == Some("John"), "final name {name:?}");
    let jane = simulate(&m, p1, &bind("E2", "Jane")).map_err(|e| e.to_string())?;
    ensure!(jane.event_ids() == ["E1", "E2"], "Jane: {:?}", jane.event_ids());
    Ok(())
}

const ALLOWED: [(&str, &str); 7] = [
    ("create", "process"),
    ("create", "release"),
    ("process", "release"),
    ("receive", "process"),
    ("receive", "release"),
    ("release", "transfer"),
    ("transfer", "receive"),
];

fn flow_grammar() -> Outcome {
    let generated = [
        from_class(&author()).map_err(|e| e.to_string())?.into_model(),
        from_hierarchy(&[
            plain("Animals", &["sleep"]),
            plain("Human", &["work"]).extends("Animals"),
            plain("Academic", &["teach"]).extends("Human"),
        ])
        .map_err(|e| e.to_string())?,
        from_hierarchy(&[
            plain("Shape", &["draw"]),
            plain("Rectangle", &[]).extends("Shape"),
            plain("Triangle", &[]).extends("Shape"),
        ])
        .map_err(|e| e.to_string())?,
    ];
    for m in &generated {
        let d = validate(m);
        ensure!(d.is_empty(), "generated model has diagnostics {d:?}");
    }
    let mut rejected = 0;
    for from in StageKind::ALL {
        for to in StageKind::ALL {
            let mut m = Model::new();
            m.machines.push(Machine::new("M").with_stages(StageKind::ALL));
            m.flows.push(Edge::new(path(&format!("M.{}", from.keyword())), path(&format!("M.{}", to.keyword()))));
            let d = validate(&m);
            if ALLOWED.contains(&(from.keyword(), to.keyword())) {
                ensure!(d.is_empty(), "{from} -> {to} should be allowed: {d:?}");
            } else {
                rejected += 1;
                let codes: Vec<_> = d.iter().map(|d| d.code).collect();
                ensure!(codes == ["FLOW_GRAMMAR"], "{from} -> {to}: {codes:?}");
            }
        }
    }
    ensure!(rejected == 18, "{rejected} pairs rejected");
    Ok(())
}

fn path_oracle() -> Outcome {
    let m = parse(include_str!("corpus/full_machine.tm")).map_err(|e| e.to_string())?.model;
    let mut got = stage_paths(&m, &path("M")).map_err(|e| e.to_string())?;
    got.sort();
    let flows: HashSet<(StageKind, StageKind)> =
        m.flows.iter().map(|e| (e.from.stage().unwrap(), e.to.stage().unwrap())).collect();
    let oracle = brute_force_paths(&flows);
    ensure!(got.len() == 4, "{} paths: {got:?}", got.len());
    ensure!(got == oracle, "stage_paths {got:?} vs oracle {oracle:?}");
    Ok(())
}

fn hierarchy_round_trip() -> Outcome {
    let chain = vec![
        plain("Animals", &["sleep"]),
        plain("Human", &["work"]).extends("Animals"),
        plain("Academic", &["teach"]).extends("Human"),
    ];
    let fan = vec![
        plain("Shape", &["draw"]),
        plain("Rectangle", &[]).extends("Shape"),
        plain("Triangle", &[]).extends("Shape"),
    ];
    for specs in [chain, fan] {
        let m = from_hierarchy(&specs).map_err(|e| e.to_string())?;
        let back = to_hierarchy(&m).map_err(|e| e.to_string())?;
        ensure!(by_name(back.clone()) == by_name(specs.clone()), "{specs:?} came back as {back:?}");
    }
    Ok(())
}

fn chronology_properties() -> Outcome {
    let m = from_class(&author()).map_err(|e| e.to_string())?.into_model();
    let ids: Vec<String> = (1..=7).map(|i| format!("E{i}")).collect();
    let mut perms = Vec::new();
    permute(&mut ids.clone(), 0, &mut perms);
    ensure!(perms.len() == 5040, "{} permutations", perms.len());
    let mut accepted = 0;
    for seq in &perms {
        let pos = |id: &str| seq.iter().position(|x| x == id).unwrap();
        // oracle: E1 first, each setter before its getter
        let topological = pos("E1") == 0
            && [(2, 3), (4, 5), (6, 7)].iter().all(|(s, g)| pos(&format!("E{s}")) < pos(&format!("E{g}")));
        let ok = check_actualization(seq, &m.chronology).is_ok();
        ensure!(ok == topological, "{seq:?}: checker says {ok}");
        if pos("E1") != 0 {
            ensure!(!ok, "{seq:?} puts E1 late but passes");
        }
        accepted += usize::from(ok);
    }
    ensure!(accepted == 90, "{accepted} accepted");
    Ok(())
}

fn permute(items: &mut Vec<String>, k: usize, out: &mut Vec<Vec<String>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.retain(|p| p.extension().is_some_and(|e| e == "tm"));
    files.sort();
    ensure!(files.len() >= 20, "{} corpus files", files.len());
    for f in &files {
        let name = f.file_name().unwrap().to_string_lossy();
        let text = fs::read_to_string(f).map_err(|e| e.to_string())?;
        let doc = dsl::parse(&text).map_err(|e| format!("{name}: {e}"))?;
        let once = dsl::format_document(&doc).map_err(|e| format!("{name}: {e}"))?;
        let again = dsl::parse(&once).map_err(|e| format!("{name}: {e}"))?;
        let twice = dsl::format_document(&again).map_err(|e| format!("{name}: {e}"))?;
        ensure!(once == twice, "{name}: format not idempotent");
        ensure!(again.model == doc.model, "{name}: model changed");

        let json = export_json(&doc.model).map_err(|e| format!("{name}: {e}"))?;
        let imported = import_json(&json).map_err(|e| format!("{name}: {e}"))?;
        ensure!(imported == doc.model, "{name}: JSON import differs");
        ensure!(export_json(&imported).map_err(|e| e.to_string())? == json, "{name}: JSON not byte-stable");

        for level in [Level::Full, Level::Elided] {
            let opts = RenderOptions { level, ..RenderOptions::default() };
            let a = render_dot(&doc.model, &opts).map_err(|e| format!("{name}: {e}"))?;
            let b = render_dot(&doc.model, &opts).map_err(|e| format!("{name}: {e}"))?;
            ensure!(a == b, "{name}: DOT differs between runs");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 author yields seven tagged events", author_events),
        ("2 class round-trip (Author + 100 random)", class_round_trip),
        ("3 program trace John=12 Jane=2", program_trace),
        ("4 flow grammar over 25 pairs", flow_grammar),
        ("5 stage paths match brute force", path_oracle),
        ("6 hierarchy round-trip", hierarchy_round_trip),
        ("7 chronology linearizations", chronology_properties),
        ("8 corpus determinism and round-trips", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let ms = start.elapsed().as_secs_f64() * 1000.0;
        match result {
            Ok(()) => println!("PASS  {name}  ({ms:.1} ms)"),
            Err(why) => {
                println!("FAIL  {name}  ({ms:.1} ms): {why}");
                failed.push(name);
            }
        }
    }
    println!("\nacceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
