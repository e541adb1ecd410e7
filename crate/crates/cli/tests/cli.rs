use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn tm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm")).args(args).env("TM_NO_COLOR", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn author() -> String {
    corpus("author.tm").to_string_lossy().into_owned()
}

#[test]
fn simulate_prints_trace() {
    let o = tm(&["simulate", &author(), "--program", "P1", "--bind", "E2=John"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 12);
    assert_eq!(out.lines().nth(1).unwrap(), "1\tE2\tapplied\tAuthor.name.store: null -> \"John\"");

    let o = tm(&["simulate", &author(), "--program", "P1", "--bind", "E2=Jane"]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("t.txt");
    let json = dir.path().join("t.json");
    let base = ["simulate", &author(), "--program", "P1", "--bind", "E2=John", "--trace"];
    let o = tm(&[&base[..], &[text.to_str().unwrap()]].concat());
    assert_eq!(fs::read_to_string(&text).unwrap(), stdout(&o));
    let o = tm(&[&base[..], &[json.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["firings"].as_array().unwrap().len(), 12);
    assert_eq!(v["final_state"]["Author.name.store"], "John");
}

#[test]
fn validate_reports_flow_grammar() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.tm");
    fs::write(&broken, "machine A { stage receive stage create }\nflow A.receive -> A.create\n").unwrap();
    let o = tm(&["validate", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error[FLOW_GRAMMAR] "), "{err}");
    assert!(err.contains("broken.tm:2:1"), "{err}");
    assert!(!err.contains('\x1b'));

    let o = tm(&["validate", &author()]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).is_empty());
}

#[test]
fn usage_errors_exit_2() {
    for args in [&[][..], &["parse"], &["frobnicate"], &["render", "x.tm", "--level", "medium"]] {
        let o = tm(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(stderr(&o).contains("error[USAGE]"), "{args:?}: {}", stderr(&o));
    }
    let o = tm(&["simulate", &author(), "--program", "P1", "--bind", "E2"]);
    assert_eq!(code(&o), 2);
    let o = tm(&["parse", "/nonexistent/file.tm"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("error[IO]"));
}

#[test]
fn syntax_and_schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tm");
    fs::write(&bad, "machine Dog { stage release }\nflow Dog.release ->").unwrap();
    let o = tm(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error[SYNTAX] "));
    assert!(stderr(&o).contains("bad.tm:2:20"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"machines": [], "flows": [{"from": "A.create", "to": "A.process"}]}"#).unwrap();
    let o = tm(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("error[SCHEMA]"), "{}", stderr(&o));
}

#[test]
fn simulation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("m.tm");
    fs::write(&f, fs::read_to_string(corpus("author.tm")).unwrap() + "\nprogram Bad {\n  E3;\n  E1;\n}\n").unwrap();
    let f = f.to_str().unwrap();
    let o = tm(&["simulate", f, "--program", "Bad"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[CHRONOLOGY]"));
    assert_eq!(stdout(&o).lines().count(), 1, "partial trace holds E3 only");
    let o = tm(&["simulate", f, "--program", "Nope"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[UNKNOWN_PROGRAM]"));
    let o = tm(&["simulate", f, "--program", "P1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[MISSING_BINDING]"));
}

#[test]
fn render_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dog.dot");
    let dog = corpus("dog.tm");
    let o = tm(&["render", dog.to_str().unwrap(), "--level", "full", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let written = fs::read_to_string(&out).unwrap();
    assert!(written.starts_with("digraph tm {"));
    assert_eq!(written.matches("style=dashed").count(), 1);
    assert_eq!(stdout(&tm(&["render", dog.to_str().unwrap()])), written);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1, "no temporary files left behind");

    let o = tm(&["render", dog.to_str().unwrap(), "--events", "E1"]);
    assert!(stdout(&o).contains("color=red"));
    let o = tm(&["render", dog.to_str().unwrap(), "--events", "E1,E9"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[UNKNOWN_EVENT]"));
    let o = tm(&["render", &author(), "--level", "elided", "--no-triggers"]);
    assert!(!stdout(&o).contains("label=\"Create\""));
    assert!(!stdout(&o).contains("dashed"));
}

#[test]
fn class_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let tm_out = dir.path().join("author.tm");
    let json_out = dir.path().join("author.json");
    let classes = corpus("classes.tm");
    let o = tm(&["from-class", classes.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[BRIDGE]"));
    let o = tm(&["from-class", classes.to_str().unwrap(), "--class", "Author", "-o", tm_out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/author.tm");
    assert_eq!(fs::read_to_string(&tm_out).unwrap(), fs::read_to_string(golden).unwrap());

    let o = tm(&["to-class", tm_out.to_str().unwrap(), "-o", json_out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tm(&["from-class", json_out.to_str().unwrap()]);
    assert_eq!(stdout(&o), fs::read_to_string(&tm_out).unwrap());

    let o = tm(&["to-class", corpus("dog.tm").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[BRIDGE]"));
}

#[test]
fn hierarchy_commands() {
    let h = corpus("hierarchy.tm");
    let o = tm(&["to-class", h.to_str().unwrap(), "--hierarchy"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<_> = v.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names.len(), 3);
    for n in ["Animals", "Human", "Academic"] {
        assert!(names.iter().any(|x| x == n));
    }
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("h.json");
    fs::write(&j, stdout(&o)).unwrap();
    let regenerated = stdout(&tm(&["from-class", j.to_str().unwrap(), "--hierarchy"]));
    let again = dir.path().join("h.tm");
    fs::write(&again, &regenerated).unwrap();
    assert_eq!(stdout(&tm(&["to-class", again.to_str().unwrap(), "--hierarchy"])), stdout(&o));
}

#[test]
fn events_listing() {
    let o = tm(&["events", &author()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let (events, chronology) = out.split_once("\n\n").unwrap();
    let ids: Vec<_> = events.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ids, ["E1", "E2", "E3", "E4", "E5", "E6", "E7"]);
    assert!(events.lines().next().unwrap().starts_with("E1\tctor\tCreate the constructor of the class Author\t"));
    assert_eq!(chronology.lines().count(), 9);
    assert!(chronology.lines().any(|l| l == "E2 -> E3"));
}

#[test]
fn parse_converts_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("dog.json");
    let dog = corpus("dog.tm");
    let text = stdout(&tm(&["parse", dog.to_str().unwrap()]));
    assert!(text.starts_with("# tm-dsl v1\n"));
    let o = tm(&["parse", dog.to_str().unwrap(), "--json", "-o", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&tm(&["parse", json.to_str().unwrap()])), text);
}
