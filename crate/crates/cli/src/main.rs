mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use tm_core::dsl::{self, Document, ParseError};
use tm_core::dynamics::DynamicsError;
use tm_core::json::{self, class_to_value, export_class_json, import_classes_json};
use tm_core::render::RenderError;
use tm_core::{
    from_class, from_hierarchy, render_dot, simulate, to_class, to_hierarchy, validate_all, ClassSpec, Level,
    RenderOptions,
};

use report::{emit, read, warn, Failure};

/// Thinging machine models: check, render, simulate and convert to and from classes.
#[derive(Parser)]
#[command(name = "tm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate, then print the canonical form.
    Parse {
        file: PathBuf,
        /// Print JSON instead of `.tm` text.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report every diagnostic for a model.
    Validate { file: PathBuf },
    /// Write the model as Graphviz DOT.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = LevelArg::Full)]
        level: LevelArg,
        /// Highlight the regions of these events.
        #[arg(long, value_delimiter = ',')]
        events: Option<Vec<String>>,
        #[arg(long)]
        no_triggers: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a program and print its trace.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        program: String,
        /// Value supplied to a set event, as EVENT=VALUE.
        #[arg(long = "bind", value_name = "EVENT=VALUE")]
        bindings: Vec<String>,
        /// Also write the trace here; JSON when the name ends in `.json`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Generate a model from class declarations (`.tm` or JSON).
    FromClass {
        file: PathBuf,
        /// Treat the classes as an inheritance hierarchy.
        #[arg(long, conflicts_with = "class")]
        hierarchy: bool,
        /// Convert only this class from a file declaring several.
        #[arg(long)]
        class: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover the class view of a generated model as JSON.
    ToClass {
        file: PathBuf,
        #[arg(long)]
        hierarchy: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List events and chronology edges.
    Events { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Full,
    Elided,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprint!("{}", e.render());
            return Failure::usage("USAGE", "no command given").exit();
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_end().strip_prefix("error: ").unwrap_or(text.trim_end());
            return Failure::usage("USAGE", text).exit();
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Parse { file, json, output } => {
            let doc = load(&file)?;
            let text = if json { json::export_json(&doc.model) } else { dsl::format_document(&doc) };
            emit(output.as_deref(), &text.map_err(|e| Failure::invalid("MODEL", e.to_string()))?)
        }
        Command::Validate { file } => {
            let doc = load_unchecked(&file)?;
            let diags = validate_all(&doc.model);
            warn(&display(&file), &doc, &diags);
            let errors: Vec<_> = diags.into_iter().filter(|d| d.is_error()).collect();
            if errors.is_empty() {
                Ok(())
            } else {
                Err(Failure::diagnostics(&display(&file), Some(&doc), &errors))
            }
        }
        Command::Render { file, level, events, no_triggers, output } => {
            let doc = load(&file)?;
            let level = match level {
                LevelArg::Full => Level::Full,
                LevelArg::Elided => Level::Elided,
            };
            let opts = RenderOptions { level, show_triggers: !no_triggers, show_events: events };
            let dot = render_dot(&doc.model, &opts).map_err(|e| match e {
                RenderError::InvalidInput(d) => Failure::diagnostics(&display(&file), Some(&doc), &d),
                RenderError::UnknownEvent(id) => {
                    Failure::invalid("UNKNOWN_EVENT", format!("no event `{id}` in {}", display(&file)))
                }
            })?;
            emit(output.as_deref(), &dot)
        }
        Command::Simulate { file, program, bindings, trace } => {
            simulate_cmd(&file, &program, &bindings, trace.as_deref())
        }
        Command::FromClass { file, hierarchy, class, output } => {
            let mut classes = load_classes(&file)?;
            if let Some(name) = class {
                classes.retain(|c| c.name == name);
                if classes.is_empty() {
                    return Err(Failure::invalid("BRIDGE", format!("no class `{name}` in {}", display(&file))));
                }
            }
            let model = if hierarchy {
                from_hierarchy(&classes).map_err(bridge)?
            } else {
                let [spec] = classes.as_slice() else {
                    return Err(Failure::invalid(
                        "BRIDGE",
                        format!(
                            "{} declares {} classes; pick one with --class or pass --hierarchy",
                            display(&file),
                            classes.len()
                        ),
                    ));
                };
                from_class(spec).map_err(bridge)?.into_model()
            };
            let text = dsl::format(&model).map_err(|e| Failure::invalid("BRIDGE", e.to_string()))?;
            emit(output.as_deref(), &text)
        }
        Command::ToClass { file, hierarchy, output } => {
            let doc = load(&file)?;
            let text = if hierarchy {
                let specs = to_hierarchy(&doc.model).map_err(bridge)?;
                let mut s = serde_json::to_string_pretty(&Value::Array(specs.iter().map(class_to_value).collect()))
                    .expect("values serialize");
                s.push('\n');
                s
            } else {
                export_class_json(&to_class(&doc.model.into()).map_err(bridge)?)
            };
            emit(output.as_deref(), &text)
        }
        Command::Events { file } => {
            let doc = load(&file)?;
            let mut out = String::new();
            for e in &doc.model.events {
                let region: Vec<String> = e.region.iter().map(|p| p.to_string()).collect();
                out.push_str(&format!("{}\t{}\t{}\t{}\n", e.id, e.kind.tag(), e.label, region.join(", ")));
            }
            if !doc.model.chronology.is_empty() {
                out.push('\n');
                for (a, b) in doc.model.chronology.edges() {
                    out.push_str(&format!("{a} -> {b}\n"));
                }
            }
            emit(None, &out)
        }
    }
}

fn simulate_cmd(file: &Path, program: &str, bindings: &[String], trace_out: Option<&Path>) -> Result<(), Failure> {
    let doc = load(file)?;
    let mut bound = BTreeMap::new();
    for b in bindings {
        let Some((event, value)) = b.split_once('=') else {
            return Err(Failure::usage("USAGE", format!("--bind expects EVENT=VALUE, got `{b}`")));
        };
        bound.insert(event.to_string(), value.to_string());
    }
    let Some(p) = doc.model.program(program) else {
        return Err(Failure::invalid("UNKNOWN_PROGRAM", format!("no program `{program}` in {}", display(file))));
    };
    let trace = match simulate(&doc.model, p, &bound) {
        Ok(t) => t,
        Err(DynamicsError::ChronologyViolation { violation, partial }) => {
            emit(None, &partial.to_text())?;
            return Err(Failure::invalid("CHRONOLOGY", violation.to_string()));
        }
        Err(DynamicsError::Invalid(d)) => return Err(Failure::diagnostics(&display(file), Some(&doc), &d)),
        Err(e) => {
            let code = match e {
                DynamicsError::MissingBinding(_) => "MISSING_BINDING",
                DynamicsError::UnknownEvent(_) => "UNKNOWN_EVENT",
                DynamicsError::StepLimit => "STEP_LIMIT",
                _ => "DYNAMICS",
            };
            return Err(Failure::invalid(code, e.to_string()));
        }
    };
    let text = trace.to_text();
    if let Some(out) = trace_out {
        let contents = if out.extension().is_some_and(|e| e == "json") {
            let mut s = serde_json::to_string_pretty(&trace.to_json()).expect("values serialize");
            s.push('\n');
            s
        } else {
            text.clone()
        };
        report::write_atomic(out, &contents)?;
    }
    emit(None, &text)
}

fn display(file: &Path) -> String {
    file.display().to_string()
}

fn is_json(file: &Path) -> bool {
    file.extension().is_some_and(|e| e == "json")
}

fn bridge(e: tm_core::BridgeError) -> Failure {
    Failure::invalid("BRIDGE", e.to_string())
}

fn syntax(file: &Path, e: ParseError) -> Failure {
    match e {
        ParseError::Syntax { message, span } => {
            Failure::usage("SYNTAX", format!("{}:{span}: {message}", display(file)))
        }
        ParseError::Invalid { diagnostics, document } => {
            Failure::diagnostics(&display(file), Some(&document), &diagnostics)
        }
    }
}

/// Reads a `.tm` or `.json` model without validating it.
fn load_unchecked(file: &Path) -> Result<Document, Failure> {
    let text = read(file)?;
    if is_json(file) {
        let model =
            json::import_json(&text).map_err(|e| Failure::usage("SCHEMA", format!("{}: {e}", display(file))))?;
        Ok(Document { model, ..Document::default() })
    } else {
        dsl::parse_unchecked(&text).map_err(|e| syntax(file, e))
    }
}

/// Reads a model and fails on any validation error.
fn load(file: &Path) -> Result<Document, Failure> {
    let doc = load_unchecked(file)?;
    let diags = validate_all(&doc.model);
    if diags.iter().any(|d| d.is_error()) {
        let errors: Vec<_> = diags.into_iter().filter(|d| d.is_error()).collect();
        return Err(Failure::diagnostics(&display(file), Some(&doc), &errors));
    }
    warn(&display(file), &doc, &diags);
    Ok(doc)
}

fn load_classes(file: &Path) -> Result<Vec<ClassSpec>, Failure> {
    let text = read(file)?;
    let classes = if is_json(file) {
        import_classes_json(&text).map_err(|e| Failure::usage("SCHEMA", format!("{}: {e}", display(file))))?
    } else {
        dsl::parse_unchecked(&text).map_err(|e| syntax(file, e))?.classes
    };
    if classes.is_empty() {
        return Err(Failure::invalid("BRIDGE", format!("{} declares no classes", display(file))));
    }
    Ok(classes)
}
