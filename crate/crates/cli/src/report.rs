//! Error reporting and output plumbing.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::Path;
use std::process::ExitCode;

use tm_core::{Diagnostic, Document, Severity};

/// A failed command: the lines to print and the exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub lines: Vec<Line>,
}

#[derive(Debug)]
pub struct Line {
    pub severity: Severity,
    pub code: String,
    pub text: String,
}

impl Failure {
    /// Usage or parse problem (exit 2).
    pub fn usage(code: &str, text: impl Into<String>) -> Failure {
        Failure { code: 2, lines: vec![Line::error(code, text)] }
    }

    /// Validation or transform problem (exit 1).
    pub fn invalid(code: &str, text: impl Into<String>) -> Failure {
        Failure { code: 1, lines: vec![Line::error(code, text)] }
    }

    pub fn diagnostics(file: &str, doc: Option<&Document>, diags: &[Diagnostic]) -> Failure {
        Failure { code: 1, lines: diags.iter().map(|d| Line::from_diagnostic(file, doc, d)).collect() }
    }

    pub fn exit(self) -> ExitCode {
        let color = use_color();
        let mut err = io::stderr().lock();
        for line in &self.lines {
            let _ = writeln!(err, "{}", line.render(color));
        }
        ExitCode::from(self.code)
    }
}

impl Line {
    pub fn error(code: &str, text: impl Into<String>) -> Line {
        Line { severity: Severity::Error, code: code.to_string(), text: text.into() }
    }

    pub fn from_diagnostic(file: &str, doc: Option<&Document>, d: &Diagnostic) -> Line {
        let at = match doc.and_then(|doc| doc.span_of(&d.location)) {
            Some(span) => format!("{file}:{span}"),
            None => file.to_string(),
        };
        Line { severity: d.severity, code: d.code.to_string(), text: format!("{at}: {}: {}", d.location, d.message) }
    }

    pub fn render(&self, color: bool) -> String {
        let tag = format!("{}[{}]", self.severity, self.code);
        if color {
            let paint = match self.severity {
                Severity::Error => "\x1b[1;31m",
                Severity::Warning => "\x1b[1;33m",
            };
            format!("{paint}{tag}\x1b[0m {}", self.text)
        } else {
            format!("{tag} {}", self.text)
        }
    }
}

/// Warnings that do not stop a command.
pub fn warn(file: &str, doc: &Document, diags: &[Diagnostic]) {
    let color = use_color();
    for d in diags.iter().filter(|d| !d.is_error()) {
        eprintln!("{}", Line::from_diagnostic(file, Some(doc), d).render(color));
    }
}

fn use_color() -> bool {
    std::env::var_os("TM_NO_COLOR").is_none() && io::stderr().is_terminal()
}

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(target: &Path, contents: &str) -> Result<(), Failure> {
    let io_err = |e: &dyn std::fmt::Display| Failure::invalid("IO", format!("{}: {e}", target.display()));
    let dir = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_err(&e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(&e))?;
    tmp.persist(target).map_err(|e| io_err(&e.error))?;
    Ok(())
}

/// Writes to `out` if given, otherwise to stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(|e| Failure::invalid("IO", format!("stdout: {e}")))
        }
    }
}

pub fn read(file: &Path) -> Result<String, Failure> {
    fs::read_to_string(file).map_err(|e| Failure::usage("IO", format!("{}: {e}", file.display())))
}
