//! The `.tm` text format: parser and canonical formatter.

mod format;
mod lexer;
mod parser;

use std::collections::BTreeMap;

pub use lexer::SourceSpan;

use crate::bridge::ClassSpec;
use crate::diagnostic::Diagnostic;
use crate::model::{Model, ModelError};
use crate::validate::validate_all;

/// A parsed `.tm` file.
///
/// `source_map` is keyed by the same strings diagnostics use as locations
/// (`Dog.name`, `flow a -> b`, `event E1`, ...), so a diagnostic can be
/// mapped back to the declaration that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub model: Model,
    pub classes: Vec<ClassSpec>,
    pub source_map: BTreeMap<String, SourceSpan>,
}

impl Document {
    pub fn span_of(&self, location: &str) -> Option<SourceSpan> {
        self.source_map.get(location).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { message: String, span: SourceSpan },
    #[error("model is invalid ({} diagnostic(s))", .diagnostics.len())]
    Invalid { diagnostics: Vec<Diagnostic>, document: Box<Document> },
}

impl ParseError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            ParseError::Syntax { span, .. } => Some(*span),
            ParseError::Invalid { .. } => None,
        }
    }
}

/// Parses and validates. Any validation error is returned as
/// [`ParseError::Invalid`] together with the parsed document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let doc = parse_unchecked(text)?;
    let diagnostics: Vec<Diagnostic> = validate_all(&doc.model).into_iter().filter(Diagnostic::is_error).collect();
    if diagnostics.is_empty() {
        Ok(doc)
    } else {
        Err(ParseError::Invalid { diagnostics, document: Box::new(doc) })
    }
}

/// Parses without validating the resulting model.
pub fn parse_unchecked(text: &str) -> Result<Document, ParseError> {
    parser::parse_document(text)
}

/// Canonical text for a valid model.
pub fn format(model: &Model) -> Result<String, ModelError> {
    format::format_model(model)
}

/// Canonical text for a model plus its class declarations.
pub fn format_document(doc: &Document) -> Result<String, ModelError> {
    format::format_document(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{path, StageKind};

    #[test]
    fn spec_examples() {
        let doc = parse("machine Dog { stage create stage process }").unwrap();
        assert_eq!(doc.model.machines.len(), 1);
        assert_eq!(doc.model.machines[0].stages.len(), 2);

        let err = parse("machine Dog { stage release }\nflow Dog.release ->").unwrap_err();
        assert_eq!(err.span().map(|s| (s.line, s.column)), Some((2, 20)));
    }

    #[test]
    fn nested_edges_are_relative() {
        let doc = parse(
            "machine A {\n  stage release\n  stage transfer\n  flow release -> transfer\n}\n\
             machine B { stage transfer }\nflow A.transfer -> B.transfer\n",
        )
        .unwrap();
        assert_eq!(doc.model.flows[0].from, path("A.release"));
        assert_eq!(doc.model.flows[1].to, path("B.transfer"));
        assert!(doc.span_of("flow A.release -> A.transfer").is_some());
        let text = format(&doc.model).unwrap();
        assert_eq!(parse(&text).unwrap().model, doc.model);
    }

    #[test]
    fn invalid_models_report_diagnostics() {
        let err = parse("machine A { stage receive stage create }\nflow A.receive -> A.create").unwrap_err();
        let ParseError::Invalid { diagnostics, document } = err else { panic!("expected Invalid") };
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].code, "FLOW_GRAMMAR");
        assert_eq!(document.span_of(&diagnostics[0].location).unwrap().line, 2);
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "machine { }",
            "machine A { stage create stage create }",
            "machine A { stage jump }",
            "machine create {}",
            "flow A.create",
            "flow create.A -> B",
            "event E { region: }",
            "program P { repeat x { } }",
            "program P { if A.x < 1 { } }",
            "class C { attr a: float; }",
            "\"unterminated",
            "event E { region: A kind: other }",
        ] {
            assert!(matches!(parse_unchecked(bad), Err(ParseError::Syntax { .. })), "{bad}");
        }
    }

    #[test]
    fn contextual_keywords() {
        let doc = parse_unchecked(
            "machine if { stage create }\nevent repeat { region: if.create }\nprogram P { repeat; if; }",
        )
        .unwrap();
        assert_eq!(doc.model.programs[0].body.len(), 2);
        assert!(doc.model.machines[0].has_stage(StageKind::Create));
    }

    #[test]
    fn empty_document() {
        let doc = parse("# nothing\n").unwrap();
        assert_eq!(doc.model, Model::default());
        assert_eq!(format(&doc.model).unwrap(), "# tm-dsl v1\n");
    }
}
