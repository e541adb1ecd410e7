//! Thinging machine (TM) models: hierarchical machines built from the five
//! stages create, process, receive, release and transfer, joined by flows and
//! triggers, with events, chronology and programs layered on top.
//!
//! The crate covers the metamodel and its validation ([`Model`], [`validate`]),
//! simplifications ([`elide_stages`], [`merge_machines`]), the `.tm` text format
//! ([`dsl`]), simulation ([`dynamics`]), class bridging ([`bridge`]), DOT output
//! ([`render`]) and JSON interchange ([`json`]).

pub mod bridge;
pub mod diagnostic;
pub mod dsl;
pub mod dynamics;
pub mod grammar;
#[path = "interchange.rs"]
pub mod json;
pub mod model;
pub mod query;
pub mod render;
pub mod transform;
pub mod types;
pub mod validate;

pub use bridge::{
    extract_class, from_class, from_hierarchy, to_class, to_hierarchy, Attribute, BridgeError, ClassSpec,
    GeneratedBundle, Method, MethodKind,
};
pub use diagnostic::{Diagnostic, Severity};
pub use dsl::{format, parse, Document, ParseError, SourceSpan};
pub use dynamics::{
    check_actualization, expand, simulate, Chronology, Event, EventKind, Program, SimState, Trace, Violation,
};
pub use json::{export_json, import_json, SchemaError};
pub use model::{path, Edge, EdgeKind, Machine, Model, ModelError, Path, Resolved, StageKind};
pub use query::{foreign_parts, stage_paths};
pub use render::{render_dot, Level, RenderOptions};
pub use transform::{elide_stages, merge_machines};
pub use types::ValueType;
pub use validate::{validate, validate_all};
