//! Transformations between class specifications and thinging machine models.

mod class;
mod hierarchy;
mod pattern;

pub use class::{getter_name, setter_name, Attribute, ClassSpec, Method, MethodKind};
pub use hierarchy::{from_hierarchy, to_hierarchy, INHERITED_SUFFIX};
pub use pattern::{extract_class, from_class, to_class, ClassExtraction, GeneratedBundle};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BridgeError {
    #[error("invalid class spec: {0}")]
    InvalidSpec(String),
    #[error("model does not follow the generated class pattern: {0}")]
    NotClassShaped(String),
    #[error("class {class} extends unknown class {superclass}")]
    UnknownSuperclass { class: String, superclass: String },
    #[error("inheritance cycle through {0}")]
    InheritanceCycle(String),
    #[error("model does not follow the inheritance pattern: {0}")]
    NotHierarchyShaped(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
