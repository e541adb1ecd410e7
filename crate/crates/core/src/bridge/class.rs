use std::collections::HashSet;

use crate::model::is_valid_name;
use crate::types::ValueType;

use super::BridgeError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub ty: ValueType,
}

impl Attribute {
    pub fn new(name: impl Into<String>, ty: ValueType) -> Attribute {
        Attribute { name: name.into(), ty }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Constructor,
    /// Writes the named attribute.
    Setter(String),
    /// Reads the named attribute.
    Getter(String),
    Plain,
}

impl MethodKind {
    pub fn tag(&self) -> &'static str {
        match self {
            MethodKind::Constructor => "constructor",
            MethodKind::Setter(_) => "setter",
            MethodKind::Getter(_) => "getter",
            MethodKind::Plain => "plain",
        }
    }

    pub fn attribute(&self) -> Option<&str> {
        match self {
            MethodKind::Setter(a) | MethodKind::Getter(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Method {
    pub name: String,
    pub kind: MethodKind,
}

impl Method {
    pub fn new(name: impl Into<String>, kind: MethodKind) -> Method {
        Method { name: name.into(), kind }
    }

    pub fn plain(name: impl Into<String>) -> Method {
        Method::new(name, MethodKind::Plain)
    }
}

/// An object-oriented class: typed attributes, methods, optional superclass.
/// Visibility is not represented.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassSpec {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub methods: Vec<Method>,
    pub superclass: Option<String>,
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn setter_name(attr: &str) -> String {
    format!("set{}", capitalize(attr))
}

pub fn getter_name(attr: &str) -> String {
    format!("get{}", capitalize(attr))
}

impl ClassSpec {
    pub fn new(name: impl Into<String>) -> ClassSpec {
        ClassSpec { name: name.into(), ..ClassSpec::default() }
    }

    pub fn attr(mut self, name: &str, ty: ValueType) -> ClassSpec {
        self.attributes.push(Attribute::new(name, ty));
        self
    }

    pub fn method(mut self, name: &str, kind: MethodKind) -> ClassSpec {
        self.methods.push(Method::new(name, kind));
        self
    }

    pub fn extends(mut self, superclass: &str) -> ClassSpec {
        self.superclass = Some(superclass.to_string());
        self
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Classifies a bare method name by the usual conventions: the class name
    /// is the constructor, `setX`/`getX` access attribute `x`, anything else
    /// is plain.
    pub fn infer_kind(&self, method: &str) -> MethodKind {
        if method == self.name {
            return MethodKind::Constructor;
        }
        for a in &self.attributes {
            if method == setter_name(&a.name) {
                return MethodKind::Setter(a.name.clone());
            }
            if method == getter_name(&a.name) {
                return MethodKind::Getter(a.name.clone());
            }
        }
        MethodKind::Plain
    }

    /// Checks names, attribute uniqueness, accessor targets, and that there is
    /// at most one constructor (named after the class) and one setter and one
    /// getter per attribute.
    pub fn check(&self) -> Result<(), BridgeError> {
        let invalid = |msg: String| Err(BridgeError::InvalidSpec(format!("class {}: {msg}", self.name)));
        if !is_valid_name(&self.name) {
            return invalid(format!("`{}` is not a valid class name", self.name));
        }
        if let Some(s) = &self.superclass {
            if !is_valid_name(s) {
                return invalid(format!("`{s}` is not a valid superclass name"));
            }
        }
        let mut attrs = HashSet::new();
        for a in &self.attributes {
            if !is_valid_name(&a.name) {
                return invalid(format!("`{}` is not a valid attribute name", a.name));
            }
            if !attrs.insert(a.name.as_str()) {
                return invalid(format!("attribute `{}` declared twice", a.name));
            }
        }
        let mut names = HashSet::new();
        let mut accessors = HashSet::new();
        let mut ctors = 0;
        for m in &self.methods {
            if !is_valid_name(&m.name) {
                return invalid(format!("`{}` is not a valid method name", m.name));
            }
            if !names.insert(m.name.as_str()) {
                return invalid(format!("method `{}` declared twice", m.name));
            }
            match &m.kind {
                MethodKind::Constructor => {
                    ctors += 1;
                    if m.name != self.name {
                        return invalid(format!("constructor `{}` must be named after the class", m.name));
                    }
                }
                MethodKind::Setter(a) | MethodKind::Getter(a) => {
                    if !attrs.contains(a.as_str()) {
                        return invalid(format!("{} `{}` refers to unknown attribute `{a}`", m.kind.tag(), m.name));
                    }
                    if !accessors.insert((m.kind.tag(), a.as_str())) {
                        return invalid(format!("attribute `{a}` has more than one {}", m.kind.tag()));
                    }
                }
                MethodKind::Plain => {}
            }
        }
        if ctors > 1 {
            return invalid("more than one constructor".to_string());
        }
        Ok(())
    }

    /// The accessor-complete form: constructor first, then setter and getter
    /// for each attribute in declaration order, synthesizing any that are
    /// missing. Plain methods follow in their original order.
    pub fn normalized(&self) -> ClassSpec {
        let find = |kind: &MethodKind| self.methods.iter().find(|m| &m.kind == kind).map(|m| m.name.clone());
        let mut methods = vec![Method::new(self.name.clone(), MethodKind::Constructor)];
        for a in &self.attributes {
            let set = MethodKind::Setter(a.name.clone());
            let get = MethodKind::Getter(a.name.clone());
            methods.push(Method::new(find(&set).unwrap_or_else(|| setter_name(&a.name)), set));
            methods.push(Method::new(find(&get).unwrap_or_else(|| getter_name(&a.name)), get));
        }
        methods.extend(self.methods.iter().filter(|m| m.kind == MethodKind::Plain).cloned());
        ClassSpec { methods, ..self.clone() }
    }
}
