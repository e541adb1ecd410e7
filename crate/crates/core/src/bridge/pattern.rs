//! The attribute pattern: a class with typed attributes becomes a grand
//! machine whose attributes each receive, type-check, store and release values.

use std::collections::{BTreeSet, HashSet};

use crate::dynamics::{Chronology, Event, EventKind};
use crate::model::{Edge, Machine, Model, Path, StageKind::*};
use crate::transform::{elide_stages, merge_machines, prune_machines};
use crate::types::ValueType;
use crate::validate::validate_all;

use super::{Attribute, BridgeError, ClassSpec, Method, MethodKind};

pub(crate) const TYPEDESC: &str = "typedesc";
pub(crate) const STORE: &str = "store";
pub(crate) const TYPE_KEY: &str = "type";
pub(crate) const MERGED_NAME: &str = "attributes";

/// A class rendered as a model, with its method events and their chronology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedBundle {
    pub model: Model,
}

impl GeneratedBundle {
    pub fn events(&self) -> &[Event] {
        &self.model.events
    }

    pub fn chronology(&self) -> &Chronology {
        &self.model.chronology
    }

    pub fn into_model(self) -> Model {
        self.model
    }
}

impl From<Model> for GeneratedBundle {
    fn from(model: Model) -> Self {
        GeneratedBundle { model }
    }
}

fn attribute_machine(a: &Attribute) -> Machine {
    Machine::new(&a.name)
        .with_stages([Create, Transfer, Receive, Process, Release])
        .with_child(Machine::new(TYPEDESC).with_stages([Release, Transfer]).with_meta(TYPE_KEY, a.ty.name()))
        .with_child(Machine::new(STORE).with_stages([Transfer, Receive, Release]))
}

/// Flows and triggers of one attribute, in generation order.
fn attribute_arrows(class: &Path, attr: &str) -> (Vec<Edge>, Vec<Edge>) {
    let a = class.child(attr);
    let td = a.child(TYPEDESC);
    let st = a.child(STORE);
    let e = |from: Path, to: Path| Edge::new(from, to);
    let flows = vec![
        // null value created at construction time
        e(a.with_stage(Create), a.with_stage(Release)),
        // input, then the type check
        e(a.with_stage(Transfer), a.with_stage(Receive)),
        e(a.with_stage(Receive), a.with_stage(Process)),
        // stored type description, fetched for the comparison
        e(td.with_stage(Release), td.with_stage(Transfer)),
        e(td.with_stage(Transfer), a.with_stage(Transfer)),
        // accepted value leaves toward the store
        e(a.with_stage(Process), a.with_stage(Release)),
        e(a.with_stage(Release), a.with_stage(Transfer)),
        e(a.with_stage(Transfer), st.with_stage(Transfer)),
        e(st.with_stage(Transfer), st.with_stage(Receive)),
        // reading the stored value out
        e(st.with_stage(Release), st.with_stage(Transfer)),
        e(st.with_stage(Transfer), a.with_stage(Transfer)),
    ];
    let triggers =
        vec![e(class.with_stage(Create), a.with_stage(Create)), e(a.with_stage(Process), st.with_stage(Transfer))];
    (flows, triggers)
}

fn ctor_region(class: &Path, attrs: &[Attribute]) -> BTreeSet<Path> {
    let mut region = BTreeSet::from([class.with_stage(Create)]);
    for attr in attrs {
        let a = class.child(&attr.name);
        let st = a.child(STORE);
        region.extend([a.with_stage(Create), a.with_stage(Release), a.with_stage(Transfer)]);
        region.extend([st.with_stage(Transfer), st.with_stage(Receive)]);
    }
    region
}

fn set_region(a: &Path) -> BTreeSet<Path> {
    let td = a.child(TYPEDESC);
    let st = a.child(STORE);
    BTreeSet::from([
        a.with_stage(Transfer),
        a.with_stage(Receive),
        a.with_stage(Process),
        a.with_stage(Release),
        td.with_stage(Release),
        td.with_stage(Transfer),
        st.with_stage(Transfer),
        st.with_stage(Receive),
    ])
}

fn get_region(a: &Path) -> BTreeSet<Path> {
    let st = a.child(STORE);
    BTreeSet::from([st.with_stage(Release), st.with_stage(Transfer), a.with_stage(Transfer)])
}

fn ctor_label(class: &str) -> String {
    format!("Create the constructor of the class {class}")
}

/// Generates the model of a class.
///
/// The grand machine creates the object; each attribute gets a machine that
/// receives a value, checks it against its type-descriptor sub-machine, and
/// hands it to its store sub-machine, from which it can be released again.
/// Events are numbered `E1` (constructor) then setter/getter per attribute in
/// declaration order. The chronology puts `E1` first and each setter before
/// its getter.
///
/// Missing accessors are synthesized. Plain methods and superclasses are not
/// part of this pattern (see [`super::from_hierarchy`]) and are rejected.
pub fn from_class(spec: &ClassSpec) -> Result<GeneratedBundle, BridgeError> {
    spec.check()?;
    if let Some(m) = spec.methods.iter().find(|m| m.kind == MethodKind::Plain) {
        return Err(BridgeError::InvalidSpec(format!(
            "class {}: plain method `{}` has no place in the attribute pattern",
            spec.name, m.name
        )));
    }
    if spec.superclass.is_some() {
        return Err(BridgeError::InvalidSpec(format!(
            "class {}: inheritance is modeled by from_hierarchy, not from_class",
            spec.name
        )));
    }
    if let Some(a) = spec.attributes.iter().find(|a| a.name == TYPEDESC || a.name == STORE) {
        return Err(BridgeError::InvalidSpec(format!(
            "class {}: attribute name `{}` is reserved by the attribute pattern",
            spec.name, a.name
        )));
    }
    let spec = spec.normalized();
    let class = Path::machine([spec.name.clone()]);

    let mut model = Model::new();
    let mut grand = Machine::new(&spec.name).with_stages([Create]);
    grand.children.extend(spec.attributes.iter().map(attribute_machine));
    model.machines.push(grand);
    for a in &spec.attributes {
        let (flows, triggers) = attribute_arrows(&class, &a.name);
        for f in flows {
            model.add_flow(f.from, f.to)?;
        }
        for t in triggers {
            model.add_trigger(t.from, t.to)?;
        }
    }

    let mut ids = Vec::new();
    for (i, method) in spec.methods.iter().enumerate() {
        let id = format!("E{}", i + 1);
        let (label, region, kind) = match &method.kind {
            MethodKind::Constructor => {
                (ctor_label(&spec.name), ctor_region(&class, &spec.attributes), EventKind::Ctor(class.clone()))
            }
            MethodKind::Setter(a) => (method.name.clone(), set_region(&class.child(a)), EventKind::Set(class.child(a))),
            MethodKind::Getter(a) => (method.name.clone(), get_region(&class.child(a)), EventKind::Get(class.child(a))),
            MethodKind::Plain => unreachable!("rejected above"),
        };
        model.events.push(Event { id: id.clone(), label, region, time: None, meta: None, kind });
        ids.push(id);
    }
    for id in ids.iter().skip(1) {
        model.chronology.insert(ids[0].clone(), id.clone());
    }
    for pair in ids[1..].chunks(2) {
        if let [set, get] = pair {
            model.chronology.insert(set.clone(), get.clone());
        }
    }
    debug_assert!(validate_all(&model).is_empty(), "{:?}", validate_all(&model));
    Ok(GeneratedBundle { model })
}

/// The class recovered from a bundle, plus the two intermediate simplified
/// views: type checking and stages removed, then attributes merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassExtraction {
    pub spec: ClassSpec,
    pub simplified: Model,
    pub merged: Model,
}

fn not_shaped(msg: impl Into<String>) -> BridgeError {
    BridgeError::NotClassShaped(msg.into())
}

fn read_attribute(class: &Path, m: &Machine) -> Result<Attribute, BridgeError> {
    let here = class.child(&m.name);
    let full: BTreeSet<_> = [Create, Process, Receive, Release, Transfer].into();
    if m.stages != full || m.of_owner.is_some() || !m.metadata.is_empty() {
        return Err(not_shaped(format!("`{here}` is not an attribute machine")));
    }
    let names: Vec<&str> = m.children.iter().map(|c| c.name.as_str()).collect();
    if names != [TYPEDESC, STORE] {
        return Err(not_shaped(format!("`{here}` must contain exactly typedesc and store")));
    }
    let (td, st) = (&m.children[0], &m.children[1]);
    let td_ok = td.stages == [Release, Transfer].into() && td.children.is_empty() && td.of_owner.is_none();
    let st_ok = st.stages == [Transfer, Receive, Release].into()
        && st.children.is_empty()
        && st.of_owner.is_none()
        && st.metadata.is_empty();
    if !td_ok || !st_ok || td.metadata.len() != 1 {
        return Err(not_shaped(format!("`{here}` has malformed typedesc or store machines")));
    }
    let ty: ValueType = td
        .metadata
        .get(TYPE_KEY)
        .ok_or_else(|| not_shaped(format!("`{here}.{TYPEDESC}` records no type")))?
        .parse()
        .map_err(|e| not_shaped(format!("`{here}.{TYPEDESC}`: {e}")))?;
    Ok(Attribute::new(&m.name, ty))
}

/// Recovers the class from a generated model, strictly: any deviation from
/// the generated pattern is [`BridgeError::NotClassShaped`].
///
/// Method names come from the event tags and labels. A model carrying no
/// events at all yields the accessor-complete method set implied by its
/// attribute machines.
pub fn extract_class(model: &Model) -> Result<ClassExtraction, BridgeError> {
    let errors: Vec<_> = validate_all(model).into_iter().filter(|d| d.is_error()).collect();
    if let Some(d) = errors.first() {
        return Err(not_shaped(format!("model does not validate: {d}")));
    }
    let [grand] = model.machines.as_slice() else {
        return Err(not_shaped("expected exactly one top-level machine"));
    };
    if grand.stages != [Create].into() || grand.of_owner.is_some() || !grand.metadata.is_empty() {
        return Err(not_shaped(format!("`{}` must carry only a create stage", grand.name)));
    }
    let class = Path::machine([grand.name.clone()]);
    let attributes = grand.children.iter().map(|m| read_attribute(&class, m)).collect::<Result<Vec<_>, _>>()?;

    let mut flows = HashSet::new();
    let mut triggers = HashSet::new();
    for a in &attributes {
        let (f, t) = attribute_arrows(&class, &a.name);
        flows.extend(f);
        triggers.extend(t);
    }
    if model.flows.iter().cloned().collect::<HashSet<_>>() != flows {
        return Err(not_shaped("flows differ from the attribute pattern"));
    }
    if model.triggers.iter().cloned().collect::<HashSet<_>>() != triggers {
        return Err(not_shaped("triggers differ from the attribute pattern"));
    }

    // (1) drop the type-checking machinery and the stages
    let typedescs: Vec<Path> = attributes.iter().map(|a| class.child(&a.name).child(TYPEDESC)).collect();
    let simplified = elide_stages(&prune_machines(model, &typedescs))?;
    // (2) one box for all attributes
    let attr_paths: Vec<Path> = attributes.iter().map(|a| class.child(&a.name)).collect();
    let merged =
        if attr_paths.len() >= 2 { merge_machines(&simplified, &attr_paths, MERGED_NAME)? } else { simplified.clone() };
    // (3) methods from the events
    let methods = read_methods(model, &class, &attributes)?;

    let spec = ClassSpec { name: grand.name.clone(), attributes, methods, superclass: None };
    Ok(ClassExtraction { spec, simplified, merged })
}

fn read_methods(model: &Model, class: &Path, attributes: &[Attribute]) -> Result<Vec<Method>, BridgeError> {
    let class_name = class.last_name().to_string();
    if model.events.is_empty() {
        let bare = ClassSpec { name: class_name, attributes: attributes.to_vec(), ..ClassSpec::default() };
        return Ok(bare.normalized().methods);
    }
    let find = |kind: &EventKind| -> Result<&Event, BridgeError> {
        let mut hits = model.events.iter().filter(|e| &e.kind == kind);
        match (hits.next(), hits.next()) {
            (Some(e), None) => Ok(e),
            (None, _) => Err(not_shaped(format!("no `{kind}` event"))),
            (Some(_), Some(_)) => Err(not_shaped(format!("more than one `{kind}` event"))),
        }
    };
    if model.events.len() != 1 + 2 * attributes.len() {
        return Err(not_shaped("events are not one constructor plus a setter and getter per attribute"));
    }
    find(&EventKind::Ctor(class.clone()))?;
    let mut methods = vec![Method::new(class_name, MethodKind::Constructor)];
    for a in attributes {
        let p = class.child(&a.name);
        for (kind, method) in [
            (EventKind::Set(p.clone()), MethodKind::Setter(a.name.clone())),
            (EventKind::Get(p.clone()), MethodKind::Getter(a.name.clone())),
        ] {
            let event = find(&kind)?;
            if !crate::model::is_valid_name(&event.label) {
                return Err(not_shaped(format!("event {} label `{}` is not a method name", event.id, event.label)));
            }
            methods.push(Method::new(event.label.clone(), method));
        }
    }
    Ok(methods)
}

/// The class of a generated bundle, via the three simplification steps.
pub fn to_class(bundle: &GeneratedBundle) -> Result<ClassSpec, BridgeError> {
    extract_class(&bundle.model).map(|x| x.spec)
}
