//! Inheritance as behavior flow: a subclass receives each inherited method as
//! a thing flowing down from its superclass.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::model::{is_valid_name, Edge, Machine, Model, Path, StageKind, StageKind::*};
use crate::validate::validate;

use super::{BridgeError, ClassSpec, Method, MethodKind};

/// Suffix of the machine through which a subclass receives an inherited method.
pub const INHERITED_SUFFIX: &str = "_inherited";

fn own_stages() -> std::collections::BTreeSet<StageKind> {
    [Create, Release, Transfer].into()
}

fn inherited_stages() -> std::collections::BTreeSet<StageKind> {
    [Transfer, Receive].into()
}

/// Superclass chain of `class`, nearest first.
fn ancestors<'a>(class: &str, by_name: &HashMap<&str, &'a ClassSpec>) -> Result<Vec<&'a ClassSpec>, BridgeError> {
    let mut chain = Vec::new();
    let mut seen = HashSet::from([class.to_string()]);
    let mut current = by_name[class];
    while let Some(sup) = &current.superclass {
        let parent = *by_name
            .get(sup.as_str())
            .ok_or_else(|| BridgeError::UnknownSuperclass { class: current.name.clone(), superclass: sup.clone() })?;
        if !seen.insert(parent.name.clone()) {
            return Err(BridgeError::InheritanceCycle(class.to_string()));
        }
        chain.push(parent);
        current = parent;
    }
    Ok(chain)
}

/// Builds one machine per class. Each plain method `m` of class `K` is a
/// machine `K.m` that creates and releases the behavior; each subclass `S`
/// gets `S.m_inherited` (transfer, receive) fed by a flow from the nearest
/// superclass's copy, so behavior travels down the chain class by class.
///
/// Only plain methods take part; attributes, accessors and overriding are
/// rejected.
pub fn from_hierarchy(specs: &[ClassSpec]) -> Result<Model, BridgeError> {
    let mut by_name = HashMap::new();
    for spec in specs {
        spec.check()?;
        if !spec.attributes.is_empty() {
            return Err(BridgeError::InvalidSpec(format!(
                "class {}: attributes are not part of the hierarchy view",
                spec.name
            )));
        }
        if let Some(m) = spec.methods.iter().find(|m| m.kind != MethodKind::Plain) {
            return Err(BridgeError::InvalidSpec(format!("class {}: `{}` is not a plain method", spec.name, m.name)));
        }
        if by_name.insert(spec.name.as_str(), spec).is_some() {
            return Err(BridgeError::InvalidSpec(format!("class {} declared twice", spec.name)));
        }
    }

    let mut model = Model::new();
    let mut chains = Vec::new();
    for spec in specs {
        let chain = ancestors(&spec.name, &by_name)?;
        let mut machine = Machine::new(&spec.name);
        let mut seen: HashSet<&str> = HashSet::new();
        for m in &spec.methods {
            if m.name.ends_with(INHERITED_SUFFIX) {
                return Err(BridgeError::InvalidSpec(format!(
                    "class {}: method name `{}` is reserved",
                    spec.name, m.name
                )));
            }
            seen.insert(&m.name);
            machine.children.push(Machine::new(&m.name).with_stages(own_stages()));
        }
        for anc in chain.iter().rev() {
            for m in &anc.methods {
                if !seen.insert(&m.name) {
                    return Err(BridgeError::InvalidSpec(format!(
                        "class {}: method `{}` is defined more than once along the chain",
                        spec.name, m.name
                    )));
                }
                machine
                    .children
                    .push(Machine::new(format!("{}{INHERITED_SUFFIX}", m.name)).with_stages(inherited_stages()));
            }
        }
        model.machines.push(machine);
        chains.push(chain);
    }

    for (spec, chain) in specs.iter().zip(&chains) {
        let class = Path::machine([spec.name.clone()]);
        for m in &spec.methods {
            let own = class.child(&m.name);
            model.add_flow(own.with_stage(Create), own.with_stage(Release))?;
            model.add_flow(own.with_stage(Release), own.with_stage(Transfer))?;
        }
        let Some(parent) = chain.first() else { continue };
        let parent_path = Path::machine([parent.name.clone()]);
        for anc in chain.iter().rev() {
            for m in &anc.methods {
                let source = if anc.name == parent.name {
                    parent_path.child(&m.name)
                } else {
                    parent_path.child(format!("{}{INHERITED_SUFFIX}", m.name))
                };
                let target = class.child(format!("{}{INHERITED_SUFFIX}", m.name));
                model.add_flow(source.with_stage(Transfer), target.with_stage(Transfer))?;
                model.add_flow(target.with_stage(Transfer), target.with_stage(Receive))?;
            }
        }
    }
    debug_assert!(validate(&model).is_empty());
    Ok(model)
}

fn not_shaped(msg: impl Into<String>) -> BridgeError {
    BridgeError::NotHierarchyShaped(msg.into())
}

/// Recovers classes, their plain methods, and `extends` edges from a model
/// built by [`from_hierarchy`]. A method belongs to the class whose machine
/// creates it; superclasses are read off the inherited-behavior flows.
pub fn to_hierarchy(model: &Model) -> Result<Vec<ClassSpec>, BridgeError> {
    if let Some(d) = validate(model).into_iter().find(|d| d.is_error()) {
        return Err(not_shaped(format!("model does not validate: {d}")));
    }
    if !model.triggers.is_empty() {
        return Err(not_shaped("triggers have no meaning in the inheritance view"));
    }

    // class -> own methods / inherited method names
    let mut own: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut inherited: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for class in &model.machines {
        if !class.stages.is_empty() || class.of_owner.is_some() || !class.metadata.is_empty() {
            return Err(not_shaped(format!("class machine `{}` must be a bare container", class.name)));
        }
        own.insert(&class.name, Vec::new());
        inherited.insert(&class.name, Vec::new());
        for m in &class.children {
            let bare = m.children.is_empty() && m.of_owner.is_none() && m.metadata.is_empty();
            match m.name.strip_suffix(INHERITED_SUFFIX) {
                Some(base) if bare && m.stages == inherited_stages() && is_valid_name(base) => {
                    inherited.get_mut(class.name.as_str()).expect("inserted").push(base)
                }
                None if bare && m.stages == own_stages() => {
                    own.get_mut(class.name.as_str()).expect("inserted").push(&m.name)
                }
                _ => {
                    return Err(not_shaped(format!(
                        "`{}.{}` is neither a method nor an inherited behavior",
                        class.name, m.name
                    )))
                }
            }
        }
    }

    let mut expected: HashSet<Edge> = HashSet::new();
    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    for class in &model.machines {
        let cp = Path::machine([class.name.clone()]);
        for m in &own[class.name.as_str()] {
            let p = cp.child(*m);
            expected.insert(Edge::new(p.with_stage(Create), p.with_stage(Release)));
            expected.insert(Edge::new(p.with_stage(Release), p.with_stage(Transfer)));
        }
        for m in &inherited[class.name.as_str()] {
            let target = cp.child(format!("{m}{INHERITED_SUFFIX}"));
            expected.insert(Edge::new(target.with_stage(Transfer), target.with_stage(Receive)));
            let incoming: Vec<&Edge> = model
                .flows
                .iter()
                .filter(|e| e.to == target.with_stage(Transfer) && e.from.machine_path().parent() != Some(cp.clone()))
                .collect();
            let [edge] = incoming.as_slice() else {
                return Err(not_shaped(format!("`{target}` must receive its behavior from exactly one class")));
            };
            let source = edge.from.machine_path();
            let source_class = edge.from.segments()[0].as_str();
            let source_ok = source.segments().len() == 2
                && edge.from.stage() == Some(Transfer)
                && (source.last_name() == *m || source.last_name() == format!("{m}{INHERITED_SUFFIX}"));
            if !source_ok {
                return Err(not_shaped(format!("`{target}` is fed from `{}`, which does not carry `{m}`", edge.from)));
            }
            expected.insert((*edge).clone());
            match parent_of.insert(&class.name, source_class) {
                Some(prev) if prev != source_class => {
                    return Err(not_shaped(format!(
                        "class `{}` inherits from both {prev} and {source_class}",
                        class.name
                    )));
                }
                _ => {}
            }
        }
    }
    if model.flows.iter().cloned().collect::<HashSet<_>>() != expected {
        return Err(not_shaped("flows outside the inheritance pattern"));
    }

    // Each subclass must receive everything its parent has, and the chain must be acyclic.
    for (&child, &parent) in &parent_of {
        let mut parent_methods: Vec<&str> = own[parent].clone();
        parent_methods.extend(&inherited[parent]);
        let mut got = inherited[child].clone();
        parent_methods.sort_unstable();
        got.sort_unstable();
        if parent_methods != got {
            return Err(not_shaped(format!("`{child}` does not inherit exactly the behavior of `{parent}`")));
        }
        let mut seen = HashSet::from([child]);
        let mut at = parent;
        while let Some(&next) = parent_of.get(at) {
            if !seen.insert(at) || next == child {
                return Err(not_shaped(format!("behavior flows in a cycle through `{child}`")));
            }
            at = next;
        }
    }

    Ok(model
        .machines
        .iter()
        .map(|class| ClassSpec {
            name: class.name.clone(),
            attributes: Vec::new(),
            methods: own[class.name.as_str()].iter().map(|m| Method::plain(*m)).collect(),
            superclass: parent_of.get(class.name.as_str()).map(|p| p.to_string()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::path;

    fn animals() -> Vec<ClassSpec> {
        vec![
            ClassSpec::new("Animals").method("sleep", MethodKind::Plain),
            ClassSpec::new("Human").method("work", MethodKind::Plain).extends("Animals"),
            ClassSpec::new("Academic").method("teach", MethodKind::Plain).extends("Human"),
        ]
    }

    #[test]
    fn sleep_flows_down_the_chain() {
        let m = from_hierarchy(&animals()).unwrap();
        assert_eq!(m.machines.len(), 3);
        for (from, to) in [
            ("Animals.sleep.transfer", "Human.sleep_inherited.transfer"),
            ("Human.sleep_inherited.transfer", "Academic.sleep_inherited.transfer"),
            ("Human.work.transfer", "Academic.work_inherited.transfer"),
        ] {
            assert!(m.flows.contains(&Edge::new(path(from), path(to))), "{from} -> {to}");
        }
        assert_eq!(to_hierarchy(&m).unwrap(), animals());
    }

    #[test]
    fn single_class_without_methods() {
        let m = from_hierarchy(&[ClassSpec::new("Solo")]).unwrap();
        assert_eq!(m.machine_count(), 1);
        assert!(m.flows.is_empty());
        assert_eq!(to_hierarchy(&Model::new()).unwrap(), vec![]);
    }

    #[test]
    fn errors() {
        let unknown = [ClassSpec::new("A").extends("Z")];
        assert!(matches!(from_hierarchy(&unknown), Err(BridgeError::UnknownSuperclass { .. })));
        let cycle = [ClassSpec::new("A").extends("B"), ClassSpec::new("B").extends("A")];
        assert!(matches!(from_hierarchy(&cycle), Err(BridgeError::InheritanceCycle(_))));
        let overriding = [
            ClassSpec::new("A").method("f", MethodKind::Plain),
            ClassSpec::new("B").method("f", MethodKind::Plain).extends("A"),
        ];
        assert!(matches!(from_hierarchy(&overriding), Err(BridgeError::InvalidSpec(_))));
    }

    #[test]
    fn behavior_cycle_is_rejected() {
        let mut m = Model::new();
        for c in ["A", "B"] {
            m.machines.push(Machine::new(c).with_child(Machine::new("f_inherited").with_stages(inherited_stages())));
        }
        m.add_flow(path("A.f_inherited.transfer"), path("B.f_inherited.transfer")).unwrap();
        m.add_flow(path("B.f_inherited.transfer"), path("A.f_inherited.transfer")).unwrap();
        m.add_flow(path("A.f_inherited.transfer"), path("A.f_inherited.receive")).unwrap();
        m.add_flow(path("B.f_inherited.transfer"), path("B.f_inherited.receive")).unwrap();
        assert!(matches!(to_hierarchy(&m), Err(BridgeError::NotHierarchyShaped(_))));
    }
}
