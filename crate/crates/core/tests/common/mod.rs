#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use tm_core::grammar::INTRA_MACHINE_FLOWS;
use tm_core::{ClassSpec, Machine, MethodKind, Model, Path, StageKind, ValueType};

pub fn author() -> ClassSpec {
    ClassSpec::new("Author")
        .attr("name", ValueType::String)
        .attr("email", ValueType::String)
        .attr("gender", ValueType::Char)
}

fn stages(mask: u8) -> Vec<StageKind> {
    StageKind::ALL.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, k)| *k).collect()
}

/// Machine tree shape: (stage mask, children (stage mask, grandchildren masks)).
type Shape = Vec<(u8, Vec<(u8, Vec<u8>)>)>;

#[derive(Debug, Clone)]
pub struct ModelRecipe {
    shape: Shape,
    owners: Vec<(usize, usize)>,
    intra: Vec<(usize, usize)>,
    inter: Vec<(usize, usize)>,
    triggers: Vec<(usize, usize)>,
}

impl ModelRecipe {
    /// Builds the model through the checked constructors, skipping arrows
    /// they refuse.
    pub fn build(&self) -> Model {
        let mut model = Model::new();
        for (i, (mask, kids)) in self.shape.iter().enumerate() {
            let mut top = Machine::new(format!("M{i}")).with_stages(stages(*mask));
            for (j, (cmask, grand)) in kids.iter().enumerate() {
                let mut child = Machine::new(format!("c{j}")).with_stages(stages(*cmask));
                for (k, gmask) in grand.iter().enumerate() {
                    child = child.with_child(Machine::new(format!("g{k}")).with_stages(stages(*gmask)));
                }
                top = top.with_child(child);
            }
            model.machines.push(top);
        }
        let walk: Vec<(Path, Vec<StageKind>)> =
            model.walk().into_iter().map(|(p, m)| (p, m.stages.iter().copied().collect())).collect();
        let nested: Vec<Path> = walk.iter().map(|(p, _)| p.clone()).filter(|p| p.segments().len() > 1).collect();
        for &(m, o) in &self.owners {
            if nested.is_empty() {
                break;
            }
            let here = &nested[m % nested.len()];
            let owner = &model.machines[o % model.machines.len()].name.clone();
            if here.segments()[0] != *owner {
                let owner = Path::machine([owner.clone()]);
                model_find(&mut model, here).of_owner = Some(owner);
            }
        }
        for &(m, pair) in &self.intra {
            let (p, ks) = &walk[m % walk.len()];
            let (a, b) = INTRA_MACHINE_FLOWS[pair % INTRA_MACHINE_FLOWS.len()];
            if ks.contains(&a) && ks.contains(&b) {
                let _ = model.add_flow(p.with_stage(a), p.with_stage(b));
            }
        }
        let ports: Vec<&Path> =
            walk.iter().filter(|(_, ks)| ks.contains(&StageKind::Transfer)).map(|(p, _)| p).collect();
        if !ports.is_empty() {
            for &(a, b) in &self.inter {
                let (a, b) = (ports[a % ports.len()], ports[b % ports.len()]);
                let _ = model.add_flow(a.with_stage(StageKind::Transfer), b.with_stage(StageKind::Transfer));
            }
        }
        let all = model.stage_paths_all();
        if !all.is_empty() {
            for &(a, b) in &self.triggers {
                let _ = model.add_trigger(all[a % all.len()].clone(), all[b % all.len()].clone());
            }
        }
        model
    }
}

fn model_find<'a>(model: &'a mut Model, p: &Path) -> &'a mut Machine {
    let mut m = model.machines.iter_mut().find(|m| m.name == p.segments()[0]).unwrap();
    for seg in &p.segments()[1..] {
        m = m.children.iter_mut().find(|c| &c.name == seg).unwrap();
    }
    m
}

pub fn arb_recipe() -> impl Strategy<Value = ModelRecipe> {
    let shape = prop::collection::vec(
        (0u8..32, prop::collection::vec((0u8..32, prop::collection::vec(0u8..32, 0..3)), 0..3)),
        1..4,
    );
    let pairs = |n| prop::collection::vec((0usize..64, 0usize..64), 0..n);
    (shape, pairs(3), pairs(24), pairs(6), pairs(6)).prop_map(|(shape, owners, intra, inter, triggers)| ModelRecipe {
        shape,
        owners,
        intra,
        inter,
        triggers,
    })
}

pub fn arb_model() -> impl Strategy<Value = Model> {
    arb_recipe().prop_map(|r| r.build())
}

fn arb_type() -> impl Strategy<Value = ValueType> {
    prop_oneof![Just(ValueType::String), Just(ValueType::Char), Just(ValueType::Int)]
}

/// Accessor-complete class specs with 0 to 5 attributes. Accessor names are
/// sometimes non-conventional, to check they survive as event labels.
pub fn arb_class_spec() -> impl Strategy<Value = ClassSpec> {
    let attr = ("[a-z][a-z0-9]{0,5}", arb_type(), any::<bool>(), any::<bool>());
    ("[A-Z][a-zA-Z]{0,6}", prop::collection::vec(attr, 0..=5)).prop_map(|(name, attrs)| {
        let mut spec = ClassSpec::new(&name);
        for (a, ty, custom_set, custom_get) in attrs {
            if spec.attribute(&a).is_some() || StageKind::from_keyword(&a).is_some() || a == "store" || a == "typedesc"
            {
                continue;
            }
            spec = spec.attr(&a, ty);
            if custom_set {
                spec = spec.method(&format!("put_{a}"), MethodKind::Setter(a.clone()));
            }
            if custom_get {
                spec = spec.method(&format!("fetch_{a}"), MethodKind::Getter(a.clone()));
            }
        }
        spec.normalized()
    })
}

/// A forest of classes; every class owns at least one method and method
/// names are globally unique.
pub fn arb_hierarchy() -> impl Strategy<Value = Vec<ClassSpec>> {
    prop::collection::vec((any::<prop::sample::Index>(), any::<bool>(), 1usize..3), 1..7).prop_map(|classes| {
        let mut specs: Vec<ClassSpec> = Vec::new();
        for (i, (parent, has_parent, methods)) in classes.into_iter().enumerate() {
            let mut spec = ClassSpec::new(format!("K{i}"));
            for j in 0..methods {
                spec = spec.method(&format!("m{i}_{j}"), MethodKind::Plain);
            }
            if has_parent && i > 0 {
                spec = spec.extends(&format!("K{}", parent.index(i)));
            }
            specs.push(spec);
        }
        specs
    })
}

#[derive(Debug, Clone)]
pub enum StmtRecipe {
    Fire(usize),
    Repeat(u32, Vec<StmtRecipe>),
}

fn arb_stmts() -> impl Strategy<Value = Vec<StmtRecipe>> {
    let leaf = (0usize..16).prop_map(StmtRecipe::Fire);
    let stmt = leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (0usize..16).prop_map(StmtRecipe::Fire),
            (0u32..4, prop::collection::vec(inner, 0..3)).prop_map(|(n, b)| StmtRecipe::Repeat(n, b)),
        ]
    });
    prop::collection::vec(stmt, 0..5)
}

fn lower(stmts: &[StmtRecipe], ids: &[String]) -> Vec<tm_core::dynamics::Stmt> {
    use tm_core::dynamics::Stmt;
    stmts
        .iter()
        .map(|s| match s {
            StmtRecipe::Fire(i) => Stmt::Fire(ids[i % ids.len()].clone()),
            StmtRecipe::Repeat(n, b) => Stmt::Repeat { count: *n, body: lower(b, ids) },
        })
        .collect()
}

/// A static model plus single-element events, a forward-only chronology and
/// a few programs.
pub fn arb_full_model() -> impl Strategy<Value = Model> {
    (
        arb_recipe(),
        prop::collection::vec((0usize..64, "[ -~]{0,12}", prop::option::of("[a-z0-9:]{1,5}")), 0..5),
        prop::collection::vec((0usize..8, 0usize..8), 0..6),
        prop::collection::vec(arb_stmts(), 0..3),
    )
        .prop_map(|(recipe, events, chrono, programs)| {
            let mut m = recipe.build();
            let all: Vec<Path> = m.walk().into_iter().map(|(p, _)| p).chain(m.stage_paths_all()).collect();
            for (i, (at, label, time)) in events.into_iter().enumerate() {
                let id = format!("E{}", i + 1);
                m.define_event(&id, &label, [all[at % all.len()].clone()]).unwrap();
                m.events.last_mut().unwrap().time = time;
            }
            let ids: Vec<String> = m.events.iter().map(|e| e.id.clone()).collect();
            if !ids.is_empty() {
                for (a, b) in chrono {
                    let (a, b) = (a % ids.len(), b % ids.len());
                    if a < b {
                        m.chronology.insert(ids[a].clone(), ids[b].clone());
                    }
                }
                for (i, body) in programs.iter().enumerate() {
                    m.programs.push(tm_core::Program { name: format!("P{i}"), body: lower(body, &ids) });
                }
            }
            m
        })
}

/// Every sequence over the five kinds of length 2..=6, filtered by the path
/// definition.
pub fn brute_force_paths(flows: &HashSet<(StageKind, StageKind)>) -> Vec<Vec<StageKind>> {
    use StageKind::*;
    let mut out = Vec::new();
    let mut seqs: Vec<Vec<StageKind>> = StageKind::ALL.iter().map(|k| vec![*k]).collect();
    for _ in 1..6 {
        seqs =
            seqs.into_iter().flat_map(|s| StageKind::ALL.iter().map(move |k| [s.clone(), vec![*k]].concat())).collect();
        for s in &seqs {
            let ok_ends = matches!(s[0], Create | Transfer) && *s.last().unwrap() == Transfer;
            let inner: Vec<_> = if s[0] == Transfer { s[1..].to_vec() } else { s.clone() };
            let distinct = inner.iter().collect::<HashSet<_>>().len() == inner.len();
            let linked = s.windows(2).all(|w| flows.contains(&(w[0], w[1])));
            if ok_ends && distinct && linked {
                out.push(s.clone());
            }
        }
    }
    out.sort();
    out
}
