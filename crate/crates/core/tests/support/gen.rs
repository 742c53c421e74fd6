//! Seeded generators for specs, operation pairs and projects.

#![allow(dead_code)]

use adapterforge_core::analyser::{ConversionRule, ConversionTable, TypeUnit};
use adapterforge_core::spec_lang::{
    ComponentSpec, ConceptId, Connection, Direction, Endpoint, InterfaceSpec, Literal, MetaEntry,
    OperationSig, ParamSig, ProjectSpec, SemType, UseDecl, Version, VersionConstraint,
};
use adapterforge_core::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn tu(ty: SemType, unit: Option<&str>) -> TypeUnit {
    TypeUnit {
        ty,
        unit: unit.map(String::from),
    }
}

/// The six-rule table the matcher is checked against.
pub fn six_rule_table() -> ConversionTable {
    let mut t = ConversionTable::new();
    let rules = [
        (tu(SemType::I32, None), tu(SemType::I64, None), ConversionRule::Widen),
        (tu(SemType::I64, None), tu(SemType::I32, None), ConversionRule::NarrowChecked),
        (tu(SemType::I32, None), tu(SemType::F64, None), ConversionRule::Widen),
        (
            tu(SemType::F64, Some("ms")),
            tu(SemType::F64, Some("s")),
            ConversionRule::UnitScale(Ratio::new(1, 1000)),
        ),
        (tu(SemType::String, None), tu(SemType::I64, None), ConversionRule::Parse),
        (tu(SemType::I64, None), tu(SemType::String, None), ConversionRule::Format),
    ];
    for (from, to, rule) in rules {
        t.insert(from, to, rule).unwrap();
    }
    t
}

fn concept(s: &str) -> ConceptId {
    ConceptId::parse(s).unwrap()
}

const OP_CONCEPTS: [&str; 5] = ["a.b", "a.b.c", "a.b.c.d", "a", "x.y"];
const PARAM_CONCEPTS: [&str; 3] = ["k.one", "k.two", "k.three"];
const NAMES: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

/// A (type, unit) pair from the vocabulary the six-rule table speaks.
pub fn random_type_unit<R: Rng>(rng: &mut R) -> (SemType, Option<String>) {
    match rng.gen_range(0..8) {
        0 => (SemType::I32, None),
        1 => (SemType::I64, None),
        2 => (SemType::F64, None),
        3 => (SemType::String, None),
        4 => (SemType::Bool, None),
        5 => (SemType::F64, Some("ms".into())),
        6 => (SemType::F64, Some("s".into())),
        _ => (SemType::list_of(SemType::I32), None),
    }
}

pub fn random_literal<R: Rng>(rng: &mut R, ty: &SemType) -> Literal {
    match ty {
        SemType::I32 => Literal::Int(rng.gen_range(i32::MIN as i64..=i32::MAX as i64)),
        SemType::I64 => Literal::Int(rng.gen()),
        SemType::F64 => {
            let v: f64 = rng.gen_range(-1e6..1e6);
            Literal::Float(if rng.gen_bool(0.3) { v.trunc() } else { v })
        }
        SemType::Bool => Literal::Bool(rng.gen()),
        SemType::String => {
            let pool = ["", "a", "x y", "q\"uote", "back\\slash", "tab\there", "nl\nx", "ünï"];
            Literal::Str(pool.choose(rng).unwrap().to_string())
        }
        SemType::Bytes => Literal::Bytes((0..rng.gen_range(0..4)).map(|_| rng.gen()).collect()),
        SemType::Unit => Literal::Unit,
        SemType::List(inner) => Literal::List(
            (0..rng.gen_range(0..3))
                .map(|_| random_literal(rng, inner))
                .collect(),
        ),
    }
}

fn random_return<R: Rng>(rng: &mut R) -> SemType {
    match rng.gen_range(0..5) {
        0 | 1 => SemType::Unit,
        2 => SemType::I32,
        3 => SemType::I64,
        _ => SemType::String,
    }
}

/// A random operation with up to `max_params` parameters. Parameters
/// carry an explicit concept about half the time.
pub fn random_op<R: Rng>(rng: &mut R, name: &str, max_params: usize) -> OperationSig {
    let op_concept = concept(OP_CONCEPTS.choose(rng).unwrap());
    let n = rng.gen_range(0..=max_params);
    let mut names: Vec<&str> = NAMES.to_vec();
    names.shuffle(rng);
    let params = names[..n]
        .iter()
        .map(|nm| {
            let (ty, unit) = random_type_unit(rng);
            let mut p = ParamSig::new(nm, ty.clone());
            p.unit = unit;
            if rng.gen_bool(0.5) {
                p.concept = Some(concept(PARAM_CONCEPTS.choose(rng).unwrap()));
            }
            if rng.gen_bool(0.3) {
                p.default = Some(random_literal(rng, &ty));
            }
            p
        })
        .collect();
    OperationSig::new(name, op_concept, params, random_return(rng))
}

/// Representations a consumer value can take and still reach `to`
/// through the six-rule table (including `to` itself).
fn sources_for(ty: &SemType, unit: &Option<String>) -> Vec<(SemType, Option<String>)> {
    let mut v = vec![(ty.clone(), unit.clone())];
    match (ty, unit.as_deref()) {
        (SemType::I64, None) => {
            v.push((SemType::I32, None));
            v.push((SemType::String, None));
        }
        (SemType::I32, None) => v.push((SemType::I64, None)),
        (SemType::F64, None) => v.push((SemType::I32, None)),
        (SemType::F64, Some("s")) => v.push((SemType::F64, Some("ms".into()))),
        (SemType::String, None) => v.push((SemType::I64, None)),
        _ => {}
    }
    v
}

/// Derives a consumer operation from `provided` by dropping defaulted
/// parameters, permuting, renaming and re-typing through the table. The
/// result is usually, not always, matchable.
pub fn derive_required<R: Rng>(rng: &mut R, provided: &OperationSig) -> OperationSig {
    let name = if rng.gen_bool(0.3) {
        format!("{}Alt", provided.name)
    } else {
        provided.name.clone()
    };
    let mut concept_s = provided.concept.to_string();
    if rng.gen_bool(0.2) {
        concept_s.push_str(".sub");
    }
    let op_concept = concept(&concept_s);
    let mut params: Vec<ParamSig> = Vec::new();
    for p in &provided.params {
        if p.default.is_some() && rng.gen_bool(0.4) {
            continue;
        }
        let (ty, unit) = sources_for(&p.ty, &p.unit).choose(rng).unwrap().clone();
        let mut q = ParamSig::new(&p.name, ty);
        q.unit = unit;
        // keep the effective concept stable under an op-concept change
        q.concept = Some(p.effective_concept(&provided.concept));
        if p.concept.is_none() && concept_s == provided.concept.as_str() && rng.gen_bool(0.7) {
            q.concept = None;
        }
        params.push(q);
    }
    if rng.gen_bool(0.4) {
        params.shuffle(rng);
    }
    let returns = match &provided.returns {
        SemType::I32 if rng.gen_bool(0.3) => SemType::I64,
        SemType::I64 if rng.gen_bool(0.3) => SemType::String,
        other => other.clone(),
    };
    OperationSig::new(&name, op_concept, params, returns)
}

/// A consumer/provider operation pair with at most `max_params` parameters
/// on each side. Half are derived, half independent.
pub fn random_pair<R: Rng>(rng: &mut R, max_params: usize) -> (OperationSig, OperationSig) {
    let name = *["run", "go"].choose(rng).unwrap();
    let provided = random_op(rng, name, max_params);
    let required = if rng.gen_bool(0.5) {
        derive_required(rng, &provided)
    } else {
        let name = *["run", "go"].choose(rng).unwrap();
        random_op(rng, name, max_params)
    };
    (required, provided)
}

fn ident<R: Rng>(rng: &mut R, prefix: &str) -> String {
    format!("{}{}", prefix, rng.gen_range(0..1000))
}

/// A random valid component exercising every syntactic feature.
pub fn random_component<R: Rng>(rng: &mut R, name: &str) -> ComponentSpec {
    let version = Version::new(rng.gen_range(0..4), rng.gen_range(0..10), rng.gen_range(0..10));
    let mut spec = ComponentSpec::new(name, version);
    let mut iface_names: Vec<String> = (0..6).map(|i| format!("I{}", i)).collect();
    iface_names.shuffle(rng);
    for (k, iname) in iface_names.iter().take(rng.gen_range(0..4)).enumerate() {
        let dir = if k % 2 == 0 {
            Direction::Provided
        } else {
            Direction::Required
        };
        let mut ops = Vec::new();
        for j in 0..rng.gen_range(0..4) {
            let mut op = random_op(rng, &format!("op{}", j), 4);
            for p in &mut op.params {
                if rng.gen_bool(0.2) {
                    let deep = SemType::list_of(SemType::list_of(SemType::F64));
                    p.ty = deep.clone();
                    p.unit = Some("ms".into());
                    p.default = Some(random_literal(rng, &deep));
                }
            }
            ops.push(op);
        }
        let iface = InterfaceSpec::new(iname, dir, ops);
        match dir {
            Direction::Provided => spec.provided.push(iface),
            Direction::Required => spec.required.push(iface),
        }
    }
    let mut keys: Vec<String> = (0..4).map(|i| format!("k{}.v", i)).collect();
    keys.shuffle(rng);
    for key in keys.into_iter().take(rng.gen_range(0..3)) {
        let value = match random_literal(rng, &SemType::String) {
            Literal::Str(s) => s,
            _ => unreachable!(),
        };
        spec.meta.push(MetaEntry { key, value });
    }
    spec.normalize();
    spec
}

/// A random valid project; only the syntax is meaningful.
pub fn random_project<R: Rng>(rng: &mut R) -> ProjectSpec {
    let mut p = ProjectSpec::new(&ident(rng, "P"));
    let comps: Vec<String> = (0..rng.gen_range(1..4)).map(|i| format!("C{}", i)).collect();
    for c in &comps {
        let constraint = match rng.gen_range(0..3) {
            0 => VersionConstraint::Any,
            1 => VersionConstraint::Exact(Version::new(1, rng.gen_range(0..3), 0)),
            _ => VersionConstraint::AtLeast(Version::new(0, rng.gen_range(0..9), 1)),
        };
        p.uses.push(UseDecl {
            component: c.clone(),
            constraint,
            loc: Default::default(),
        });
    }
    for _ in 0..rng.gen_range(0..4) {
        p.connections.push(Connection::new(
            Endpoint::new(comps.choose(rng).unwrap(), &ident(rng, "R")),
            Endpoint::new(comps.choose(rng).unwrap(), &ident(rng, "S")),
        ));
    }
    let mut demands: Vec<&str> = OP_CONCEPTS.to_vec();
    demands.shuffle(rng);
    for d in demands.into_iter().take(rng.gen_range(0..3)) {
        p.demands.push(concept(d));
    }
    p
}
