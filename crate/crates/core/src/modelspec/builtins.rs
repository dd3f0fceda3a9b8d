//! Named elementary models. Every parameter must be supplied by the caller.

use std::collections::BTreeMap;

use crate::dynam::Kind;

use super::spec::{ModelSpec, SpecError, SystemKind};

struct Builtin {
    name: &'static str,
    params: &'static [&'static str],
    build: fn() -> ModelSpec,
}

const BUILTINS: &[Builtin] = &[
    Builtin { name: "sir_city", params: &["beta", "gamma", "travel"], build: sir_city },
    Builtin { name: "lv_growth", params: &["r"], build: lv_growth },
    Builtin { name: "lv_decline", params: &["d"], build: lv_decline },
    Builtin { name: "lv_predation", params: &["a", "b"], build: lv_predation },
    Builtin { name: "heat_node", params: &["alpha"], build: heat_node },
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|b| b.name)
}

/// Parameter names of a builtin, in documentation order.
pub fn builtin_params(name: &str) -> Option<&'static [&'static str]> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| b.params)
}

/// The spec of a builtin with `params` filled in; every parameter is
/// required and unknown ones are rejected.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec, SpecError> {
    let b = BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| SpecError::UnknownBuiltin(name.into()))?;
    if let Some(p) = params.keys().find(|p| !b.params.contains(&p.as_str())) {
        return Err(SpecError::UnknownParam { builtin: name.into(), param: p.clone() });
    }
    if let Some(p) = b.params.iter().find(|p| !params.contains_key(**p)) {
        return Err(SpecError::MissingParam { builtin: name.into(), param: p.to_string() });
    }
    let mut spec = (b.build)();
    spec.params = params.clone();
    Ok(spec)
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn table(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn machine(states: &[&str], inputs: &[&str], dynamics: &[(&str, &str)], readout: &[&str]) -> ModelSpec {
    ModelSpec {
        kind: SystemKind::Machine,
        flavor: Kind::Continuous,
        states: names(states),
        inputs: names(inputs),
        params: BTreeMap::new(),
        dynamics: table(dynamics),
        readout: Some(names(readout)),
        ports: None,
    }
}

fn sharer(states: &[&str], dynamics: &[(&str, &str)], ports: &[&str]) -> ModelSpec {
    ModelSpec {
        kind: SystemKind::Sharer,
        flavor: Kind::Continuous,
        states: names(states),
        inputs: Vec::new(),
        params: BTreeMap::new(),
        dynamics: table(dynamics),
        readout: None,
        ports: Some(names(ports)),
    }
}

/// One city of a travel network. `inflow` and `outflow` carry population
/// totals; their difference, scaled by `travel`, is shared among the
/// compartments in proportion to the city's own S, I and R, so the city's
/// total changes by exactly `travel*(inflow - outflow)`.
fn sir_city() -> ModelSpec {
    machine(
        &["S", "I", "R"],
        &["inflow", "outflow"],
        &[
            ("S", "-beta*S*I + travel*(inflow - outflow)*S/(S + I + R)"),
            ("I", "beta*S*I - gamma*I + travel*(inflow - outflow)*I/(S + I + R)"),
            ("R", "gamma*I + travel*(inflow - outflow)*R/(S + I + R)"),
        ],
        &["S", "I", "R"],
    )
}

fn lv_growth() -> ModelSpec {
    sharer(&["x"], &[("x", "r*x")], &["x"])
}

fn lv_decline() -> ModelSpec {
    sharer(&["x"], &[("x", "-d*x")], &["x"])
}

/// Bilinear predation: the prey loses `a*prey*predator`, the predator gains
/// `b*prey*predator`. Port 0 is the prey, port 1 the predator.
fn lv_predation() -> ModelSpec {
    sharer(
        &["prey", "predator"],
        &[("prey", "-a*prey*predator"), ("predator", "b*prey*predator")],
        &["prey", "predator"],
    )
}

/// A 5-point-stencil cell: in-ports carry the four neighbor values in
/// North, East, South, West order and every out-port repeats the cell value.
fn heat_node() -> ModelSpec {
    machine(&["x"], &["aN", "aE", "aS", "aW"], &[("x", "alpha*(aN + aE + aS + aW - 4*x)")], &["x", "x", "x", "x"])
}
