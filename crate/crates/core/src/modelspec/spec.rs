use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynam::{DynamError, Kind, Machine, ModelError, ResourceSharer};

use super::expr::{parse, Compiled, Expr, ParseError, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Machine,
    Sharer,
}

/// A serializable elementary system.
///
/// `dynamics` maps every state to an expression over states, inputs and
/// params. Machines list one `readout` expression per output (over states and
/// params); sharers list the state behind each port in `ports`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: SystemKind,
    pub flavor: Kind,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub dynamics: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ports: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid model JSON: {0}")]
    Json(String),
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("state `{0}` has no dynamics")]
    MissingDynamics(String),
    #[error("dynamics given for `{0}`, which is not a state")]
    UnknownState(String),
    #[error("{field} uses undeclared variable `{name}`")]
    UnboundVariable { field: String, name: String },
    #[error("{field} may not use input `{name}`")]
    InputInReadout { field: String, name: String },
    #[error("port {index} names `{name}`, which is not a state")]
    UnknownPort { index: usize, name: String },
    #[error("{0}")]
    Shape(String),
    #[error("{field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{builtin}` needs parameter `{param}`")]
    MissingParam { builtin: String, param: String },
    #[error("builtin `{builtin}` has no parameter `{param}`")]
    UnknownParam { builtin: String, param: String },
    #[error(transparent)]
    Dynam(#[from] DynamError),
}

/// An instantiated elementary system.
#[derive(Debug, Clone)]
pub enum Model {
    Machine(Machine),
    Sharer(ResourceSharer),
}

impl Model {
    pub fn kind(&self) -> Kind {
        match self {
            Model::Machine(m) => m.kind(),
            Model::Sharer(s) => s.kind(),
        }
    }

    pub fn n_states(&self) -> usize {
        match self {
            Model::Machine(m) => m.n_states(),
            Model::Sharer(s) => s.n_states(),
        }
    }
}

struct Checked {
    dynamics: Vec<Expr>,
    readout: Vec<Expr>,
    ports: Vec<usize>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    /// Checks every invariant; see [`ModelSpec::validate`] for a report.
    fn check(&self) -> Result<Checked, SpecError> {
        let mut seen = HashSet::new();
        for name in self.states.iter().chain(&self.inputs).chain(self.params.keys()) {
            if !seen.insert(name.as_str()) {
                return Err(SpecError::DuplicateName(name.clone()));
            }
        }
        if let Some(extra) = self.dynamics.keys().find(|k| !self.states.contains(k)) {
            return Err(SpecError::UnknownState(extra.clone()));
        }
        match self.kind {
            SystemKind::Machine if self.ports.is_some() => {
                return Err(SpecError::Shape("machines declare a readout, not ports".into()))
            }
            SystemKind::Machine if self.readout.is_none() => {
                return Err(SpecError::Shape("machines need a readout".into()))
            }
            SystemKind::Sharer if self.readout.is_some() || !self.inputs.is_empty() => {
                return Err(SpecError::Shape("sharers declare ports but no inputs or readout".into()))
            }
            SystemKind::Sharer if self.ports.is_none() => return Err(SpecError::Shape("sharers need ports".into())),
            _ => {}
        }

        let parse_field = |field: String, text: &str, allow_inputs: bool| -> Result<Expr, SpecError> {
            let e = parse(text).map_err(|source| SpecError::Parse { field: field.clone(), source })?;
            for name in e.variables() {
                let is_input = self.inputs.iter().any(|i| i == name);
                if is_input && !allow_inputs {
                    return Err(SpecError::InputInReadout { field, name: name.into() });
                }
                if !is_input && !self.states.iter().any(|s| s == name) && !self.params.contains_key(name) {
                    return Err(SpecError::UnboundVariable { field, name: name.into() });
                }
            }
            Ok(e)
        };

        let dynamics = self
            .states
            .iter()
            .map(|s| {
                let text = self.dynamics.get(s).ok_or_else(|| SpecError::MissingDynamics(s.clone()))?;
                parse_field(format!("dynamics of `{s}`"), text, true)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let readout = self
            .readout
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, text)| parse_field(format!("readout {k}"), text, false))
            .collect::<Result<Vec<_>, _>>()?;
        let ports = self
            .ports
            .iter()
            .flatten()
            .enumerate()
            .map(|(index, name)| {
                self.states
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| SpecError::UnknownPort { index, name: name.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Checked { dynamics, readout, ports })
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        self.check().map(|_| ())
    }

    pub fn instantiate(&self) -> Result<Model, SpecError> {
        let checked = self.check()?;
        let slots: HashMap<&str, Compiled> = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), Compiled::Read(Slot::Input(i))))
            .chain(self.states.iter().enumerate().map(|(i, n)| (n.as_str(), Compiled::Read(Slot::State(i)))))
            .chain(self.params.iter().map(|(n, &v)| (n.as_str(), Compiled::Num(v))))
            .collect();
        let compile = |exprs: &[Expr]| -> Vec<Compiled> {
            exprs
                .iter()
                .map(|e| Compiled::new(e, &|name| slots.get(name).cloned()).expect("names were checked"))
                .collect()
        };
        let labels: Arc<[String]> = self.states.iter().map(|s| format!("dynamics of `{s}`")).collect();
        let dynamics = Arc::new(compile(&checked.dynamics));
        let eval_all = move |exprs: &[Compiled], a: &[f64], x: &[f64], out: &mut [f64], labels: &[String]| {
            for (k, (e, slot)) in exprs.iter().zip(out.iter_mut()).enumerate() {
                *slot = e.eval(a, x).map_err(|err| ModelError(format!("{}: {err}", labels[k])))?;
            }
            Ok(())
        };
        Ok(match self.kind {
            SystemKind::Machine => {
                let readout = Arc::new(compile(&checked.readout));
                let readout_labels: Arc<[String]> = (0..readout.len()).map(|k| format!("readout {k}")).collect();
                Model::Machine(Machine::new(
                    self.flavor,
                    self.inputs.len(),
                    self.states.len(),
                    readout.len(),
                    move |a, x, out| eval_all(&dynamics, a, x, out, &labels),
                    move |x, out| eval_all(&readout, &[], x, out, &readout_labels),
                ))
            }
            SystemKind::Sharer => Model::Sharer(ResourceSharer::new(
                self.flavor,
                self.states.len(),
                checked.ports,
                move |x, out| eval_all(&dynamics, &[], x, out, &labels),
            )?),
        })
    }
}
