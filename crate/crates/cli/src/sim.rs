//! Assembling composite systems from files and stepping them.

use std::collections::BTreeMap;
use std::io::Write;

use compdyn::dynam::{
    euler_directed, euler_undirected, oapply_cpg, oapply_directed, oapply_undirected, undirected_state_map, Kind,
    Machine, ResourceSharer,
};
use compdyn::modelspec::{Model, ModelSpec};
use compdyn::wiring::Diagram;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::files::Labels;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Initial {
    Vector(Vec<f64>),
    /// Qualified state names; unnamed states start at `0.0`.
    Named(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Inputs {
    Constant(Vec<f64>),
    /// Row `k` is the outer input during step `k`.
    Table { table: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub h: f64,
    pub steps: usize,
    #[serde(default = "no_initial")]
    pub initial: Initial,
    #[serde(default)]
    pub inputs: Option<Inputs>,
}

fn no_initial() -> Initial {
    Initial::Named(BTreeMap::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Explicit Euler, which commutes with composition.
    #[default]
    Euler,
    /// Classical Runge-Kutta, applied to the composite only.
    Rk4,
}

#[derive(Debug, Clone)]
pub enum System {
    Directed(Machine),
    Undirected(ResourceSharer),
}

impl System {
    pub fn kind(&self) -> Kind {
        match self {
            System::Directed(m) => m.kind(),
            System::Undirected(s) => s.kind(),
        }
    }

    pub fn n_states(&self) -> usize {
        match self {
            System::Directed(m) => m.n_states(),
            System::Undirected(s) => s.n_states(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            System::Directed(m) => m.n_inputs(),
            System::Undirected(_) => 0,
        }
    }

    fn field(&self, a: &[f64], x: &[f64]) -> Result<Vec<f64>, CliError> {
        Ok(match self {
            System::Directed(m) => m.eval_dynamics(a, x)?,
            System::Undirected(s) => s.eval_dynamics(x)?,
        })
    }
}

/// A composite system with one qualified name per state.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub system: System,
    pub names: Vec<String>,
}

/// Composes one model per box; a single model is reused for every box.
pub fn assemble(diagram: &Diagram, specs: &[ModelSpec], labels: &Labels) -> Result<Assembled, CliError> {
    let n = diagram.n_boxes();
    let specs: Vec<&ModelSpec> = match specs.len() {
        1 => vec![&specs[0]; n],
        k if k == n => specs.iter().collect(),
        k => return Err(CliError::invalid(format!("diagram has {n} boxes but {k} models were given"))),
    };
    let boxes = labels.box_names(n)?;
    let models = specs.iter().map(|s| s.instantiate()).collect::<Result<Vec<_>, _>>()?;
    let qualified: Vec<Vec<String>> = boxes
        .iter()
        .zip(&specs)
        .map(|(b, s)| s.states.iter().map(|st| format!("{b}.{st}")).collect())
        .collect();
    match diagram {
        Diagram::Dwd(_) | Diagram::Cpg(_) => {
            let machines = models
                .into_iter()
                .enumerate()
                .map(|(i, m)| match m {
                    Model::Machine(m) => Ok(m),
                    Model::Sharer(_) => Err(CliError::invalid(format!("box {i}: directed diagrams need machines"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let m = match diagram {
                Diagram::Dwd(d) => oapply_directed(d, &machines)?,
                Diagram::Cpg(g) => oapply_cpg(g, &machines)?,
                Diagram::Uwd(_) => unreachable!(),
            };
            Ok(Assembled { system: System::Directed(m), names: qualified.concat() })
        }
        Diagram::Uwd(d) => {
            let sharers = models
                .into_iter()
                .enumerate()
                .map(|(i, m)| match m {
                    Model::Sharer(s) => Ok(s),
                    Model::Machine(_) => Err(CliError::invalid(format!("box {i}: undirected diagrams need sharers"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = oapply_undirected(d, &sharers)?;
            let po = undirected_state_map(d, &sharers)?;
            let junctions = labels.junction_names(d.n_junctions())?;
            let mut names: Vec<Option<String>> = vec![None; po.apex_size];
            if let Some(j) = junctions {
                for (label, &t) in j.iter().zip(po.inj_right.as_slice()) {
                    names[t].get_or_insert_with(|| label.clone());
                }
            }
            for (q, &t) in qualified.concat().into_iter().zip(po.inj_left.as_slice()) {
                names[t].get_or_insert(q);
            }
            for (j, &t) in po.inj_right.as_slice().iter().enumerate() {
                names[t].get_or_insert_with(|| format!("j{j}"));
            }
            let names = names.into_iter().map(|n| n.expect("every class has a member")).collect();
            Ok(Assembled { system: System::Undirected(s), names })
        }
    }
}

pub fn initial_state(cfg: &SimConfig, names: &[String]) -> Result<Vec<f64>, CliError> {
    match &cfg.initial {
        Initial::Vector(v) if v.len() != names.len() => Err(CliError::invalid(format!(
            "initial state has {} entries but the system has {} states",
            v.len(),
            names.len()
        ))),
        Initial::Vector(v) => Ok(v.clone()),
        Initial::Named(map) => {
            if let Some(k) = map.keys().find(|k| !names.contains(k)) {
                return Err(CliError::invalid(format!("initial state names unknown state `{k}`")));
            }
            Ok(names.iter().map(|n| map.get(n).copied().unwrap_or(0.0)).collect())
        }
    }
}

/// The outer input for every step.
fn input_rows(cfg: &SimConfig, n_inputs: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let check = |row: &Vec<f64>, what: &str| {
        if row.len() == n_inputs {
            Ok(())
        } else {
            Err(CliError::invalid(format!("{what} has {} entries but the system has {n_inputs} inputs", row.len())))
        }
    };
    match &cfg.inputs {
        None => Ok(vec![vec![0.0; n_inputs]; cfg.steps]),
        Some(Inputs::Constant(v)) => {
            check(v, "input vector")?;
            Ok(vec![v.clone(); cfg.steps])
        }
        Some(Inputs::Table { table }) => {
            if table.len() != cfg.steps {
                return Err(CliError::invalid(format!(
                    "input table has {} rows but {} steps were requested",
                    table.len(),
                    cfg.steps
                )));
            }
            for (k, row) in table.iter().enumerate() {
                check(row, &format!("input row {k}"))?;
            }
            Ok(table.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// How a trajectory was discretized, for the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub discretization: &'static str,
    pub functorial: bool,
    pub order: &'static str,
    pub h: f64,
    pub steps: usize,
    pub n_states: usize,
}

fn discretize(system: &System, scheme: Scheme, h: f64) -> Result<(System, RunInfo), CliError> {
    let info = |discretization, functorial, order| RunInfo { discretization, functorial, order, h, steps: 0, n_states: 0 };
    match (system.kind(), scheme) {
        (Kind::Discrete, Scheme::Euler) => Ok((system.clone(), info("none", true, "discrete system stepped directly"))),
        (Kind::Discrete, Scheme::Rk4) => Err(CliError::invalid("rk4 applies only to continuous systems")),
        (Kind::Continuous, Scheme::Euler) => {
            let stepped = match system {
                System::Directed(m) => System::Directed(euler_directed(m, h)?),
                System::Undirected(s) => System::Undirected(euler_undirected(s, h)?),
            };
            Ok((stepped, info("euler", true, "composed then stepped; equal to stepping the components first")))
        }
        (Kind::Continuous, Scheme::Rk4) => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::invalid(format!("step size must be positive and finite, got {h}")));
            }
            Ok((system.clone(), info("rk4", false, "composed then stepped; components are never stepped separately")))
        }
    }
}

fn rk4_step(system: &System, a: &[f64], x: &[f64], h: f64) -> Result<Vec<f64>, CliError> {
    let shifted = |k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + c * ki).collect() };
    let k1 = system.field(a, x)?;
    let k2 = system.field(a, &shifted(&k1, h / 2.0))?;
    let k3 = system.field(a, &shifted(&k2, h / 2.0))?;
    let k4 = system.field(a, &shifted(&k3, h))?;
    Ok((0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Runs `cfg.steps` steps from the configured initial state. Times are
/// `k·h` for continuous systems and the step index for discrete ones.
pub fn simulate(
    assembled: &Assembled,
    cfg: &SimConfig,
    scheme: Scheme,
) -> Result<(Trajectory, RunInfo), CliError> {
    let system = &assembled.system;
    let (stepper, mut info) = discretize(system, scheme, cfg.h)?;
    info.steps = cfg.steps;
    info.n_states = system.n_states();
    let inputs = input_rows(cfg, system.n_inputs())?;
    let mut x = initial_state(cfg, &assembled.names)?;
    let dt = if system.kind() == Kind::Continuous { cfg.h } else { 1.0 };
    let mut states = Vec::with_capacity(cfg.steps + 1);
    states.push(x.clone());
    for a in &inputs {
        x = match scheme {
            Scheme::Rk4 => rk4_step(system, a, &x, cfg.h)?,
            Scheme::Euler => stepper.field(a, &x)?,
        };
        states.push(x.clone());
    }
    let times = (0..=cfg.steps).map(|k| k as f64 * dt).collect();
    Ok((Trajectory { names: assembled.names.clone(), times, states }, info))
}

pub fn write_csv<W: Write>(out: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("t").chain(traj.names.iter().map(String::as_str)))?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        w.write_record(std::iter::once(*t).chain(x.iter().copied()).map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}
