//! Wiring diagrams over the three built-in schemas, and operadic substitution.
//!
//! All diagrams are thin wrappers around a validated [`CSetInstance`]. The
//! ports of box `i` are the rows of its port table whose `box` column is `i`,
//! taken in ascending row order; "port `k` of box `i`" always means the `k`-th
//! of these.
//!
//! Substitution always renumbers its result into canonical form (see each
//! type's `canonical`), so two composites are equal as terms iff they compare
//! equal.

mod cpg;
mod dot;
mod dwd;
mod uwd;

pub use cpg::{grid, ocompose_cpg, CPGraph, Side};
pub use dwd::{ocompose_dwd, ocompose_dwd_at, DWDiagram};
pub use uwd::{ocompose_uwd, ocompose_uwd_at, ocompose_uwd_traced, UWDiagram};

use serde_json::Value;
use thiserror::Error;

use crate::cset::{CSetError, CSetInstance};
use crate::finset::FinSetError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WiringError {
    #[error("expected {expected} inner diagrams (one per box), got {actual}")]
    InnerCount { expected: usize, actual: usize },
    #[error("box {index} expects {expected} ports but the inner diagram exposes {actual}")]
    Arity { index: usize, expected: String, actual: String },
    #[error("slot {index} is out of range for a diagram with {boxes} boxes")]
    Slot { index: usize, boxes: usize },
    #[error("expected a {expected} diagram, found {actual}")]
    WrongSchema { expected: &'static str, actual: String },
    #[error("malformed diagram: {0}")]
    Shape(String),
    #[error(transparent)]
    CSet(#[from] CSetError),
    #[error(transparent)]
    FinSet(#[from] FinSetError),
}

/// Groups port rows by owning box, preserving row order within each box.
pub(crate) fn ports_by_box(n_boxes: usize, owner: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n_boxes];
    for (p, &b) in owner.iter().enumerate() {
        out[b].push(p);
    }
    out
}

/// For each port row, its position within its box.
pub(crate) fn local_index(by_box: &[Vec<usize>], n_ports: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); n_ports];
    for (b, ports) in by_box.iter().enumerate() {
        for (k, &p) in ports.iter().enumerate() {
            out[p] = (b, k);
        }
    }
    out
}

/// Old row -> new row when the ports are regrouped box by box.
pub(crate) fn grouping_permutation(by_box: &[Vec<usize>], n_ports: usize) -> Vec<usize> {
    let mut perm = vec![0; n_ports];
    for (new, &old) in by_box.iter().flatten().enumerate() {
        perm[old] = new;
    }
    perm
}

fn check_schema(x: &CSetInstance, expected: &'static str) -> Result<(), WiringError> {
    if x.schema().name() != expected {
        return Err(WiringError::WrongSchema { expected, actual: x.schema().name().to_string() });
    }
    x.ensure_valid()?;
    Ok(())
}

/// Any of the three diagram kinds, as read from or written to a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagram {
    Uwd(UWDiagram),
    Dwd(DWDiagram),
    Cpg(CPGraph),
}

impl Diagram {
    pub fn from_instance(x: CSetInstance) -> Result<Self, WiringError> {
        match x.schema().name() {
            "UWD" => Ok(Diagram::Uwd(UWDiagram::from_instance(x)?)),
            "DWD" => Ok(Diagram::Dwd(DWDiagram::from_instance(x)?)),
            "CPG" => Ok(Diagram::Cpg(CPGraph::from_instance(x)?)),
            other => Err(WiringError::WrongSchema { expected: "UWD, DWD or CPG", actual: other.into() }),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self, WiringError> {
        Self::from_instance(CSetInstance::from_json(value)?)
    }

    pub fn instance(&self) -> &CSetInstance {
        match self {
            Diagram::Uwd(d) => d.instance(),
            Diagram::Dwd(d) => d.instance(),
            Diagram::Cpg(d) => d.instance(),
        }
    }

    pub fn to_json(&self) -> Value {
        self.instance().to_json()
    }

    pub fn n_boxes(&self) -> usize {
        self.instance().card("B")
    }

    pub fn canonical(&self) -> Diagram {
        match self {
            Diagram::Uwd(d) => Diagram::Uwd(d.canonical()),
            Diagram::Dwd(d) => Diagram::Dwd(d.canonical()),
            Diagram::Cpg(d) => Diagram::Cpg(d.canonical()),
        }
    }

    /// Graphviz source; `labels` overrides the default box names `b0, b1, ...`.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        match self {
            Diagram::Uwd(d) => dot::uwd(d, labels),
            Diagram::Dwd(d) => dot::dwd(d, labels),
            Diagram::Cpg(d) => dot::cpg(d, labels),
        }
    }

    pub fn schema_name(&self) -> &'static str {
        match self {
            Diagram::Uwd(_) => "UWD",
            Diagram::Dwd(_) => "DWD",
            Diagram::Cpg(_) => "CPG",
        }
    }
}
