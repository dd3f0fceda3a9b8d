//! Open dynamical systems and the algebras that compose them over wiring
//! diagrams.
//!
//! A [`Machine`] is a directed system with inputs, states and outputs; a
//! [`ResourceSharer`] is an undirected system exposing some of its states
//! through ports. Both come in a continuous flavor (the dynamics is a vector
//! field) and a discrete flavor (the dynamics is the next-state map); the two
//! flavors compose by the same wiring rules except for undirected discrete
//! systems, which compose through their increments.
//!
//! Composites are closures over the wiring tables and the component systems;
//! nothing is flattened symbolically.

mod machine;
mod sharer;

pub use machine::{euler_directed, oapply_cpg, oapply_cpg_with, oapply_directed, oapply_directed_with, Machine};
pub use sharer::{
    euler_undirected, oapply_undirected, oapply_undirected_with, undirected_state_map, ResourceSharer,
};

use std::fmt;

use thiserror::Error;

use crate::wiring::WiringError;

/// Whether `dynamics` computes a time derivative or the next state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Continuous,
    Discrete,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Continuous => "continuous",
            Kind::Discrete => "discrete",
        })
    }
}

/// Failure raised by a component's own dynamics or readout.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct ModelError(pub String);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamError {
    #[error("{what} has length {actual}, expected {expected}")]
    Length { what: &'static str, expected: usize, actual: usize },
    #[error("diagram has {expected} boxes but {actual} systems were given")]
    BoxCount { expected: usize, actual: usize },
    #[error("box {index} expects interface {expected} but the system has {actual}")]
    Arity { index: usize, expected: String, actual: String },
    #[error("system {index} is {actual}, expected {expected}")]
    KindMismatch { index: usize, expected: Kind, actual: Kind },
    #[error("operation needs a {expected} system, got a {actual} one")]
    WrongKind { expected: Kind, actual: Kind },
    #[error("step size must be positive and finite, got {0}")]
    StepSize(f64),
    #[error("portmap sends port {port} to state {state}, but there are only {n_states} states")]
    Portmap { port: usize, state: usize, n_states: usize },
    #[error("model evaluation failed: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Wiring(#[from] WiringError),
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<(), DynamError> {
    if expected == actual {
        Ok(())
    } else {
        Err(DynamError::Length { what, expected, actual })
    }
}

fn check_step(h: f64) -> Result<(), DynamError> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(DynamError::StepSize(h))
    }
}

/// Common kind of a family of systems; empty families are continuous.
fn common_kind(kinds: impl Iterator<Item = Kind>) -> Result<Kind, DynamError> {
    let mut expected = None;
    for (index, k) in kinds.enumerate() {
        match expected {
            None => expected = Some(k),
            Some(e) if e != k => return Err(DynamError::KindMismatch { index, expected: e, actual: k }),
            _ => {}
        }
    }
    Ok(expected.unwrap_or(Kind::Continuous))
}

fn prefix_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|&n| {
            let o = acc;
            acc += n;
            o
        })
        .collect()
}
