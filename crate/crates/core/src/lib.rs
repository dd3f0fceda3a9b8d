//! Compositional dynamical systems.
//!
//! Wiring diagrams are instances of small fixed schemas ([`cset`]), composed
//! hierarchically by substitution ([`wiring`]). Open systems ([`dynam`]) are
//! composed along those diagrams, so a hierarchical model can be assembled
//! either by flattening the syntax first or by composing the systems level by
//! level, with the same result. Elementary systems can be written as
//! expressions and loaded from JSON ([`modelspec`]).

pub mod cset;
pub mod dynam;
pub mod exec;
pub mod finset;
pub mod wiring;
pub mod modelspec;
pub mod random;
