use std::fmt;
use std::sync::Arc;

use crate::exec::{self, Exec};
use crate::finset::{pushout, FinFunction, PushoutResult};
use crate::wiring::UWDiagram;

use super::{check_len, check_step, common_kind, prefix_offsets, DynamError, Kind, ModelError};

type FieldFn = dyn Fn(&[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync;

/// An undirected open system exposing states through `portmap: ports → states`.
#[derive(Clone)]
pub struct ResourceSharer {
    n_states: usize,
    portmap: FinFunction,
    kind: Kind,
    dynamics: Arc<FieldFn>,
}

impl fmt::Debug for ResourceSharer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResourceSharer")
            .field("n_states", &self.n_states)
            .field("portmap", &self.portmap.as_slice())
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl ResourceSharer {
    /// `portmap[k]` is the state behind port `k`. `dynamics` writes into a
    /// zeroed buffer of length `n_states`.
    pub fn new<D>(kind: Kind, n_states: usize, portmap: Vec<usize>, dynamics: D) -> Result<Self, DynamError>
    where
        D: Fn(&[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync + 'static,
    {
        if let Some((port, &state)) = portmap.iter().enumerate().find(|(_, &s)| s >= n_states) {
            return Err(DynamError::Portmap { port, state, n_states });
        }
        let portmap = FinFunction::new(portmap, n_states).expect("checked above");
        Ok(Self { n_states, portmap, kind, dynamics: Arc::new(dynamics) })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_ports(&self) -> usize {
        self.portmap.dom()
    }

    pub fn portmap(&self) -> &FinFunction {
        &self.portmap
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn eval_dynamics(&self, state: &[f64]) -> Result<Vec<f64>, DynamError> {
        check_len("state", self.n_states, state.len())?;
        let mut out = vec![0.0; self.n_states];
        (self.dynamics)(state, &mut out)?;
        Ok(out)
    }

    pub(crate) fn dynamics_into(&self, state: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        (self.dynamics)(state, out)
    }
}

/// `x ↦ x + h·v(x)`, portmap unchanged.
pub fn euler_undirected(s: &ResourceSharer, h: f64) -> Result<ResourceSharer, DynamError> {
    if s.kind != Kind::Continuous {
        return Err(DynamError::WrongKind { expected: Kind::Continuous, actual: s.kind });
    }
    check_step(h)?;
    let inner = s.dynamics.clone();
    Ok(ResourceSharer {
        kind: Kind::Discrete,
        dynamics: Arc::new(move |x: &[f64], out: &mut [f64]| {
            inner(x, out)?;
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = xi + h * *o;
            }
            Ok(())
        }),
        ..s.clone()
    })
}

fn check_signature(d: &UWDiagram, sharers: &[ResourceSharer]) -> Result<Kind, DynamError> {
    if d.n_boxes() != sharers.len() {
        return Err(DynamError::BoxCount { expected: d.n_boxes(), actual: sharers.len() });
    }
    for (index, s) in sharers.iter().enumerate() {
        if s.n_ports() != d.arity(index) {
            return Err(DynamError::Arity {
                index,
                expected: format!("{} ports", d.arity(index)),
                actual: format!("{} ports", s.n_ports()),
            });
        }
    }
    common_kind(sharers.iter().map(ResourceSharer::kind))
}

/// Pushout of the component states and the junctions along the ports:
/// `inj_left` sends component states (concatenated in box order) into the
/// composite states, `inj_right` sends junctions there.
pub fn undirected_state_map(d: &UWDiagram, sharers: &[ResourceSharer]) -> Result<PushoutResult, DynamError> {
    check_signature(d, sharers)?;
    Ok(state_pushout(d, sharers))
}

fn state_pushout(d: &UWDiagram, sharers: &[ResourceSharer]) -> PushoutResult {
    let p = FinFunction::sum_all(sharers.iter().map(ResourceSharer::portmap));
    pushout(&p, &d.junc_in_by_box()).expect("ports agree on both legs")
}

struct Gluing {
    sharers: Vec<ResourceSharer>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    glue: FinFunction,
    kind: Kind,
    exec: Exec,
}

impl Gluing {
    fn dynamics(&self, x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        let mut local = vec![0.0; self.glue.dom()];
        self.glue.pullback_into(x, &mut local);
        let mut field = vec![0.0; local.len()];
        exec::try_for_each_block(self.exec, &mut field, &self.sizes, |i, block| {
            let start = self.offsets[i];
            self.sharers[i].dynamics_into(&local[start..start + self.sizes[i]], block)
        })?;
        match self.kind {
            Kind::Continuous => self.glue.pushforward_add(&field, out),
            Kind::Discrete => {
                for (f, l) in field.iter_mut().zip(&local) {
                    *f -= l;
                }
                out.copy_from_slice(x);
                self.glue.pushforward_add(&field, out);
            }
        }
        Ok(())
    }
}

/// Composes sharers along an undirected wiring diagram by identifying every
/// state reachable from a common junction.
///
/// Continuous composites sum the component vector fields over each glued
/// state. Discrete composites sum the component increments `u(x) − x`, so
/// a state outside every component (a junction no port touches) stays fixed.
pub fn oapply_undirected(d: &UWDiagram, sharers: &[ResourceSharer]) -> Result<ResourceSharer, DynamError> {
    oapply_undirected_with(d, sharers, Exec::Sequential)
}

pub fn oapply_undirected_with(d: &UWDiagram, sharers: &[ResourceSharer], exec: Exec) -> Result<ResourceSharer, DynamError> {
    let kind = check_signature(d, sharers)?;
    let po = state_pushout(d, sharers);
    let portmap = d.junc_out_fn().compose(&po.inj_right).expect("junctions agree");
    let sizes: Vec<usize> = sharers.iter().map(ResourceSharer::n_states).collect();
    let gluing = Gluing {
        sharers: sharers.to_vec(),
        offsets: prefix_offsets(&sizes),
        sizes,
        glue: po.inj_left,
        kind,
        exec,
    };
    Ok(ResourceSharer {
        n_states: po.apex_size,
        portmap,
        kind,
        dynamics: Arc::new(move |x: &[f64], out: &mut [f64]| gluing.dynamics(x, out)),
    })
}
