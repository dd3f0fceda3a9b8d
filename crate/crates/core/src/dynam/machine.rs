use std::fmt;
use std::sync::Arc;

use crate::exec::{self, Exec};
use crate::finset::FinFunction;
use crate::wiring::{CPGraph, DWDiagram};

use super::{check_len, check_step, common_kind, prefix_offsets, DynamError, Kind, ModelError};

type DynamicsFn = dyn Fn(&[f64], &[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync;
type ReadoutFn = dyn Fn(&[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync;

/// A directed open system: `dynamics(input, state)` and `readout(state)`.
#[derive(Clone)]
pub struct Machine {
    n_inputs: usize,
    n_states: usize,
    n_outputs: usize,
    kind: Kind,
    dynamics: Arc<DynamicsFn>,
    readout: Arc<ReadoutFn>,
}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Machine")
            .field("n_inputs", &self.n_inputs)
            .field("n_states", &self.n_states)
            .field("n_outputs", &self.n_outputs)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl Machine {
    /// `dynamics` writes `u(input, state)` into its third argument and
    /// `readout` writes `r(state)` into its second; both buffers arrive zeroed
    /// and correctly sized.
    pub fn new<D, R>(kind: Kind, n_inputs: usize, n_states: usize, n_outputs: usize, dynamics: D, readout: R) -> Self
    where
        D: Fn(&[f64], &[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync + 'static,
        R: Fn(&[f64], &mut [f64]) -> Result<(), ModelError> + Send + Sync + 'static,
    {
        Self { n_inputs, n_states, n_outputs, kind, dynamics: Arc::new(dynamics), readout: Arc::new(readout) }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// `u(input, state)`: a derivative for continuous machines, the next
    /// state for discrete ones.
    pub fn eval_dynamics(&self, input: &[f64], state: &[f64]) -> Result<Vec<f64>, DynamError> {
        check_len("input", self.n_inputs, input.len())?;
        check_len("state", self.n_states, state.len())?;
        let mut out = vec![0.0; self.n_states];
        (self.dynamics)(input, state, &mut out)?;
        Ok(out)
    }

    pub fn eval_readout(&self, state: &[f64]) -> Result<Vec<f64>, DynamError> {
        check_len("state", self.n_states, state.len())?;
        let mut out = vec![0.0; self.n_outputs];
        (self.readout)(state, &mut out)?;
        Ok(out)
    }

    pub(crate) fn dynamics_into(&self, input: &[f64], state: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        (self.dynamics)(input, state, out)
    }

    pub(crate) fn readout_into(&self, state: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        (self.readout)(state, out)
    }
}

/// Explicit Euler: `(a, x) ↦ x + h·u(a, x)`, readout unchanged.
pub fn euler_directed(m: &Machine, h: f64) -> Result<Machine, DynamError> {
    if m.kind != Kind::Continuous {
        return Err(DynamError::WrongKind { expected: Kind::Continuous, actual: m.kind });
    }
    check_step(h)?;
    let inner = m.dynamics.clone();
    Ok(Machine {
        kind: Kind::Discrete,
        dynamics: Arc::new(move |a: &[f64], x: &[f64], out: &mut [f64]| {
            inner(a, x, out)?;
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = xi + h * *o;
            }
            Ok(())
        }),
        ..m.clone()
    })
}

/// Box-indexed layout shared by the directed composites.
struct Components {
    machines: Vec<Machine>,
    state_sizes: Vec<usize>,
    state_off: Vec<usize>,
    in_sizes: Vec<usize>,
    in_off: Vec<usize>,
    out_sizes: Vec<usize>,
    exec: Exec,
}

impl Components {
    fn new(machines: &[Machine], exec: Exec) -> Self {
        let state_sizes: Vec<usize> = machines.iter().map(Machine::n_states).collect();
        let in_sizes: Vec<usize> = machines.iter().map(Machine::n_inputs).collect();
        let out_sizes: Vec<usize> = machines.iter().map(Machine::n_outputs).collect();
        Self {
            state_off: prefix_offsets(&state_sizes),
            in_off: prefix_offsets(&in_sizes),
            machines: machines.to_vec(),
            state_sizes,
            in_sizes,
            out_sizes,
            exec,
        }
    }

    fn total_states(&self) -> usize {
        self.state_sizes.iter().sum()
    }

    fn state<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        &x[self.state_off[i]..self.state_off[i] + self.state_sizes[i]]
    }

    /// All readouts, concatenated box by box.
    fn readouts(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut o = vec![0.0; self.out_sizes.iter().sum()];
        exec::try_for_each_block(self.exec, &mut o, &self.out_sizes, |i, block| {
            self.machines[i].readout_into(self.state(x, i), block)
        })?;
        Ok(o)
    }

    /// All dynamics, given every box's inputs concatenated box by box.
    fn dynamics(&self, inputs: &[f64], x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        exec::try_for_each_block(self.exec, out, &self.state_sizes, |i, block| {
            let a = &inputs[self.in_off[i]..self.in_off[i] + self.in_sizes[i]];
            self.machines[i].dynamics_into(a, self.state(x, i), block)
        })
    }
}

fn check_signature(sig: &[(usize, usize)], machines: &[Machine]) -> Result<Kind, DynamError> {
    if sig.len() != machines.len() {
        return Err(DynamError::BoxCount { expected: sig.len(), actual: machines.len() });
    }
    for (index, (&(m, n), mach)) in sig.iter().zip(machines).enumerate() {
        if (mach.n_inputs, mach.n_outputs) != (m, n) {
            return Err(DynamError::Arity {
                index,
                expected: format!("{m} in / {n} out"),
                actual: format!("{} in / {} out", mach.n_inputs, mach.n_outputs),
            });
        }
    }
    common_kind(machines.iter().map(Machine::kind))
}

/// Rows of the box-ordered concatenation, as a map into the port table.
fn port_rows(by_box: impl Iterator<Item = Vec<usize>>, n_ports: usize) -> FinFunction {
    FinFunction::new(by_box.flatten().collect(), n_ports).expect("port rows")
}

struct DirectedWiring {
    parts: Components,
    outer_in: usize,
    in_rows: FinFunction,
    out_rows: FinFunction,
    src: FinFunction,
    tgt: FinFunction,
    src_in: FinFunction,
    tgt_in: FinFunction,
    src_out: FinFunction,
    tgt_out: FinFunction,
}

impl DirectedWiring {
    /// Readouts laid out over the out-port table.
    fn out_port_values(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let o_box = self.parts.readouts(x)?;
        let mut o = vec![0.0; self.out_rows.cod()];
        for (&p, v) in self.out_rows.as_slice().iter().zip(o_box) {
            o[p] = v;
        }
        Ok(o)
    }

    fn dynamics(&self, a: &[f64], x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        debug_assert_eq!(a.len(), self.outer_in);
        let o = self.out_port_values(x)?;
        let mut ports = vec![0.0; self.in_rows.cod()];
        let mut wire = vec![0.0; self.src.dom()];
        self.src.pullback_into(&o, &mut wire);
        self.tgt.pushforward_add(&wire, &mut ports);
        let mut wire = vec![0.0; self.src_in.dom()];
        self.src_in.pullback_into(a, &mut wire);
        self.tgt_in.pushforward_add(&wire, &mut ports);
        let mut inputs = vec![0.0; self.in_rows.dom()];
        self.in_rows.pullback_into(&ports, &mut inputs);
        self.parts.dynamics(&inputs, x, out)
    }

    fn readout(&self, x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        let o = self.out_port_values(x)?;
        let mut wire = vec![0.0; self.src_out.dom()];
        self.src_out.pullback_into(&o, &mut wire);
        self.tgt_out.pushforward_add(&wire, out);
        Ok(())
    }
}

/// Composes machines along a directed wiring diagram.
///
/// Each step reads out every component, sums the wires arriving at each
/// in-port (outer inputs included; unwired in-ports read `0.0`) and then runs
/// every component's dynamics. The composite state is the concatenation of the
/// component states in box order.
pub fn oapply_directed(d: &DWDiagram, machines: &[Machine]) -> Result<Machine, DynamError> {
    oapply_directed_with(d, machines, Exec::Sequential)
}

/// [`oapply_directed`] with a choice of per-box evaluation policy.
pub fn oapply_directed_with(d: &DWDiagram, machines: &[Machine], exec: Exec) -> Result<Machine, DynamError> {
    let kind = check_signature(&d.signature(), machines)?;
    let n_boxes = d.n_boxes();
    let wiring = DirectedWiring {
        parts: Components::new(machines, exec),
        outer_in: d.n_outer_in(),
        in_rows: port_rows((0..n_boxes).map(|i| d.in_ports(i).to_vec()), d.n_in_ports()),
        out_rows: port_rows((0..n_boxes).map(|i| d.out_ports(i).to_vec()), d.n_out_ports()),
        src: d.hom("src"),
        tgt: d.hom("tgt"),
        src_in: d.hom("src_in"),
        tgt_in: d.hom("tgt_in"),
        src_out: d.hom("src_out"),
        tgt_out: d.hom("tgt_out"),
    };
    let n_states = wiring.parts.total_states();
    let wiring = Arc::new(wiring);
    let w2 = wiring.clone();
    Ok(Machine::new(
        kind,
        d.n_outer_in(),
        n_states,
        d.n_outer_out(),
        move |a, x, out| wiring.dynamics(a, x, out),
        move |x, out| w2.readout(x, out),
    ))
}

struct CpgWiring {
    parts: Components,
    rows: Vec<usize>,
    n_ports: usize,
    src: Vec<usize>,
    tgt: Vec<usize>,
    expose: Vec<usize>,
}

impl CpgWiring {
    fn port_values(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let o_box = self.parts.readouts(x)?;
        let mut o = vec![0.0; self.n_ports];
        for (&p, v) in self.rows.iter().zip(o_box) {
            o[p] = v;
        }
        Ok(o)
    }

    fn dynamics(&self, a: &[f64], x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        let o = self.port_values(x)?;
        let mut ports = vec![0.0; self.n_ports];
        for (&s, &t) in self.src.iter().zip(&self.tgt) {
            ports[t] += o[s];
        }
        for (&p, &v) in self.expose.iter().zip(a) {
            ports[p] += v;
        }
        let inputs: Vec<f64> = self.rows.iter().map(|&p| ports[p]).collect();
        self.parts.dynamics(&inputs, x, out)
    }

    fn readout(&self, x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        let o = self.port_values(x)?;
        for (slot, &p) in out.iter_mut().zip(&self.expose) {
            *slot = o[p];
        }
        Ok(())
    }
}

/// Composes machines along a circular port graph without building the
/// duplicated-port directed diagram. Agrees with
/// `oapply_directed(&g.to_dwd(), machines)`.
pub fn oapply_cpg(g: &CPGraph, machines: &[Machine]) -> Result<Machine, DynamError> {
    oapply_cpg_with(g, machines, Exec::Sequential)
}

pub fn oapply_cpg_with(g: &CPGraph, machines: &[Machine], exec: Exec) -> Result<Machine, DynamError> {
    let sig: Vec<(usize, usize)> = g.signature().into_iter().map(|n| (n, n)).collect();
    let kind = check_signature(&sig, machines)?;
    let wiring = CpgWiring {
        parts: Components::new(machines, exec),
        rows: (0..g.n_boxes()).flat_map(|i| g.box_ports(i).to_vec()).collect(),
        n_ports: g.n_ports(),
        src: g.src().to_vec(),
        tgt: g.tgt().to_vec(),
        expose: g.expose().to_vec(),
    };
    let n_states = wiring.parts.total_states();
    let wiring = Arc::new(wiring);
    let w2 = wiring.clone();
    Ok(Machine::new(
        kind,
        g.n_outer(),
        n_states,
        g.n_outer(),
        move |a, x, out| wiring.dynamics(a, x, out),
        move |x, out| w2.readout(x, out),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiring::grid;

    fn constant_field() -> Machine {
        Machine::new(
            Kind::Continuous,
            1,
            1,
            1,
            |a, _x, out| {
                out[0] = a[0];
                Ok(())
            },
            |x, out| {
                out[0] = x[0];
                Ok(())
            },
        )
    }

    fn sir(beta: f64, gamma: f64) -> Machine {
        Machine::new(
            Kind::Continuous,
            0,
            3,
            3,
            move |_a, x, out| {
                let (s, i) = (x[0], x[1]);
                out[0] = -beta * s * i;
                out[1] = beta * s * i - gamma * i;
                out[2] = gamma * i;
                Ok(())
            },
            |x, out| {
                out.copy_from_slice(x);
                Ok(())
            },
        )
    }

    #[test]
    fn eval_examples() {
        let m = sir(0.5, 0.25);
        assert_eq!(m.eval_dynamics(&[], &[10.0, 1.0, 0.0]).unwrap(), vec![-5.0, 4.75, 0.25]);
        let empty = Machine::new(Kind::Discrete, 0, 0, 0, |_, _, _| Ok(()), |_, _| Ok(()));
        assert!(empty.eval_dynamics(&[], &[]).unwrap().is_empty());
        assert_eq!(constant_field().eval_dynamics(&[3.0], &[-8.0]).unwrap(), vec![3.0]);
        assert!(matches!(
            m.eval_dynamics(&[], &[1.0]),
            Err(DynamError::Length { what: "state", expected: 3, actual: 1 })
        ));
    }

    #[test]
    fn euler_examples() {
        let grow = Machine::new(
            Kind::Continuous,
            0,
            1,
            1,
            |_, x, out| {
                out[0] = x[0];
                Ok(())
            },
            |x, out| {
                out[0] = 2.0 * x[0];
                Ok(())
            },
        );
        let step = euler_directed(&grow, 0.1).unwrap();
        assert_eq!(step.kind(), Kind::Discrete);
        assert_eq!(step.eval_dynamics(&[], &[1.0]).unwrap(), vec![1.1]);
        assert_eq!(step.eval_readout(&[3.0]).unwrap(), grow.eval_readout(&[3.0]).unwrap());

        let still = Machine::new(Kind::Continuous, 0, 2, 0, |_, _, _| Ok(()), |_, _| Ok(()));
        assert_eq!(euler_directed(&still, 7.0).unwrap().eval_dynamics(&[], &[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);

        assert!(matches!(euler_directed(&step, 0.1), Err(DynamError::WrongKind { .. })));
        assert!(matches!(euler_directed(&grow, 0.0), Err(DynamError::StepSize(_))));
        assert!(matches!(euler_directed(&grow, f64::NAN), Err(DynamError::StepSize(_))));
    }

    #[test]
    fn identity_diagram_is_behavioral_identity() {
        let m = constant_field();
        let c = oapply_directed(&DWDiagram::identity(1, 1), std::slice::from_ref(&m)).unwrap();
        for (a, x) in [(0.5, 1.0), (-3.0, 2.5)] {
            assert_eq!(c.eval_dynamics(&[a], &[x]).unwrap(), m.eval_dynamics(&[a], &[x]).unwrap());
            assert_eq!(c.eval_readout(&[x]).unwrap(), m.eval_readout(&[x]).unwrap());
        }
    }

    #[test]
    fn merged_wires_sum_and_missing_wires_read_zero() {
        // two sources wired into one in-port of a third box; its second in-port is unwired
        let source = |v: f64| {
            Machine::new(Kind::Continuous, 0, 1, 1, |_, _, _| Ok(()), move |_, out| {
                out[0] = v;
                Ok(())
            })
        };
        let probe = Machine::new(
            Kind::Continuous,
            2,
            2,
            0,
            |a, _, out| {
                out.copy_from_slice(a);
                Ok(())
            },
            |_, _| Ok(()),
        );
        let d = DWDiagram::new(&[(0, 1), (0, 1), (2, 0)], 0, 0, &[], &[(0, 0), (1, 0)], &[]).unwrap();
        let c = oapply_directed(&d, &[source(2.0), source(3.5), probe]).unwrap();
        assert_eq!(c.n_states(), 4);
        assert_eq!(c.eval_dynamics(&[], &[0.0; 4]).unwrap(), vec![0.0, 0.0, 5.5, 0.0]);
    }

    #[test]
    fn signature_and_kind_errors() {
        let d = DWDiagram::identity(1, 1);
        let wrong = Machine::new(Kind::Continuous, 2, 1, 1, |_, _, _| Ok(()), |_, _| Ok(()));
        assert!(matches!(oapply_directed(&d, &[wrong]), Err(DynamError::Arity { index: 0, .. })));
        assert!(matches!(oapply_directed(&d, &[]), Err(DynamError::BoxCount { expected: 1, actual: 0 })));
        let two = DWDiagram::new(&[(1, 1), (1, 1)], 0, 0, &[], &[], &[]).unwrap();
        let disc = euler_directed(&constant_field(), 0.1).unwrap();
        assert!(matches!(
            oapply_directed(&two, &[constant_field(), disc]),
            Err(DynamError::KindMismatch { index: 1, .. })
        ));
    }

    fn echo4() -> Machine {
        // state i integrates in-port i; readout exposes the state
        Machine::new(
            Kind::Continuous,
            4,
            4,
            4,
            |a, x, out| {
                for k in 0..4 {
                    out[k] = a[k] - 0.5 * x[k];
                }
                Ok(())
            },
            |x, out| {
                out.copy_from_slice(x);
                Ok(())
            },
        )
    }

    #[test]
    fn cpg_single_node_routes_boundary_inputs() {
        let g = grid(1, 1).unwrap();
        let m = echo4();
        let c = oapply_cpg(&g, std::slice::from_ref(&m)).unwrap();
        let a = [1.0, 2.0, 3.0, 4.0];
        let x = [0.5, -0.5, 1.5, 2.0];
        assert_eq!(c.eval_dynamics(&a, &x).unwrap(), m.eval_dynamics(&a, &x).unwrap());
        assert_eq!(c.eval_readout(&x).unwrap(), x.to_vec());
        assert_eq!(c.eval_dynamics(&[0.0; 4], &x).unwrap(), m.eval_dynamics(&[0.0; 4], &x).unwrap());
    }

    #[test]
    fn cpg_east_port_reads_west_neighbor() {
        let g = grid(2, 1).unwrap();
        let c = oapply_cpg(&g, &[echo4(), echo4()]).unwrap();
        let x = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 9.0];
        let du = c.eval_dynamics(&[0.0; 6], &x).unwrap();
        // box 0 East in-port (state 1) receives box 1 West readout (9.0)
        assert_eq!(du[1], 9.0);
        let via_dwd = oapply_directed(&g.to_dwd(), &[echo4(), echo4()]).unwrap();
        assert_eq!(via_dwd.eval_dynamics(&[0.0; 6], &x).unwrap(), du);
    }

    #[test]
    fn parallel_policy_matches_sequential() {
        let g = grid(3, 2).unwrap();
        let ms = vec![echo4(); 6];
        let seq = oapply_cpg(&g, &ms).unwrap();
        let par = oapply_cpg_with(&g, &ms, Exec::Parallel).unwrap();
        let x: Vec<f64> = (0..24).map(|i| (i as f64).sin()).collect();
        let a: Vec<f64> = (0..g.n_outer()).map(|i| i as f64).collect();
        assert_eq!(seq.eval_dynamics(&a, &x).unwrap(), par.eval_dynamics(&a, &x).unwrap());
    }

    #[test]
    fn model_errors_propagate() {
        let failing = Machine::new(
            Kind::Continuous,
            1,
            1,
            1,
            |_, _, _| Err(ModelError("boom".into())),
            |_, _| Ok(()),
        );
        let c = oapply_directed(&DWDiagram::identity(1, 1), &[failing]).unwrap();
        assert!(matches!(c.eval_dynamics(&[0.0], &[0.0]), Err(DynamError::Model(_))));
    }
}
