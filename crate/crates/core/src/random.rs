//! Random diagrams and systems for property tests and benchmarks.
//!
//! Port rows of generated diagrams are shuffled, so they are generally not in
//! canonical form. Generated systems are smooth, with bounded nonlinear parts
//! (built from `sin`, `cos` and `tanh`) and a `-x` damping term, so Euler
//! trajectories with small steps stay in a bounded region.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cset::{CSetInstance, CPG, DWD, UWD};
use crate::dynam::{Kind, Machine, ResourceSharer};
use crate::wiring::{CPGraph, DWDiagram, UWDiagram};

/// Upper bounds for generated structures; every bound is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sizes {
    pub boxes: usize,
    pub ports: usize,
    pub junctions: usize,
    pub wires: usize,
    pub states: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self { boxes: 4, ports: 3, junctions: 4, wires: 5, states: 3 }
    }
}

fn permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Moves row `i` of `col` to row `perm[i]`.
fn permute_rows(col: &[usize], perm: &[usize]) -> Vec<usize> {
    let mut out = vec![0; col.len()];
    for (i, &v) in col.iter().enumerate() {
        out[perm[i]] = v;
    }
    out
}

fn relabel(col: &[usize], perm: &[usize]) -> Vec<usize> {
    col.iter().map(|&v| perm[v]).collect()
}

fn pairs(rng: &mut impl Rng, max: usize, left: usize, right: usize) -> Vec<(usize, usize)> {
    if left == 0 || right == 0 {
        return Vec::new();
    }
    let n = rng.random_range(0..=max);
    (0..n).map(|_| (rng.random_range(0..left), rng.random_range(0..right))).collect()
}

fn box_count(rng: &mut impl Rng, sizes: &Sizes, min_boxes: usize) -> usize {
    rng.random_range(min_boxes..=sizes.boxes.max(min_boxes))
}

/// A UWD with `n_outer` outer ports and at least `min_boxes` boxes.
pub fn uwd(rng: &mut impl Rng, n_outer: usize, min_boxes: usize, sizes: &Sizes) -> UWDiagram {
    let n_boxes = box_count(rng, sizes, min_boxes);
    let n_junctions = rng.random_range(1..=sizes.junctions.max(1));
    let boxes: Vec<Vec<usize>> = (0..n_boxes)
        .map(|_| (0..rng.random_range(0..=sizes.ports)).map(|_| rng.random_range(0..n_junctions)).collect())
        .collect();
    let outer = (0..n_outer).map(|_| rng.random_range(0..n_junctions)).collect();
    let d = UWDiagram::new(n_junctions, &boxes, outer).expect("in range");
    let inst = d.instance();
    let perm = permutation(rng, d.n_ports());
    let inst = CSetInstance::from_parts(
        UWD.clone(),
        &[("B", n_boxes), ("P", d.n_ports()), ("J", n_junctions), ("Q", n_outer)],
        &[
            ("box", permute_rows(inst.column("box"), &perm)),
            ("junc_in", permute_rows(inst.column("junc_in"), &perm)),
            ("junc_out", inst.column("junc_out").to_vec()),
        ],
    )
    .expect("permutation keeps validity");
    UWDiagram::from_instance(inst).expect("UWD")
}

/// A DWD with the given outer interface and at least `min_boxes` boxes.
pub fn dwd(rng: &mut impl Rng, n_in: usize, n_out: usize, min_boxes: usize, sizes: &Sizes) -> DWDiagram {
    let n_boxes = box_count(rng, sizes, min_boxes);
    let boxes: Vec<(usize, usize)> =
        (0..n_boxes).map(|_| (rng.random_range(0..=sizes.ports), rng.random_range(0..=sizes.ports))).collect();
    let p_in: usize = boxes.iter().map(|b| b.0).sum();
    let p_out: usize = boxes.iter().map(|b| b.1).sum();
    let w_in = pairs(rng, sizes.wires, n_in, p_in);
    let w = pairs(rng, sizes.wires, p_out, p_in);
    let w_out = pairs(rng, sizes.wires, p_out, n_out);
    let d = DWDiagram::new(&boxes, n_in, n_out, &w_in, &w, &w_out).expect("in range");
    let (pi, po) = (permutation(rng, p_in), permutation(rng, p_out));
    let inst = d.instance();
    let cards: Vec<(&str, usize)> =
        DWD.objects().iter().map(|o| o.as_str()).zip(inst.cards().iter().copied()).collect();
    let inst = CSetInstance::from_parts(
        DWD.clone(),
        &cards,
        &[
            ("src", relabel(inst.column("src"), &po)),
            ("tgt", relabel(inst.column("tgt"), &pi)),
            ("box_in", permute_rows(inst.column("box_in"), &pi)),
            ("box_out", permute_rows(inst.column("box_out"), &po)),
            ("src_in", inst.column("src_in").to_vec()),
            ("tgt_in", relabel(inst.column("tgt_in"), &pi)),
            ("src_out", relabel(inst.column("src_out"), &po)),
            ("tgt_out", inst.column("tgt_out").to_vec()),
        ],
    )
    .expect("permutation keeps validity");
    DWDiagram::from_instance(inst).expect("DWD")
}

/// A CPG with `n_outer` outer ports and at least `min_boxes` boxes. Boxes
/// without ports are allowed, but when `n_outer > 0` at least one port exists.
pub fn cpg(rng: &mut impl Rng, n_outer: usize, min_boxes: usize, sizes: &Sizes) -> CPGraph {
    let n_boxes = box_count(rng, sizes, min_boxes.max(usize::from(n_outer > 0)));
    let mut counts: Vec<usize> = (0..n_boxes).map(|_| rng.random_range(0..=sizes.ports)).collect();
    if n_outer > 0 && counts.iter().all(|&c| c == 0) {
        counts[0] = 1;
    }
    let n_ports: usize = counts.iter().sum();
    let wires = pairs(rng, sizes.wires, n_ports, n_ports);
    let exposed = (0..n_outer).map(|_| rng.random_range(0..n_ports)).collect();
    let g = CPGraph::new(&counts, &wires, exposed).expect("in range");
    let perm = permutation(rng, n_ports);
    let inst = g.instance();
    let inst = CSetInstance::from_parts(
        CPG.clone(),
        &[("B", n_boxes), ("P", n_ports), ("Q", n_outer), ("W", g.n_wires())],
        &[
            ("src", relabel(inst.column("src"), &perm)),
            ("tgt", relabel(inst.column("tgt"), &perm)),
            ("box", permute_rows(inst.column("box"), &perm)),
            ("expose", relabel(inst.column("expose"), &perm)),
        ],
    )
    .expect("permutation keeps validity");
    CPGraph::from_instance(inst).expect("CPG")
}

fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(row: &[f64], xs: impl Iterator<Item = f64>) -> f64 {
    row.iter().zip(xs).map(|(c, x)| c * x).sum()
}

/// A machine with `n_inputs`, `n_outputs` and between one and
/// `sizes.states` states: `u = c + A·sin(x) + B·cos(a) - x` and
/// `r = d + C·tanh(x)`.
pub fn machine(rng: &mut impl Rng, kind: Kind, n_inputs: usize, n_outputs: usize, sizes: &Sizes) -> Machine {
    let n = rng.random_range(1..=sizes.states.max(1));
    let (a, b, c) = (matrix(rng, n, n), matrix(rng, n, n_inputs), vector(rng, n));
    let (cr, d) = (matrix(rng, n_outputs, n), vector(rng, n_outputs));
    Machine::new(
        kind,
        n_inputs,
        n,
        n_outputs,
        move |inp, x, out| {
            for k in 0..out.len() {
                out[k] = c[k] + dot(&a[k], x.iter().map(|v| v.sin())) + dot(&b[k], inp.iter().map(|v| v.cos())) - x[k];
            }
            Ok(())
        },
        move |x, out| {
            for k in 0..out.len() {
                out[k] = d[k] + dot(&cr[k], x.iter().map(|v| v.tanh()));
            }
            Ok(())
        },
    )
}

/// A sharer with `n_ports` ports and between one and `sizes.states` states:
/// `v = c + A·sin(x) + B·cos(x) - x`.
pub fn sharer(rng: &mut impl Rng, kind: Kind, n_ports: usize, sizes: &Sizes) -> ResourceSharer {
    let n = rng.random_range(1..=sizes.states.max(1));
    let portmap = (0..n_ports).map(|_| rng.random_range(0..n)).collect();
    let (a, b, c) = (matrix(rng, n, n), matrix(rng, n, n), vector(rng, n));
    ResourceSharer::new(kind, n, portmap, move |x, out| {
        for k in 0..out.len() {
            out[k] = c[k] + dot(&a[k], x.iter().map(|v| v.sin())) + dot(&b[k], x.iter().map(|v| v.cos())) - x[k];
        }
        Ok(())
    })
    .expect("portmap in range")
}

pub fn machines_for(rng: &mut impl Rng, kind: Kind, signature: &[(usize, usize)], sizes: &Sizes) -> Vec<Machine> {
    signature.iter().map(|&(m, n)| machine(rng, kind, m, n, sizes)).collect()
}

pub fn sharers_for(rng: &mut impl Rng, kind: Kind, signature: &[usize], sizes: &Sizes) -> Vec<ResourceSharer> {
    signature.iter().map(|&k| sharer(rng, kind, k, sizes)).collect()
}

pub fn point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// An outer diagram and one inner diagram per box, each with at least one box.
pub fn nested_uwd(rng: &mut impl Rng, sizes: &Sizes) -> (UWDiagram, Vec<UWDiagram>) {
    let n_outer = rng.random_range(0..=sizes.ports);
    let outer = uwd(rng, n_outer, 1, sizes);
    let inners = outer.signature().into_iter().map(|k| uwd(rng, k, 1, sizes)).collect();
    (outer, inners)
}

pub fn nested_dwd(rng: &mut impl Rng, sizes: &Sizes) -> (DWDiagram, Vec<DWDiagram>) {
    let (m, n) = (rng.random_range(0..=sizes.ports), rng.random_range(0..=sizes.ports));
    let outer = dwd(rng, m, n, 1, sizes);
    let inners = outer.signature().into_iter().map(|(m, n)| dwd(rng, m, n, 1, sizes)).collect();
    (outer, inners)
}

pub fn nested_cpg(rng: &mut impl Rng, sizes: &Sizes) -> (CPGraph, Vec<CPGraph>) {
    let n_outer = rng.random_range(0..=sizes.ports);
    let outer = cpg(rng, n_outer, 1, sizes);
    let inners = outer.signature().into_iter().map(|k| cpg(rng, k, 1, sizes)).collect();
    (outer, inners)
}
