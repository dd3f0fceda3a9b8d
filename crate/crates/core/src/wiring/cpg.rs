use crate::cset::{CSetInstance, CPG, DWD_TO_CPG};

use super::uwd::offsets;
use super::{check_schema, grouping_permutation, local_index, ports_by_box, DWDiagram, WiringError};

/// A circular port graph: ports act as both inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CPGraph {
    inst: CSetInstance,
    ports: Vec<Vec<usize>>,
}

/// Port order of every grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl CPGraph {
    /// `port_counts[i]` ports on box `i`, numbered consecutively; wires are
    /// `(source, target)` port rows; `exposed[q]` is the port behind outer port `q`.
    pub fn new(port_counts: &[usize], wires: &[(usize, usize)], exposed: Vec<usize>) -> Result<Self, WiringError> {
        let owner: Vec<usize> =
            port_counts.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat_n(i, n)).collect();
        let (src, tgt): (Vec<usize>, Vec<usize>) = wires.iter().copied().unzip();
        let inst = CSetInstance::from_parts(
            CPG.clone(),
            &[("B", port_counts.len()), ("P", owner.len()), ("Q", exposed.len()), ("W", wires.len())],
            &[("box", owner), ("expose", exposed), ("src", src), ("tgt", tgt)],
        )?;
        Self::from_instance(inst)
    }

    pub fn from_instance(inst: CSetInstance) -> Result<Self, WiringError> {
        check_schema(&inst, "CPG")?;
        let ports = ports_by_box(inst.card("B"), inst.column("box"));
        Ok(Self { inst, ports })
    }

    pub fn identity(k: usize) -> Self {
        Self::new(&[k], &[], (0..k).collect()).expect("identity is well formed")
    }

    pub fn instance(&self) -> &CSetInstance {
        &self.inst
    }

    pub fn n_boxes(&self) -> usize {
        self.ports.len()
    }

    pub fn n_ports(&self) -> usize {
        self.inst.card("P")
    }

    pub fn n_outer(&self) -> usize {
        self.inst.card("Q")
    }

    pub fn n_wires(&self) -> usize {
        self.inst.card("W")
    }

    pub fn box_ports(&self, i: usize) -> &[usize] {
        &self.ports[i]
    }

    pub fn signature(&self) -> Vec<usize> {
        self.ports.iter().map(Vec::len).collect()
    }

    pub fn src(&self) -> &[usize] {
        self.inst.column("src")
    }

    pub fn tgt(&self) -> &[usize] {
        self.inst.column("tgt")
    }

    pub fn expose(&self) -> &[usize] {
        self.inst.column("expose")
    }

    pub fn owner(&self) -> &[usize] {
        self.inst.column("box")
    }

    /// View as a directed wiring diagram by duplicating every port.
    pub fn to_dwd(&self) -> DWDiagram {
        let inst = DWD_TO_CPG.migrate(&self.inst).expect("CPG instance");
        DWDiagram::from_instance(inst).expect("migration preserves validity")
    }

    pub fn canonical(&self) -> CPGraph {
        let perm = grouping_permutation(&self.ports, self.n_ports());
        let mut owner = vec![0; self.n_ports()];
        for (old, &new) in perm.iter().enumerate() {
            owner[new] = self.owner()[old];
        }
        let mut wires: Vec<(usize, usize)> = self.src().iter().zip(self.tgt()).map(|(&s, &t)| (perm[s], perm[t])).collect();
        wires.sort_unstable();
        let exposed = self.expose().iter().map(|&p| perm[p]).collect();
        let (src, tgt): (Vec<usize>, Vec<usize>) = wires.into_iter().unzip();
        let inst = CSetInstance::from_raw(CPG.clone(), self.inst.cards().to_vec(), vec![src, tgt, owner, exposed]);
        CPGraph::from_instance(inst).expect("relabeling preserves validity")
    }
}

/// Substitution of circular port graphs: outer port `k` of `inners[i]` is
/// identified with port `k` of box `i`.
pub fn ocompose_cpg(outer: &CPGraph, inners: &[CPGraph]) -> Result<CPGraph, WiringError> {
    if inners.len() != outer.n_boxes() {
        return Err(WiringError::InnerCount { expected: outer.n_boxes(), actual: inners.len() });
    }
    for (i, inner) in inners.iter().enumerate() {
        if inner.n_outer() != outer.ports[i].len() {
            return Err(WiringError::Arity {
                index: i,
                expected: outer.ports[i].len().to_string(),
                actual: inner.n_outer().to_string(),
            });
        }
    }
    let p_off = offsets(inners.iter().map(CPGraph::n_ports));
    let b_off = offsets(inners.iter().map(CPGraph::n_boxes));
    let loc = local_index(&outer.ports, outer.n_ports());
    let inner_port = |p: usize| {
        let (i, k) = loc[p];
        p_off[i] + inners[i].expose()[k]
    };

    let mut owner = Vec::new();
    let mut wires = Vec::new();
    for ((d, &po), &bo) in inners.iter().zip(&p_off).zip(&b_off) {
        owner.extend(d.owner().iter().map(|&b| b + bo));
        wires.extend(d.src().iter().zip(d.tgt()).map(|(&s, &t)| (s + po, t + po)));
    }
    wires.extend(outer.src().iter().zip(outer.tgt()).map(|(&s, &t)| (inner_port(s), inner_port(t))));
    let exposed: Vec<usize> = outer.expose().iter().map(|&p| inner_port(p)).collect();
    let n_boxes = inners.iter().map(CPGraph::n_boxes).sum();
    let (src, tgt): (Vec<usize>, Vec<usize>) = wires.into_iter().unzip();
    let inst = CSetInstance::from_raw(
        CPG.clone(),
        vec![n_boxes, owner.len(), exposed.len(), src.len()],
        vec![src, tgt, owner, exposed],
    );
    Ok(CPGraph::from_instance(inst)?.canonical())
}

/// `width × height` four-port nodes in row-major order, ports ordered
/// North, East, South, West. Each pair of neighbors is joined by two wires,
/// one per direction; every port without a neighbor is exposed, in
/// (box, port) order.
pub fn grid(width: usize, height: usize) -> Result<CPGraph, WiringError> {
    if width == 0 || height == 0 {
        return Err(WiringError::Shape(format!("grid needs positive dimensions, got {width}x{height}")));
    }
    let port = |x: usize, y: usize, side: Side| 4 * (y * width + x) + side as usize;
    let mut wires = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                let (a, b) = (port(x, y, Side::East), port(x + 1, y, Side::West));
                wires.extend([(a, b), (b, a)]);
            }
            if y + 1 < height {
                let (a, b) = (port(x, y, Side::South), port(x, y + 1, Side::North));
                wires.extend([(a, b), (b, a)]);
            }
        }
    }
    let n_ports = 4 * width * height;
    let mut wired = vec![false; n_ports];
    for &(s, _) in &wires {
        wired[s] = true;
    }
    let exposed = (0..n_ports).filter(|&p| !wired[p]).collect();
    CPGraph::new(&vec![4; width * height], &wires, exposed)
}
