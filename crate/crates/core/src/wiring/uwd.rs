use crate::cset::{CSetInstance, UWD};
use crate::finset::{first_appearance, pushout, FinFunction};

use super::{check_schema, grouping_permutation, ports_by_box, WiringError};

/// An undirected wiring diagram: boxes with ports attached to junctions, and
/// outer ports attached to junctions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UWDiagram {
    inst: CSetInstance,
    ports: Vec<Vec<usize>>,
}

impl UWDiagram {
    /// `boxes[i]` lists the junction of each port of box `i`; `outer` lists
    /// the junction of each outer port.
    pub fn new(n_junctions: usize, boxes: &[Vec<usize>], outer: Vec<usize>) -> Result<Self, WiringError> {
        let owner: Vec<usize> = boxes.iter().enumerate().flat_map(|(i, ps)| std::iter::repeat_n(i, ps.len())).collect();
        let junc_in: Vec<usize> = boxes.iter().flatten().copied().collect();
        let inst = CSetInstance::from_parts(
            UWD.clone(),
            &[("B", boxes.len()), ("P", owner.len()), ("J", n_junctions), ("Q", outer.len())],
            &[("box", owner), ("junc_in", junc_in), ("junc_out", outer)],
        )?;
        Self::from_instance(inst)
    }

    pub fn from_instance(inst: CSetInstance) -> Result<Self, WiringError> {
        check_schema(&inst, "UWD")?;
        let ports = ports_by_box(inst.card("B"), inst.column("box"));
        Ok(Self { inst, ports })
    }

    /// The unit term on `k` ports.
    pub fn identity(k: usize) -> Self {
        Self::new(k, &[(0..k).collect()], (0..k).collect()).expect("identity is well formed")
    }

    pub fn instance(&self) -> &CSetInstance {
        &self.inst
    }

    pub fn into_instance(self) -> CSetInstance {
        self.inst
    }

    pub fn n_boxes(&self) -> usize {
        self.ports.len()
    }

    pub fn n_ports(&self) -> usize {
        self.inst.card("P")
    }

    pub fn n_junctions(&self) -> usize {
        self.inst.card("J")
    }

    pub fn n_outer(&self) -> usize {
        self.inst.card("Q")
    }

    /// Port rows of box `i`, in order.
    pub fn box_ports(&self, i: usize) -> &[usize] {
        &self.ports[i]
    }

    pub fn arity(&self, i: usize) -> usize {
        self.ports[i].len()
    }

    /// Port count of every box.
    pub fn signature(&self) -> Vec<usize> {
        self.ports.iter().map(Vec::len).collect()
    }

    pub fn junc_in(&self) -> &[usize] {
        self.inst.column("junc_in")
    }

    pub fn junc_out(&self) -> &[usize] {
        self.inst.column("junc_out")
    }

    pub fn owner(&self) -> &[usize] {
        self.inst.column("box")
    }

    /// The junction of each port, listed box by box: the map `M -> J` where
    /// `M` is the sum of the box interfaces.
    pub fn junc_in_by_box(&self) -> FinFunction {
        let ji = self.junc_in();
        let map = self.ports.iter().flatten().map(|&p| ji[p]).collect();
        FinFunction::new(map, self.n_junctions()).expect("valid diagram")
    }

    pub fn junc_out_fn(&self) -> FinFunction {
        FinFunction::new(self.junc_out().to_vec(), self.n_junctions()).expect("valid diagram")
    }

    /// Ports regrouped box by box, junctions renumbered by first appearance
    /// along the ports and then the outer ports.
    pub fn canonical(&self) -> UWDiagram {
        self.canonical_with_relabel().0
    }

    fn canonical_with_relabel(&self) -> (UWDiagram, FinFunction) {
        let perm = grouping_permutation(&self.ports, self.n_ports());
        let ji = self.junc_in();
        let order: Vec<usize> = self.ports.iter().flatten().map(|&p| ji[p]).collect();
        let relabel = first_appearance(self.n_junctions(), order.iter().chain(self.junc_out()));
        let mut owner = vec![0; self.n_ports()];
        let mut junc_in = vec![0; self.n_ports()];
        for (old, &new) in perm.iter().enumerate() {
            owner[new] = self.owner()[old];
            junc_in[new] = relabel.get(ji[old]);
        }
        let junc_out = self.junc_out().iter().map(|&j| relabel.get(j)).collect();
        let inst = CSetInstance::from_parts(
            UWD.clone(),
            &[("B", self.n_boxes()), ("P", self.n_ports()), ("J", self.n_junctions()), ("Q", self.n_outer())],
            &[("box", owner), ("junc_in", junc_in), ("junc_out", junc_out)],
        )
        .expect("schema names");
        (UWDiagram::from_instance(inst).expect("relabeling preserves validity"), relabel)
    }
}

/// Substitutes `inners[i]` into box `i` of `outer`.
pub fn ocompose_uwd(outer: &UWDiagram, inners: &[UWDiagram]) -> Result<UWDiagram, WiringError> {
    ocompose_uwd_traced(outer, inners).map(|(d, _)| d)
}

/// Like [`ocompose_uwd`], also returning the quotient map from
/// `J_outer + J_inner_0 + ... ` onto the junctions of the composite.
pub fn ocompose_uwd_traced(outer: &UWDiagram, inners: &[UWDiagram]) -> Result<(UWDiagram, FinFunction), WiringError> {
    if inners.len() != outer.n_boxes() {
        return Err(WiringError::InnerCount { expected: outer.n_boxes(), actual: inners.len() });
    }
    for (i, inner) in inners.iter().enumerate() {
        if inner.n_outer() != outer.arity(i) {
            return Err(WiringError::Arity {
                index: i,
                expected: outer.arity(i).to_string(),
                actual: inner.n_outer().to_string(),
            });
        }
    }

    let j_offsets: Vec<usize> = offsets(inners.iter().map(UWDiagram::n_junctions));
    let total_j = j_offsets.last().copied().unwrap_or(0) + inners.last().map_or(0, UWDiagram::n_junctions);

    // Span  J_outer <- (outer ports, box by box) -> sum of inner junctions.
    let to_outer = outer.junc_in_by_box();
    let to_inner: Vec<usize> = inners
        .iter()
        .zip(&j_offsets)
        .flat_map(|(inner, &off)| inner.junc_out().iter().map(move |&j| off + j))
        .collect();
    let to_inner = FinFunction::new(to_inner, total_j)?;
    let po = pushout(&to_outer, &to_inner)?;

    let b_offsets = offsets(inners.iter().map(UWDiagram::n_boxes));
    let mut owner = Vec::new();
    let mut junc_in = Vec::new();
    for ((inner, &boff), &joff) in inners.iter().zip(&b_offsets).zip(&j_offsets) {
        owner.extend(inner.owner().iter().map(|&b| boff + b));
        junc_in.extend(inner.junc_in().iter().map(|&j| po.inj_right.get(joff + j)));
    }
    let junc_out: Vec<usize> = outer.junc_out().iter().map(|&j| po.inj_left.get(j)).collect();
    let n_boxes = inners.iter().map(UWDiagram::n_boxes).sum();
    let inst = CSetInstance::from_parts(
        UWD.clone(),
        &[("B", n_boxes), ("P", owner.len()), ("J", po.apex_size), ("Q", junc_out.len())],
        &[("box", owner), ("junc_in", junc_in), ("junc_out", junc_out)],
    )?;
    let (composite, relabel) = UWDiagram::from_instance(inst)?.canonical_with_relabel();
    let trace = po.inj_left.copair(&po.inj_right)?.compose(&relabel)?;
    Ok((composite, trace))
}

/// Substitutes `inner` into box `slot` only, padding the other boxes with
/// identity diagrams.
pub fn ocompose_uwd_at(outer: &UWDiagram, slot: usize, inner: &UWDiagram) -> Result<UWDiagram, WiringError> {
    if slot >= outer.n_boxes() {
        return Err(WiringError::Slot { index: slot, boxes: outer.n_boxes() });
    }
    let inners: Vec<UWDiagram> = (0..outer.n_boxes())
        .map(|i| if i == slot { inner.clone() } else { UWDiagram::identity(outer.arity(i)) })
        .collect();
    ocompose_uwd(outer, &inners)
}

pub(crate) fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    sizes
        .scan(0, |acc, n| {
            let off = *acc;
            *acc += n;
            Some(off)
        })
        .collect()
}
