use crate::cset::{CSetInstance, DWD};
use crate::finset::FinFunction;

use super::uwd::offsets;
use super::{check_schema, grouping_permutation, local_index, ports_by_box, WiringError};

/// A directed wiring diagram.
///
/// Wires come in three tables: `W_in` from outer in-ports to box in-ports,
/// `W` from box out-ports to box in-ports, and `W_out` from box out-ports to
/// outer out-ports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DWDiagram {
    inst: CSetInstance,
    in_ports: Vec<Vec<usize>>,
    out_ports: Vec<Vec<usize>>,
}

impl DWDiagram {
    /// `boxes[i]` is the (in-port, out-port) count of box `i`; box ports are
    /// numbered consecutively, box by box. Wires are `(source, target)` pairs
    /// of global port rows.
    pub fn new(
        boxes: &[(usize, usize)],
        n_in: usize,
        n_out: usize,
        w_in: &[(usize, usize)],
        w: &[(usize, usize)],
        w_out: &[(usize, usize)],
    ) -> Result<Self, WiringError> {
        let box_in: Vec<usize> = boxes.iter().enumerate().flat_map(|(i, &(m, _))| std::iter::repeat_n(i, m)).collect();
        let box_out: Vec<usize> = boxes.iter().enumerate().flat_map(|(i, &(_, n))| std::iter::repeat_n(i, n)).collect();
        let split = |ws: &[(usize, usize)]| -> (Vec<usize>, Vec<usize>) { ws.iter().copied().unzip() };
        let (src_in, tgt_in) = split(w_in);
        let (src, tgt) = split(w);
        let (src_out, tgt_out) = split(w_out);
        let inst = CSetInstance::from_parts(
            DWD.clone(),
            &[
                ("B", boxes.len()),
                ("P_in", box_in.len()),
                ("P_out", box_out.len()),
                ("Q_in", n_in),
                ("Q_out", n_out),
                ("W_in", w_in.len()),
                ("W", w.len()),
                ("W_out", w_out.len()),
            ],
            &[
                ("src", src),
                ("tgt", tgt),
                ("box_in", box_in),
                ("box_out", box_out),
                ("src_in", src_in),
                ("tgt_in", tgt_in),
                ("src_out", src_out),
                ("tgt_out", tgt_out),
            ],
        )?;
        Self::from_instance(inst)
    }

    pub fn from_instance(inst: CSetInstance) -> Result<Self, WiringError> {
        check_schema(&inst, "DWD")?;
        let b = inst.card("B");
        let in_ports = ports_by_box(b, inst.column("box_in"));
        let out_ports = ports_by_box(b, inst.column("box_out"));
        Ok(Self { inst, in_ports, out_ports })
    }

    /// The unit term of type (`m` in, `n` out).
    pub fn identity(m: usize, n: usize) -> Self {
        let w_in: Vec<_> = (0..m).map(|k| (k, k)).collect();
        let w_out: Vec<_> = (0..n).map(|k| (k, k)).collect();
        Self::new(&[(m, n)], m, n, &w_in, &[], &w_out).expect("identity is well formed")
    }

    pub fn instance(&self) -> &CSetInstance {
        &self.inst
    }

    pub fn into_instance(self) -> CSetInstance {
        self.inst
    }

    pub fn n_boxes(&self) -> usize {
        self.in_ports.len()
    }

    pub fn n_outer_in(&self) -> usize {
        self.inst.card("Q_in")
    }

    pub fn n_outer_out(&self) -> usize {
        self.inst.card("Q_out")
    }

    pub fn n_in_ports(&self) -> usize {
        self.inst.card("P_in")
    }

    pub fn n_out_ports(&self) -> usize {
        self.inst.card("P_out")
    }

    pub fn in_ports(&self, i: usize) -> &[usize] {
        &self.in_ports[i]
    }

    pub fn out_ports(&self, i: usize) -> &[usize] {
        &self.out_ports[i]
    }

    /// (in-port, out-port) count of every box.
    pub fn signature(&self) -> Vec<(usize, usize)> {
        self.in_ports.iter().zip(&self.out_ports).map(|(a, b)| (a.len(), b.len())).collect()
    }

    pub fn col(&self, morphism: &str) -> &[usize] {
        self.inst.column(morphism)
    }

    pub(crate) fn hom(&self, morphism: &str) -> FinFunction {
        self.inst.hom(morphism).expect("valid diagram")
    }

    /// Ports regrouped box by box and every wire table sorted by
    /// (source, target).
    pub fn canonical(&self) -> DWDiagram {
        let pin = grouping_permutation(&self.in_ports, self.n_in_ports());
        let pout = grouping_permutation(&self.out_ports, self.n_out_ports());
        let regroup = |owner: &[usize], perm: &[usize]| {
            let mut out = vec![0; owner.len()];
            for (old, &new) in perm.iter().enumerate() {
                out[new] = owner[old];
            }
            out
        };
        let wires = |src: &[usize], tgt: &[usize], fs: &dyn Fn(usize) -> usize, ft: &dyn Fn(usize) -> usize| {
            let mut ws: Vec<(usize, usize)> = src.iter().zip(tgt).map(|(&s, &t)| (fs(s), ft(t))).collect();
            ws.sort_unstable();
            ws.into_iter().unzip::<_, _, Vec<_>, Vec<_>>()
        };
        let id = |q: usize| q;
        let via_in = |p: usize| pin[p];
        let via_out = |p: usize| pout[p];
        let (src_in, tgt_in) = wires(self.col("src_in"), self.col("tgt_in"), &id, &via_in);
        let (src, tgt) = wires(self.col("src"), self.col("tgt"), &via_out, &via_in);
        let (src_out, tgt_out) = wires(self.col("src_out"), self.col("tgt_out"), &via_out, &id);
        let inst = CSetInstance::from_raw(
            DWD.clone(),
            self.inst.cards().to_vec(),
            vec![
                src,
                tgt,
                regroup(self.col("box_in"), &pin),
                regroup(self.col("box_out"), &pout),
                src_in,
                tgt_in,
                src_out,
                tgt_out,
            ],
        );
        DWDiagram::from_instance(inst).expect("relabeling preserves validity")
    }
}

/// Substitutes `inners[i]` into box `i` of `outer`, splicing wires through
/// the identified interface ports.
pub fn ocompose_dwd(outer: &DWDiagram, inners: &[DWDiagram]) -> Result<DWDiagram, WiringError> {
    if inners.len() != outer.n_boxes() {
        return Err(WiringError::InnerCount { expected: outer.n_boxes(), actual: inners.len() });
    }
    for (i, (inner, sig)) in inners.iter().zip(outer.signature()).enumerate() {
        let got = (inner.n_outer_in(), inner.n_outer_out());
        if got != sig {
            return Err(WiringError::Arity {
                index: i,
                expected: format!("{}/{}", sig.0, sig.1),
                actual: format!("{}/{}", got.0, got.1),
            });
        }
    }

    let in_off = offsets(inners.iter().map(DWDiagram::n_in_ports));
    let out_off = offsets(inners.iter().map(DWDiagram::n_out_ports));
    let box_off = offsets(inners.iter().map(DWDiagram::n_boxes));
    let loc_in = local_index(&outer.in_ports, outer.n_in_ports());
    let loc_out = local_index(&outer.out_ports, outer.n_out_ports());

    // For each inner: W_in targets grouped by outer in-port, W_out sources
    // grouped by outer out-port, both already shifted into composite rows.
    let entering: Vec<Vec<Vec<usize>>> = inners
        .iter()
        .zip(&in_off)
        .map(|(d, &off)| group(d.n_outer_in(), d.col("src_in"), d.col("tgt_in"), off))
        .collect();
    let leaving: Vec<Vec<Vec<usize>>> = inners
        .iter()
        .zip(&out_off)
        .map(|(d, &off)| group(d.n_outer_out(), d.col("tgt_out"), d.col("src_out"), off))
        .collect();

    let mut w_in = Vec::new();
    for (&q, &p) in outer.col("src_in").iter().zip(outer.col("tgt_in")) {
        let (i, k) = loc_in[p];
        w_in.extend(entering[i][k].iter().map(|&t| (q, t)));
    }

    let mut w = Vec::new();
    for (d, (&ioff, &ooff)) in inners.iter().zip(in_off.iter().zip(&out_off)) {
        w.extend(d.col("src").iter().zip(d.col("tgt")).map(|(&s, &t)| (ooff + s, ioff + t)));
    }
    for (&s, &t) in outer.col("src").iter().zip(outer.col("tgt")) {
        let (i, k) = loc_out[s];
        let (j, l) = loc_in[t];
        for &from in &leaving[i][k] {
            w.extend(entering[j][l].iter().map(|&to| (from, to)));
        }
    }

    let mut w_out = Vec::new();
    for (&p, &q) in outer.col("src_out").iter().zip(outer.col("tgt_out")) {
        let (i, k) = loc_out[p];
        w_out.extend(leaving[i][k].iter().map(|&s| (s, q)));
    }

    let mut box_in = Vec::new();
    let mut box_out = Vec::new();
    for (d, &b) in inners.iter().zip(&box_off) {
        box_in.extend(d.col("box_in").iter().map(|&x| x + b));
        box_out.extend(d.col("box_out").iter().map(|&x| x + b));
    }
    let n_boxes = inners.iter().map(DWDiagram::n_boxes).sum();
    let split = |ws: Vec<(usize, usize)>| -> (Vec<usize>, Vec<usize>) { ws.into_iter().unzip() };
    let (nw_in, nw, nw_out) = (w_in.len(), w.len(), w_out.len());
    let (src_in, tgt_in) = split(w_in);
    let (src, tgt) = split(w);
    let (src_out, tgt_out) = split(w_out);
    let inst = CSetInstance::from_raw(
        DWD.clone(),
        vec![n_boxes, box_in.len(), box_out.len(), outer.n_outer_in(), outer.n_outer_out(), nw_in, nw, nw_out],
        vec![src, tgt, box_in, box_out, src_in, tgt_in, src_out, tgt_out],
    );
    Ok(DWDiagram::from_instance(inst)?.canonical())
}

/// `groups[k]` = shifted `value` of every row whose `key` is `k`.
fn group(n: usize, key: &[usize], value: &[usize], shift: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (&k, &v) in key.iter().zip(value) {
        out[k].push(v + shift);
    }
    out
}

/// Substitutes `inner` into box `slot`, padding the rest with identities.
pub fn ocompose_dwd_at(outer: &DWDiagram, slot: usize, inner: &DWDiagram) -> Result<DWDiagram, WiringError> {
    if slot >= outer.n_boxes() {
        return Err(WiringError::Slot { index: slot, boxes: outer.n_boxes() });
    }
    let inners: Vec<DWDiagram> = outer
        .signature()
        .into_iter()
        .enumerate()
        .map(|(i, (m, n))| if i == slot { inner.clone() } else { DWDiagram::identity(m, n) })
        .collect();
    ocompose_dwd(outer, &inners)
}
