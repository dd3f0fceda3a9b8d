//! Graphviz emitters. Output is a pure function of the diagram and labels.

use std::fmt::Write;

use super::{CPGraph, DWDiagram, UWDiagram};

fn label(labels: Option<&[String]>, i: usize) -> String {
    let raw = labels.and_then(|l| l.get(i)).cloned().unwrap_or_else(|| format!("b{i}"));
    raw.replace('\\', "\\\\").replace('"', "\\\"")
}

fn outer_cluster(out: &mut String, stubs: &[String]) {
    out.push_str("  subgraph cluster_outer {\n    label=\"outer\";\n");
    for s in stubs {
        let _ = writeln!(out, "    {s} [shape=point];");
    }
    out.push_str("  }\n");
}

fn boxes(out: &mut String, n: usize, labels: Option<&[String]>) {
    for i in 0..n {
        let _ = writeln!(out, "  b{i} [shape=box, label=\"{}\"];", label(labels, i));
    }
}

pub(super) fn uwd(d: &UWDiagram, labels: Option<&[String]>) -> String {
    let mut out = String::from("graph uwd {\n");
    let stubs: Vec<String> = (0..d.n_outer()).map(|q| format!("q{q}")).collect();
    outer_cluster(&mut out, &stubs);
    boxes(&mut out, d.n_boxes(), labels);
    for j in 0..d.n_junctions() {
        let _ = writeln!(out, "  j{j} [shape=point];");
    }
    for (p, (&b, &j)) in d.owner().iter().zip(d.junc_in()).enumerate() {
        let _ = writeln!(out, "  b{b} -- j{j} [label=\"p{p}\"];");
    }
    for (q, &j) in d.junc_out().iter().enumerate() {
        let _ = writeln!(out, "  q{q} -- j{j} [style=dashed];");
    }
    out.push_str("}\n");
    out
}

pub(super) fn dwd(d: &DWDiagram, labels: Option<&[String]>) -> String {
    let mut out = String::from("digraph dwd {\n  rankdir=LR;\n");
    let stubs: Vec<String> = (0..d.n_outer_in())
        .map(|q| format!("qi{q}"))
        .chain((0..d.n_outer_out()).map(|q| format!("qo{q}")))
        .collect();
    outer_cluster(&mut out, &stubs);
    boxes(&mut out, d.n_boxes(), labels);
    let (box_in, box_out) = (d.col("box_in"), d.col("box_out"));
    for (&q, &p) in d.col("src_in").iter().zip(d.col("tgt_in")) {
        let _ = writeln!(out, "  qi{q} -> b{} [headlabel=\"{p}\", style=dashed];", box_in[p]);
    }
    for (&s, &t) in d.col("src").iter().zip(d.col("tgt")) {
        let _ = writeln!(out, "  b{} -> b{} [taillabel=\"{s}\", headlabel=\"{t}\"];", box_out[s], box_in[t]);
    }
    for (&p, &q) in d.col("src_out").iter().zip(d.col("tgt_out")) {
        let _ = writeln!(out, "  b{} -> qo{q} [taillabel=\"{p}\", style=dashed];", box_out[p]);
    }
    out.push_str("}\n");
    out
}

pub(super) fn cpg(g: &CPGraph, labels: Option<&[String]>) -> String {
    let mut out = String::from("digraph cpg {\n");
    let stubs: Vec<String> = (0..g.n_outer()).map(|q| format!("q{q}")).collect();
    outer_cluster(&mut out, &stubs);
    boxes(&mut out, g.n_boxes(), labels);
    let owner = g.owner();
    for (&s, &t) in g.src().iter().zip(g.tgt()) {
        let _ = writeln!(out, "  b{} -> b{} [taillabel=\"{s}\", headlabel=\"{t}\"];", owner[s], owner[t]);
    }
    for (q, &p) in g.expose().iter().enumerate() {
        let _ = writeln!(out, "  b{} -> q{q} [taillabel=\"{p}\", style=dashed, dir=none];", owner[p]);
    }
    out.push_str("}\n");
    out
}
