//! Graphviz export. Hypercover and marked edges are drawn bold and blue.

use std::fmt::Write;

use crate::relcat::RelativeCategory;
use crate::sigma::{build_sigma, SpanDiagram};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

const MARKED: &str = "style=bold, color=blue, arrowhead=normalnormal";

/// The base category (non-identity arrows) with `W` highlighted.
pub fn category_dot(r: &RelativeCategory) -> String {
    let c = &r.base;
    let mut out = String::from("digraph category {\n  rankdir=LR;\n");
    for o in c.objects() {
        writeln!(out, "  {};", quote(o)).unwrap();
    }
    for f in c.declared_morphisms() {
        let style = if r.is_hypercover(f) { format!(", {MARKED}") } else { String::new() };
        writeln!(
            out,
            "  {} -> {} [label={}{style}];",
            quote(c.object_name(c.dom(f))),
            quote(c.object_name(c.cod(f))),
            quote(c.morphism_name(f))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Covering relations of `Σₙ`, marked edges highlighted.
pub fn sigma_dot(n: usize) -> String {
    let sigma = build_sigma(n);
    let mut out = format!("digraph sigma_{n} {{\n  rankdir=BT;\n");
    for &(i, j) in &sigma.elements {
        writeln!(out, "  \"{i}_{j}\" [label=\"({i},{j})\"];").unwrap();
    }
    for &((i, j), (k, l)) in &sigma.marked {
        writeln!(out, "  \"{i}_{j}\" -> \"{k}_{l}\" [{MARKED}];").unwrap();
    }
    for &((i, j), (k, l)) in &sigma.unmarked {
        writeln!(out, "  \"{i}_{j}\" -> \"{k}_{l}\";").unwrap();
    }
    out.push_str("}\n");
    out
}

/// One span diagram: the objects at each `(i, j)` and its generating arrows.
pub fn diagram_dot(r: &RelativeCategory, f: &SpanDiagram, title: &str) -> String {
    let c = &r.base;
    let sigma = build_sigma(f.n);
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n", quote(title));
    for (idx, &(i, j)) in sigma.elements.iter().enumerate() {
        writeln!(out, "  \"{i}_{j}\" [label=\"({i},{j}) {}\"];", c.object_name(f.objects[idx])).unwrap();
    }
    for i in 0..=f.n {
        for j in i + 1..=f.n {
            let down = f.down((i, j));
            let style = if r.is_hypercover(down) { format!(", {MARKED}") } else { String::new() };
            writeln!(out, "  \"{i}_{j}\" -> \"{i}_{}\" [label={}{style}];", j - 1, quote(c.morphism_name(down))).unwrap();
            let right = f.right((i, j));
            writeln!(out, "  \"{i}_{j}\" -> \"{}_{j}\" [label={}];", i + 1, quote(c.morphism_name(right))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
