use std::fmt::Write;

use super::{text, PAutomaton};
use crate::model::Smpds;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering; initial states are boxes, final states double circles.
pub fn to_dot(smpds: &Smpds, aut: &PAutomaton) -> String {
    let mut out = String::from("digraph pautomaton {\n  rankdir=LR;\n");
    for q in aut.state_ids() {
        let shape = match (aut.is_initial(q), aut.is_final(q)) {
            (true, true) => "box, peripheries=2",
            (true, false) => "box",
            (false, true) => "doublecircle",
            (false, false) => "circle",
        };
        let name = text::state_name(smpds, aut.state(q));
        writeln!(out, "  n{} [label={}, shape={}];", q.0, quote(&name), shape).unwrap();
    }
    for t in aut.transitions() {
        let label = match t.label {
            super::Label::Epsilon => "ε",
            super::Label::Symbol(g) => smpds.symbol_name(g),
        };
        writeln!(
            out,
            "  n{} -> n{} [label={}];",
            t.from.0,
            t.to.0,
            quote(label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
