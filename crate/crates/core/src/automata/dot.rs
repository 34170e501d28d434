//! Graphviz DOT rendering of automata.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Alphabet, CompleteDfa, DualMarkedDfa, PartialDfa, StateId};

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes edges merged per `(src, dst)` with comma-joined labels.
pub(crate) fn write_edges(
    out: &mut String,
    edges: impl IntoIterator<Item = (usize, String, usize)>,
    style: impl Fn(usize) -> &'static str,
) {
    let mut merged: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for (s, label, d) in edges {
        merged.entry((s, d)).or_default().push(label);
    }
    for ((s, d), labels) in merged {
        writeln!(
            out,
            "  n{s} -> n{d} [label=\"{}\"{}];",
            escape(&labels.join(", ")),
            style(d)
        )
        .unwrap();
    }
}

fn header(out: &mut String, name: &str, initial: usize) {
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  init [shape=point];").unwrap();
    writeln!(out, "  init -> n{initial};").unwrap();
}

fn render(p: &PartialDfa, name: &str, dump: Option<StateId>) -> String {
    let mut out = String::new();
    header(&mut out, name, p.initial());
    for q in p.states() {
        let shape = if p.has_marking() && p.is_marked(q) {
            "doublecircle"
        } else {
            "circle"
        };
        let style = if Some(q) == dump {
            ", style=dashed"
        } else {
            ""
        };
        writeln!(
            out,
            "  n{q} [label=\"{}\", shape={shape}{style}];",
            escape(p.name(q))
        )
        .unwrap();
    }
    let ab = p.alphabet();
    write_edges(
        &mut out,
        p.transitions()
            .map(|(s, e, d)| (s, ab.name(e).to_string(), d)),
        |d| {
            if Some(d) == dump {
                ", style=dashed"
            } else {
                ""
            }
        },
    );
    out.push_str("}\n");
    out
}

pub fn to_dot(p: &PartialDfa, name: &str) -> String {
    render(p, name, None)
}

/// Completed automaton; the dump state and edges into it are dashed.
pub fn complete_to_dot(c: &CompleteDfa, name: &str) -> String {
    render(c.dfa(), name, Some(c.dump()))
}

/// `G↓S` with `Y_A` states filled green and `Y_B` states filled red.
pub fn gds_to_dot(gds: &DualMarkedDfa, alphabet: &Alphabet, name: &str) -> String {
    let mut out = String::new();
    header(&mut out, name, gds.initial());
    for y in 0..gds.num_states() {
        let fill = if gds.mark_a[y] {
            ", style=filled, fillcolor=palegreen"
        } else if gds.mark_b[y] {
            ", style=filled, fillcolor=salmon"
        } else {
            ", style=dashed"
        };
        writeln!(
            out,
            "  n{y} [label=\"{}\", shape=circle{fill}];",
            escape(&gds.names[y])
        )
        .unwrap();
    }
    write_edges(
        &mut out,
        (0..gds.num_states())
            .flat_map(|y| alphabet.events().map(move |e| (y, e)))
            .map(|(y, e)| (y, alphabet.name(e).to_string(), gds.next(y, e))),
        |_| "",
    );
    out.push_str("}\n");
    out
}
