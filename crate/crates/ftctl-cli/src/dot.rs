//! Graphviz export for processes and tests. Kripke structures render themselves.

use std::fmt::Write as _;

use ftctl::lts::Lts;
use ftctl::test::TestGraph;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn lts_to_dot(p: &Lts) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n  __init [shape=point];\n");
    writeln!(out, "  __init -> \"s{}\";", p.initial()).unwrap();
    for s in p.states() {
        writeln!(out, "  \"s{s}\" [label=\"{}\"];", escape(p.name(s))).unwrap();
    }
    for (s, a, t) in p.transitions() {
        writeln!(
            out,
            "  \"s{s}\" -> \"s{t}\" [label=\"{}\"];",
            escape(&a.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Renders the derivative machine; `γ` steps lead to a shared double-circled sink.
pub fn test_to_dot(t: &TestGraph) -> String {
    let m = t.machine();
    let mut out = String::from("digraph test {\n  rankdir=LR;\n  __init [shape=point];\n");
    writeln!(out, "  __init -> \"t{}\";", m.root).unwrap();
    let mut success = false;
    for (k, steps) in m.states.iter().enumerate() {
        writeln!(out, "  \"t{k}\" [label=\"{k}\"];").unwrap();
        for (label, next) in steps {
            let dst = match next {
                Some(n) => format!("t{n}"),
                None => {
                    success = true;
                    "success".to_string()
                }
            };
            writeln!(
                out,
                "  \"t{k}\" -> \"{dst}\" [label=\"{}\"];",
                escape(&label.to_string())
            )
            .unwrap();
        }
    }
    if success {
        out.push_str("  \"success\" [shape=doublecircle, label=\"\"];\n");
    }
    out.push_str("}\n");
    out
}
