//! Finite Kripke structures, their `.kr` text form and DOT export.

mod check;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

pub use check::{check_delta, check_set, check_state, delta_transform, satisfying};

use crate::error::{Error, Result};

pub type KState = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kripke {
    names: Vec<String>,
    index: HashMap<String, KState>,
    props: BTreeSet<String>,
    labels: Vec<BTreeSet<String>>,
    succ: Vec<Vec<KState>>,
    initials: Vec<KState>,
}

#[derive(Debug, Clone, Default)]
pub struct KripkeBuilder {
    names: Vec<String>,
    index: HashMap<String, KState>,
    props: BTreeSet<String>,
    labels: Vec<BTreeSet<String>>,
    succ: Vec<BTreeSet<KState>>,
}

fn valid_state_name(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '{' | '}' | '#' | '"'))
}

impl KripkeBuilder {
    pub fn new<S: AsRef<str>>(props: impl IntoIterator<Item = S>) -> Self {
        KripkeBuilder {
            props: props.into_iter().map(|p| p.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn add_prop(&mut self, p: &str) {
        self.props.insert(p.to_string());
    }

    /// Returns the id of `name`, creating an unlabelled state if needed.
    pub fn state(&mut self, name: &str) -> KState {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), s);
        self.labels.push(BTreeSet::new());
        self.succ.push(BTreeSet::new());
        s
    }

    pub fn label(&mut self, s: KState, prop: &str) {
        self.labels[s].insert(prop.to_string());
    }

    pub fn edge(&mut self, from: KState, to: KState) {
        self.succ[from].insert(to);
    }

    pub fn build(self, initials: impl IntoIterator<Item = KState>) -> Result<Kripke> {
        if let Some(n) = self.names.iter().find(|n| !valid_state_name(n)) {
            return Err(Error::Invalid(format!("bad state name `{n}`")));
        }
        for l in &self.labels {
            if let Some(p) = l.iter().find(|p| !self.props.contains(*p)) {
                return Err(Error::UnknownProp(p.clone()));
            }
        }
        let initials: BTreeSet<KState> = initials.into_iter().collect();
        if initials.is_empty() {
            return Err(Error::Invalid(
                "a Kripke structure needs an initial state".into(),
            ));
        }
        if initials.iter().any(|&s| s >= self.names.len()) {
            return Err(Error::UnknownState(format!(
                "#{}",
                initials.last().unwrap()
            )));
        }
        Ok(Kripke {
            names: self.names,
            index: self.index,
            props: self.props,
            labels: self.labels,
            succ: self
                .succ
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            initials: initials.into_iter().collect(),
        })
    }
}

impl Kripke {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<KState> {
        0..self.names.len()
    }

    pub fn name(&self, s: KState) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Option<KState> {
        self.index.get(name).copied()
    }

    pub fn props(&self) -> &BTreeSet<String> {
        &self.props
    }

    pub fn label(&self, s: KState) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn successors(&self, s: KState) -> &[KState] {
        &self.succ[s]
    }

    pub fn initials(&self) -> &[KState] {
        &self.initials
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|s| !s.is_empty())
    }

    /// Adds a self-loop to every state without successors.
    pub fn make_total(mut self) -> Kripke {
        for (s, succ) in self.succ.iter_mut().enumerate() {
            if succ.is_empty() {
                succ.push(s);
            }
        }
        self
    }

    pub fn predecessors(&self) -> Vec<Vec<KState>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for s in self.states() {
            for &t in &self.succ[s] {
                pred[t].push(s);
            }
        }
        pred
    }

    /// Parses the `.kr` format: `props:`, `init:`, `label s {a b}` and `trans s t` lines.
    pub fn parse(text: &str) -> Result<Kripke> {
        let mut b = KripkeBuilder::default();
        let mut props = None;
        let mut init: Option<Vec<String>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let ln = i + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("props:") {
                let ps: Vec<&str> = rest.split_whitespace().collect();
                if let Some(p) = ps.iter().find(|p| !crate::lts::is_identifier(p)) {
                    return Err(Error::syntax(ln, 1, format!("bad proposition `{p}`")));
                }
                props = Some(ps.iter().map(|p| p.to_string()).collect::<BTreeSet<_>>());
            } else if let Some(rest) = line.strip_prefix("init:") {
                init = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("label ") {
                let (name, set) = rest
                    .split_once('{')
                    .ok_or_else(|| Error::syntax(ln, 1, "expected `label <state> {<props>}`"))?;
                let name = name.trim();
                let set = set
                    .trim_end()
                    .strip_suffix('}')
                    .ok_or_else(|| Error::syntax(ln, raw.len(), "expected `}`"))?;
                if !valid_state_name(name) {
                    return Err(Error::syntax(ln, 7, format!("bad state name `{name}`")));
                }
                let s = b.state(name);
                for p in set.split_whitespace() {
                    b.label(s, p);
                }
            } else if let Some(rest) = line.strip_prefix("trans ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 || !parts.iter().all(|p| valid_state_name(p)) {
                    return Err(Error::syntax(ln, 1, "expected `trans <state> <state>`"));
                }
                let (s, t) = (b.state(parts[0]), b.state(parts[1]));
                b.edge(s, t);
            } else {
                return Err(Error::syntax(ln, 1, format!("unrecognised line `{line}`")));
            }
        }
        b.props = props.ok_or_else(|| Error::syntax(1, 1, "missing `props:` line"))?;
        let init = init.ok_or_else(|| Error::syntax(1, 1, "missing `init:` line"))?;
        let mut initials = Vec::new();
        for n in &init {
            initials.push(
                *b.index
                    .get(n)
                    .ok_or_else(|| Error::UnknownState(n.clone()))?,
            );
        }
        b.build(initials)
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        let props: Vec<&str> = self.props.iter().map(String::as_str).collect();
        writeln!(out, "props: {}", props.join(" ")).unwrap();
        let init: Vec<&str> = self.initials.iter().map(|&s| self.name(s)).collect();
        writeln!(out, "init: {}", init.join(" ")).unwrap();
        for s in self.states() {
            let l: Vec<&str> = self.labels[s].iter().map(String::as_str).collect();
            writeln!(out, "label {} {{{}}}", self.name(s), l.join(" ")).unwrap();
        }
        for s in self.states() {
            for &t in &self.succ[s] {
                writeln!(out, "trans {} {}", self.name(s), self.name(t)).unwrap();
            }
        }
        out
    }

    /// Graphviz rendering; node labels show the propositions.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph kripke {\n  rankdir=LR;\n");
        for (i, &s) in self.initials.iter().enumerate() {
            writeln!(out, "  __init{i} [shape=point];").unwrap();
            writeln!(out, "  __init{i} -> \"s{s}\";").unwrap();
        }
        for s in self.states() {
            let l: Vec<&str> = self.labels[s].iter().map(String::as_str).collect();
            writeln!(
                out,
                "  \"s{s}\" [label=\"{}\\n{{{}}}\"];",
                escape(self.name(s)),
                l.join(",")
            )
            .unwrap();
        }
        for s in self.states() {
            for &t in &self.succ[s] {
                writeln!(out, "  \"s{s}\" -> \"s{t}\";").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
