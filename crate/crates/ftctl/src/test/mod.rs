//! TLOTOS test terms as rooted, possibly cyclic graphs.


use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub use iso::isomorphic;
pub use sequential::{ftr_of, is_sequential, st_of};

pub type NodeId = usize;

/// Label of an explicit prefix `l; t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    Visible(String),
    Internal,
    Theta,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Stop,
    Pass,
    Prefix(Prefix, NodeId),
    Choice(Vec<NodeId>),
    Sum(Vec<NodeId>),
    Var(String),
}

/// Labels of test transitions; `Tau` is the test's internal `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestLabel {
    Visible(String),
    Tau,
    Theta,
    Gamma,
}

impl fmt::Display for TestLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestLabel::Visible(a) => f.write_str(a),
            TestLabel::Tau => f.write_str("i"),
            TestLabel::Theta => f.write_str("theta"),
            TestLabel::Gamma => f.write_str("gamma"),
        }
    }
}

/// One derivative of a node. `next` is `None` after `γ`, i.e. the test is `stop`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub label: TestLabel,
    pub next: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestGraph {
    nodes: Vec<Node>,
    root: NodeId,
    defs: BTreeMap<String, NodeId>,
}

/// Builds test graphs node by node.
#[derive(Debug, Clone, Default)]
pub struct TestBuilder {
    nodes: Vec<Node>,
    defs: BTreeMap<String, NodeId>,
}

impl TestBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn stop(&mut self) -> NodeId {
        self.add(Node::Stop)
    }

    pub fn pass(&mut self) -> NodeId {
        self.add(Node::Pass)
    }

    pub fn prefix(&mut self, label: Prefix, next: NodeId) -> NodeId {
        self.add(Node::Prefix(label, next))
    }

    pub fn action(&mut self, a: &str, next: NodeId) -> NodeId {
        self.prefix(Prefix::Visible(a.to_string()), next)
    }

    pub fn choice(&mut self, branches: Vec<NodeId>) -> NodeId {
        self.add(Node::Choice(branches))
    }

    pub fn sum(&mut self, branches: Vec<NodeId>) -> NodeId {
        self.add(Node::Sum(branches))
    }

    pub fn var(&mut self, name: &str) -> NodeId {
        self.add(Node::Var(name.to_string()))
    }

    /// Placeholder to be overwritten with [`TestBuilder::set`]; used to tie cycles.
    pub fn hole(&mut self) -> NodeId {
        self.add(Node::Stop)
    }

    pub fn set(&mut self, id: NodeId, node: Node) {
        self.nodes[id] = node;
    }

    pub fn define(&mut self, name: &str, id: NodeId) {
        self.defs.insert(name.to_string(), id);
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Validates, drops unreachable nodes and renumbers from the root.
    pub fn finish(self, root: NodeId) -> Result<TestGraph> {
        let raw = TestGraph {
            nodes: self.nodes,
            root,
            defs: self.defs,
        };
        raw.validate()?;
        Ok(raw.compact())
    }
}

impl TestGraph {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn defs(&self) -> &BTreeMap<String, NodeId> {
        &self.defs
    }

    pub fn stop() -> Self {
        TestGraph {
            nodes: vec![Node::Stop],
            root: 0,
            defs: BTreeMap::new(),
        }
    }

    pub fn pass() -> Self {
        TestGraph {
            nodes: vec![Node::Pass],
            root: 0,
            defs: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        syntax::parse(text)
    }

    pub fn print(&self) -> String {
        syntax::print(self)
    }

    fn children(&self, id: NodeId) -> Vec<NodeId> {
        match &self.nodes[id] {
            Node::Stop | Node::Pass => vec![],
            Node::Prefix(_, n) => vec![*n],
            Node::Choice(xs) | Node::Sum(xs) => xs.clone(),
            Node::Var(x) => self.defs.get(x).copied().into_iter().collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.root >= self.nodes.len() {
            return Err(Error::Invalid("root out of range".into()));
        }
        for n in &self.nodes {
            match n {
                Node::Var(x) if !self.defs.contains_key(x) => {
                    return Err(Error::UnboundVar(x.clone()))
                }
                Node::Prefix(Prefix::Visible(a), _) if !crate::lts::is_action_name(a) => {
                    return Err(Error::Invalid(format!("`{a}` is not a valid action name")))
                }
                _ => {}
            }
        }
        for (x, &id) in &self.defs {
            if id >= self.nodes.len() {
                return Err(Error::UnboundVar(x.clone()));
            }
        }
        // Every cycle must pass through a prefix.
        let mut state = vec![0u8; self.nodes.len()];
        for start in 0..self.nodes.len() {
            self.check_guarded(start, &mut state)?;
        }
        Ok(())
    }

    fn check_guarded(&self, id: NodeId, state: &mut [u8]) -> Result<()> {
        match state[id] {
            1 => return Err(Error::Unsupported("unguarded recursion".into())),
            2 => return Ok(()),
            _ => {}
        }
        state[id] = 1;
        let unguarded: Vec<NodeId> = match &self.nodes[id] {
            Node::Choice(xs) | Node::Sum(xs) => xs.clone(),
            Node::Var(x) => vec![self.defs[x]],
            _ => vec![],
        };
        for c in unguarded {
            self.check_guarded(c, state)?;
        }
        state[id] = 2;
        Ok(())
    }

    fn compact(self) -> TestGraph {
        let mut order = Vec::new();
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if map.contains_key(&n) {
                continue;
            }
            map.insert(n, order.len());
            order.push(n);
            let mut ch = self.children(n);
            ch.reverse();
            stack.extend(ch.into_iter().filter(|c| !map.contains_key(c)));
        }
        let nodes = order
            .iter()
            .map(|&old| match &self.nodes[old] {
                Node::Prefix(l, n) => Node::Prefix(l.clone(), map[n]),
                Node::Choice(xs) => Node::Choice(xs.iter().map(|x| map[x]).collect()),
                Node::Sum(xs) => Node::Sum(xs.iter().map(|x| map[x]).collect()),
                other => other.clone(),
            })
            .collect();
        let defs = self
            .defs
            .iter()
            .filter_map(|(x, id)| map.get(id).map(|&n| (x.clone(), n)))
            .collect();
        TestGraph {
            nodes,
            root: map[&self.root],
            defs,
        }
    }

    /// Follows `Var` indirections.
    pub fn resolve(&self, mut id: NodeId) -> NodeId {
        while let Node::Var(x) = &self.nodes[id] {
            id = self.defs[x];
        }
        id
    }

    /// The one-step derivatives of `id`.
    pub fn step(&self, id: NodeId) -> BTreeSet<Step> {
        let mut out = BTreeSet::new();
        self.collect_steps(id, &mut out);
        out
    }

    fn collect_steps(&self, id: NodeId, out: &mut BTreeSet<Step>) {
        match &self.nodes[id] {
            Node::Stop => {}
            Node::Pass => {
                out.insert(Step {
                    label: TestLabel::Gamma,
                    next: None,
                });
            }
            Node::Prefix(l, n) => {
                let label = match l {
                    Prefix::Visible(a) => TestLabel::Visible(a.clone()),
                    Prefix::Internal => TestLabel::Tau,
                    Prefix::Theta => TestLabel::Theta,
                };
                out.insert(Step {
                    label,
                    next: Some(self.resolve(*n)),
                });
            }
            Node::Choice(xs) | Node::Sum(xs) => {
                for x in xs {
                    self.collect_steps(*x, out);
                }
            }
            Node::Var(x) => self.collect_steps(self.defs[x], out),
        }
    }

    /// Visible actions offered at `id` once internal `i` steps are closed over.
    pub fn init_test(&self, id: NodeId) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![id];
        let mut out = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            for s in self.step(n) {
                match (s.label, s.next) {
                    (TestLabel::Visible(a), _) => {
                        out.insert(a);
                    }
                    (TestLabel::Tau, Some(m)) => stack.push(m),
                    _ => {}
                }
            }
        }
        out
    }

    /// Visible action names appearing anywhere in the graph.
    pub fn actions(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Prefix(Prefix::Visible(a), _) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    /// True when some cycle is reachable from the root.
    pub fn is_cyclic(&self) -> bool {
        let m = self.machine();
        m.is_cyclic()
    }

    /// The derivative graph: one state per reachable step target.
    pub fn machine(&self) -> Machine {
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        let mut states: Vec<Vec<(TestLabel, Option<usize>)>> = Vec::new();
        let root = self.resolve(self.root);
        let mut todo = vec![root];
        index.insert(root, 0);
        states.push(Vec::new());
        while let Some(n) = todo.pop() {
            let me = index[&n];
            let mut out = Vec::new();
            for s in self.step(n) {
                let next = s.next.map(|m| {
                    *index.entry(m).or_insert_with(|| {
                        states.push(Vec::new());
                        todo.push(m);
                        states.len() - 1
                    })
                });
                out.push((s.label, next));
            }
            states[me] = out;
        }
        let mut m = Machine { states, root: 0 };
        m.canonicalize();
        m
    }

    /// Drops branches that can never lead to success, where doing so cannot
    /// change when a θ branch fires, then merges bisimilar states.
    pub fn simplify(&self) -> TestGraph {
        let mut m = self.machine();
        m.prune_dead();
        TestGraph::from_machine(&m.minimize())
    }

    /// Quotient of the derivative graph by strong bisimilarity.
    pub fn minimize(&self) -> TestGraph {
        TestGraph::from_machine(&self.machine().minimize())
    }

    pub fn from_machine(m: &Machine) -> TestGraph {
        let mut b = TestBuilder::new();
        let ids: Vec<NodeId> = (0..m.states.len()).map(|_| b.hole()).collect();
        for (k, steps) in m.states.iter().enumerate() {
            let mut branches = Vec::new();
            for (l, next) in steps {
                let node = match (l, next) {
                    (TestLabel::Gamma, _) => Node::Pass,
                    (TestLabel::Visible(a), Some(n)) => {
                        Node::Prefix(Prefix::Visible(a.clone()), ids[*n])
                    }
                    (TestLabel::Tau, Some(n)) => Node::Prefix(Prefix::Internal, ids[*n]),
                    (TestLabel::Theta, Some(n)) => Node::Prefix(Prefix::Theta, ids[*n]),
                    (_, None) => Node::Stop,
                };
                branches.push(node);
            }
            let node = match branches.len() {
                0 => Node::Stop,
                1 => branches.pop().unwrap(),
                _ => Node::Choice(branches.into_iter().map(|n| b.add(n)).collect()),
            };
            b.set(ids[k], node);
        }
        b.finish(ids[m.root]).expect("machines are always guarded")
    }

    /// Merges several top-level θ branches of one choice into a single one.
    /// Directly nested choices count as one choice, so the result does not
    /// depend on how `[]` was bracketed.
    pub fn merge_theta(self) -> TestGraph {
        let mut b = TestBuilder {
            nodes: self.nodes,
            defs: self.defs,
        };
        let n = b.nodes.len();
        for id in 0..n {
            let xs = match &b.nodes[id] {
                Node::Choice(_) => flatten_choice(&b.nodes, id),
                Node::Sum(xs) => xs.clone(),
                _ => continue,
            };
            let (theta, rest): (Vec<NodeId>, Vec<NodeId>) = xs
                .iter()
                .partition(|x| matches!(b.nodes[**x], Node::Prefix(Prefix::Theta, _)));
            if theta.len() < 2 {
                continue;
            }
            let conts: Vec<NodeId> = theta
                .iter()
                .map(|x| match &b.nodes[*x] {
                    Node::Prefix(_, c) => *c,
                    _ => unreachable!(),
                })
                .collect();
            let joined = b.choice(conts);
            let merged = b.prefix(Prefix::Theta, joined);
            let mut all = rest;
            all.push(merged);
            let node = match &b.nodes[id] {
                Node::Sum(_) => Node::Sum(all),
                _ => Node::Choice(all),
            };
            b.nodes[id] = node;
        }
        let root = self.root;
        b.finish(root)
            .expect("merging θ branches keeps the graph valid")
    }
}

fn flatten_choice(nodes: &[Node], id: NodeId) -> Vec<NodeId> {
    match &nodes[id] {
        Node::Choice(xs) => xs.iter().flat_map(|&x| flatten_choice(nodes, x)).collect(),
        _ => vec![id],
    }
}

impl fmt::Display for TestGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

/// A machine step: its label and the target state, `None` for success.
pub type Edge = (TestLabel, Option<usize>);

/// Explicit derivative graph of a test. Steps of each state are sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub states: Vec<Vec<Edge>>,
    pub root: usize,
}

impl Machine {
    fn canonicalize(&mut self) {
        for s in &mut self.states {
            s.sort();
            s.dedup();
        }
    }

    /// States from which γ is reachable.
    pub fn live(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut pred = vec![Vec::new(); n];
        let mut live = vec![false; n];
        let mut todo = Vec::new();
        for (s, steps) in self.states.iter().enumerate() {
            for (l, t) in steps {
                match t {
                    Some(t) => pred[*t].push(s),
                    None if *l == TestLabel::Gamma && !live[s] => {
                        live[s] = true;
                        todo.push(s);
                    }
                    None => {}
                }
            }
        }
        while let Some(t) = todo.pop() {
            for &s in &pred[t] {
                if !live[s] {
                    live[s] = true;
                    todo.push(s);
                }
            }
        }
        live
    }

    /// Removes dead θ branches, then every dead branch of a state without θ.
    pub fn prune_dead(&mut self) {
        let live = self.live();
        let is_live = |t: &Option<usize>| t.is_none_or(|t| live[t]);
        for steps in &mut self.states {
            steps.retain(|(l, t)| *l != TestLabel::Theta || is_live(t));
            if steps.iter().all(|(l, _)| *l != TestLabel::Theta) {
                steps.retain(|(_, t)| is_live(t));
            }
        }
    }

    /// Merges bisimilar states by partition refinement.
    pub fn minimize(&self) -> Machine {
        let n = self.states.len();
        let mut block = vec![0usize; n];
        let mut count = 1;
        loop {
            let mut sigs: HashMap<(usize, Vec<Edge>), usize> = HashMap::new();
            let mut next = vec![0usize; n];
            for s in 0..n {
                let mut sig: Vec<Edge> = self.states[s]
                    .iter()
                    .map(|(l, t)| (l.clone(), t.map(|t| block[t])))
                    .collect();
                sig.sort();
                sig.dedup();
                let k = sigs.len();
                next[s] = *sigs.entry((block[s], sig)).or_insert(k);
            }
            let done = sigs.len() == count;
            count = sigs.len();
            block = next;
            if done {
                break;
            }
        }
        let mut states = vec![Vec::new(); count];
        for s in 0..n {
            states[block[s]] = self.states[s]
                .iter()
                .map(|(l, t)| (l.clone(), t.map(|t| block[t])))
                .collect();
        }
        let mut m = Machine {
            states,
            root: block[self.root],
        };
        m.canonicalize();
        m
    }

    pub fn is_cyclic(&self) -> bool {
        let mut color = vec![0u8; self.states.len()];
        fn visit(m: &Machine, u: usize, color: &mut [u8]) -> bool {
            color[u] = 1;
            for (_, n) in &m.states[u] {
                if let Some(v) = *n {
                    if color[v] == 1 || (color[v] == 0 && visit(m, v, color)) {
                        return true;
                    }
                }
            }
            color[u] = 2;
            false
        }
        visit(self, self.root, &mut color)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_steps_to_gamma() {
        let t = TestGraph::pass();
        assert_eq!(
            t.step(t.root()),
            BTreeSet::from([Step {
                label: TestLabel::Gamma,
                next: None
            }])
        );
        assert!(TestGraph::stop().step(0).is_empty());
    }

    #[test]
    fn choice_lifts_steps() {
        let t = TestGraph::parse("a; stop [] theta; pass").unwrap();
        let labels: BTreeSet<TestLabel> = t.step(t.root()).into_iter().map(|s| s.label).collect();
        assert_eq!(
            labels,
            BTreeSet::from([TestLabel::Visible("a".into()), TestLabel::Theta])
        );
        assert_eq!(t.init_test(t.root()), BTreeSet::from(["a".to_string()]));
    }

    #[test]
    fn init_closes_over_internal() {
        let t = TestGraph::parse("i; b; stop").unwrap();
        assert_eq!(t.init_test(t.root()), BTreeSet::from(["b".to_string()]));
    }

    #[test]
    fn unguarded_recursion_rejected() {
        assert!(matches!(
            TestGraph::parse("rec X. X [] a; pass"),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn theta_branches_merge() {
        let t = TestGraph::parse("a; pass [] theta; b; pass [] theta; c; pass").unwrap();
        let thetas = t
            .step(t.root())
            .into_iter()
            .filter(|s| s.label == TestLabel::Theta)
            .count();
        assert_eq!(thetas, 1);
    }

    #[test]
    fn minimize_shares_equal_continuations() {
        let t = TestGraph::parse("a; pass [] b; pass [] c; (pass [] stop)").unwrap();
        assert_eq!(t.machine().states.len(), 4);
        assert_eq!(t.minimize().machine().states.len(), 2);
        let r = TestGraph::parse("rec X. a; a; X").unwrap();
        assert_eq!(r.minimize().machine().states.len(), 1);
    }

    #[test]
    fn pruning_keeps_branches_that_guard_theta() {
        let t = TestGraph::parse("a; stop [] b; pass").unwrap();
        assert!(isomorphic(
            &t.simplify(),
            &TestGraph::parse("b; pass").unwrap()
        ));
        let u = TestGraph::parse("a; stop [] theta; pass").unwrap();
        assert!(isomorphic(&u.simplify(), &u));
        let v = TestGraph::parse("a; pass [] theta; b; stop").unwrap();
        assert!(isomorphic(
            &v.simplify(),
            &TestGraph::parse("a; pass").unwrap()
        ));
    }

    #[test]
    fn machine_round_trip() {
        let t = TestGraph::parse("rec X. a; (b; pass [] X)").unwrap();
        let m = t.machine();
        assert!(m.is_cyclic());
        let back = TestGraph::from_machine(&m);
        assert!(isomorphic(&back, &t));
    }
}
