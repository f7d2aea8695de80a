//! Compiling failure trace tests into CTL formulae.
//!
//! Both targets share one structural recursion over the derivative machine
//! of the test. They differ only in the action prefix clause:
//! `a ∧ EX f` for the split conversion and `E[(a ∧ AX ¬a) U f] ∧ EX f`
//! for the Δ conversion.
//!
//! A choice `t1 □ θ; t` becomes `(⋁init(t1) ∧ f(t1)) ∨ (¬⋁init(t1) ∧ f(t))`.
//! When `t1` can succeed or move internally, the θ branch can never fire
//! and is dropped.

use std::collections::{BTreeSet, HashMap};

use crate::convert::start_prop;
use crate::ctl::Ctl::True;
use crate::ctl::*;
use crate::error::{Error, Result};
use crate::test::{Machine, TestGraph, TestLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Split,
    Delta,
}

/// One loop `a0; (t0 □ a1; (t1 □ … a(n-1); (t(n-1) □ a0; …)))` of a test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopDecomposition {
    pub cycle_actions: Vec<TestLabel>,
    pub exit_tests: Vec<TestGraph>,
    /// Index of the action carrying the `start` mark; always the entry action.
    pub entry_marker: usize,
}

impl LoopDecomposition {
    pub fn len(&self) -> usize {
        self.cycle_actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle_actions.is_empty()
    }

    pub fn entry_action(&self) -> &str {
        match &self.cycle_actions[self.entry_marker] {
            TestLabel::Visible(a) => a,
            _ => unreachable!("entry actions are visible"),
        }
    }
}

/// A compiled formula together with the actions whose `start_a` marker it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub formula: Ctl,
    pub marks: Vec<String>,
}

pub fn fttoctl_split(t: &TestGraph) -> Result<Ctl> {
    fttoctl(t, Target::Split)
}

pub fn fttoctl_delta(t: &TestGraph) -> Result<Ctl> {
    fttoctl(t, Target::Delta)
}

/// Structural compilation of an acyclic test.
pub fn fttoctl(t: &TestGraph, target: Target) -> Result<Ctl> {
    let m = t.machine();
    if m.is_cyclic() {
        return Err(Error::Unsupported(
            "cyclic test; compile it with loop compaction".into(),
        ));
    }
    let mut c = Compiler::new(&m, target, HashMap::new());
    c.state(m.root)
}

/// Compilation with loop compaction; acyclic tests compile as in [`fttoctl`].
pub fn fttoctl_compact(t: &TestGraph, target: Target) -> Result<Compiled> {
    let m = t.machine();
    let loops = find_loops(&m)?;
    let mut marks = BTreeSet::new();
    let mut entries = HashMap::new();
    for l in loops {
        marks.insert(l.decomposition.entry_action().to_string());
        entries.insert(l.states[0], l);
    }
    let mut c = Compiler::new(&m, target, entries);
    let formula = c.state(m.root)?;
    marks.extend(c.marks);
    Ok(Compiled {
        formula,
        marks: marks.into_iter().collect(),
    })
}

/// The loops of `t`, inner loops first.
pub fn detect_loops(t: &TestGraph) -> Result<Vec<LoopDecomposition>> {
    Ok(find_loops(&t.machine())?
        .into_iter()
        .map(|l| l.decomposition)
        .collect())
}

/// The finite formula for one loop, entered through its entry action.
pub fn compile_loop(d: &LoopDecomposition, target: Target) -> Result<Compiled> {
    let n = d.len();
    if n == 0 || d.exit_tests.len() != n || d.entry_marker != 0 {
        return Err(Error::Invalid("malformed loop decomposition".into()));
    }
    if !matches!(d.cycle_actions[0], TestLabel::Visible(_)) {
        return Err(Error::Unsupported(
            "loop entry action must be visible".into(),
        ));
    }
    if d.cycle_actions
        .iter()
        .any(|a| matches!(a, TestLabel::Tau | TestLabel::Gamma))
    {
        return Err(Error::Unsupported(
            "internal or success action inside a loop".into(),
        ));
    }
    let mut marks = BTreeSet::from([d.entry_action().to_string()]);
    let mut exits = Vec::with_capacity(n);
    for t in &d.exit_tests {
        let e = ExitParts::new(t, target)?;
        marks.extend(e.marks.iter().cloned());
        exits.push(e);
    }
    let acts = &d.cycle_actions;
    let visible_init = |i: usize| or_all(exits[i].init.iter().map(|b| atom(b)));
    let chain = |start: usize, len: usize, head: Option<Ctl>, tail: Option<Ctl>| -> Ctl {
        let mut levels: Vec<Vec<Ctl>> = Vec::new();
        let mut guards: Vec<Ctl> = Vec::new();
        for j in 0..len {
            let p = (start + j) % n;
            match &acts[p] {
                TestLabel::Visible(a) => {
                    let mut level = std::mem::take(&mut guards);
                    level.push(match (&head, j) {
                        (Some(h), 0) => h.clone(),
                        _ => atom(a),
                    });
                    levels.push(level);
                }
                // θ consumes no step: its guard joins the next level.
                _ => guards.push(not(visible_init((p + n - 1) % n))),
            }
        }
        match tail {
            Some(t) => {
                guards.push(t);
                levels.push(guards);
            }
            // Guards left over at the end of a full turn belong to the first level.
            None => levels[0].extend(guards),
        }
        let mut acc = and_all(levels.pop().unwrap());
        while let Some(l) = levels.pop() {
            acc = and(and_all(l), ex(acc));
        }
        acc
    };
    let cycles: Vec<Ctl> = (0..n)
        .filter(|&i| matches!(acts[i], TestLabel::Visible(_)))
        .map(|i| eg(chain(i, n, None, None)))
        .collect();
    let start = eg(atom(&start_prop(d.entry_action())));
    let mut exit_terms = Vec::with_capacity(n);
    for i in 0..n {
        let e = &exits[i];
        let next = &acts[(i + 1) % n];
        let body = match (&e.theta, next) {
            (None, _) => e.full.clone(),
            (Some(_), TestLabel::Theta) => {
                return Err(Error::Unsupported(
                    "θ both in a loop and in the exit before it".into(),
                ))
            }
            // The exit's θ branch fires only when neither its other actions
            // nor the next loop action are offered.
            (Some(th), TestLabel::Visible(a)) => {
                let b = visible_init(i);
                or(
                    and(b.clone(), e.without_theta.clone()),
                    and(and(not(atom(a)), not(b)), th.clone()),
                )
            }
            _ => unreachable!(),
        };
        exit_terms.push(chain(0, i + 1, Some(start.clone()), Some(body)));
    }
    let formula = or(
        eu(or_all(cycles), or_all(exit_terms)),
        exits[0].full.clone(),
    );
    Ok(Compiled {
        formula,
        marks: marks.into_iter().collect(),
    })
}

/// Pieces of a compiled exit test.
struct ExitParts {
    init: BTreeSet<String>,
    full: Ctl,
    without_theta: Ctl,
    theta: Option<Ctl>,
    marks: Vec<String>,
}

impl ExitParts {
    fn new(t: &TestGraph, target: Target) -> Result<Self> {
        let full = fttoctl_compact(t, target)?;
        let m = t.machine();
        let loops = find_loops(&m)?;
        let mut c = Compiler::new(
            &m,
            target,
            loops.into_iter().map(|l| (l.states[0], l)).collect(),
        );
        let steps = m.states[m.root].clone();
        let init = steps
            .iter()
            .filter_map(|(l, _)| match l {
                TestLabel::Visible(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        let plain: Vec<_> = steps
            .iter()
            .filter(|(l, _)| *l != TestLabel::Theta)
            .cloned()
            .collect();
        let without_theta = c.branches(&plain)?;
        let thetas: Vec<usize> = steps
            .iter()
            .filter(|(l, _)| *l == TestLabel::Theta)
            .filter_map(|(_, n)| *n)
            .collect();
        let theta = if thetas.is_empty() {
            None
        } else {
            Some(or_all(
                thetas
                    .into_iter()
                    .map(|n| c.state(n))
                    .collect::<Result<Vec<_>>>()?,
            ))
        };
        Ok(ExitParts {
            init,
            full: full.formula,
            without_theta,
            theta,
            marks: full.marks,
        })
    }
}

struct Compiler<'a> {
    m: &'a Machine,
    target: Target,
    loops: HashMap<usize, LoopInfo>,
    memo: HashMap<usize, Ctl>,
    marks: BTreeSet<String>,
}

impl<'a> Compiler<'a> {
    fn new(m: &'a Machine, target: Target, loops: HashMap<usize, LoopInfo>) -> Self {
        Compiler {
            m,
            target,
            loops,
            memo: HashMap::new(),
            marks: BTreeSet::new(),
        }
    }

    fn state(&mut self, s: usize) -> Result<Ctl> {
        if let Some(f) = self.memo.get(&s) {
            return Ok(f.clone());
        }
        if self.loops.values().any(|l| l.states.contains(&s)) {
            return Err(Error::Unsupported(
                "a loop must be entered through its entry action".into(),
            ));
        }
        let steps = self.m.states[s].clone();
        let f = self.branches(&steps)?;
        self.memo.insert(s, f.clone());
        Ok(f)
    }

    fn branches(&mut self, steps: &[(TestLabel, Option<usize>)]) -> Result<Ctl> {
        let mut main = Vec::new();
        let mut init = BTreeSet::new();
        let mut thetas = Vec::new();
        let mut blocks_theta = false;
        for (l, n) in steps {
            match (l, n) {
                (TestLabel::Gamma, _) => {
                    blocks_theta = true;
                    main.push(True);
                }
                (TestLabel::Tau, Some(n)) => {
                    blocks_theta = true;
                    main.push(self.state(*n)?);
                }
                (TestLabel::Visible(a), Some(n)) => {
                    init.insert(a.clone());
                    main.push(self.prefix(a, *n)?);
                }
                (TestLabel::Theta, Some(n)) => thetas.push(*n),
                _ => unreachable!("only γ ends a test"),
            }
        }
        let main = or_all(main);
        if thetas.is_empty() || blocks_theta {
            return Ok(main);
        }
        let offered = or_all(init.iter().map(|a| atom(a)));
        let th = or_all(
            thetas
                .into_iter()
                .map(|n| self.state(n))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(or(and(offered.clone(), main), and(not(offered), th)))
    }

    fn prefix(&mut self, a: &str, n: usize) -> Result<Ctl> {
        if let Some(l) = self.loops.get(&n) {
            if l.decomposition.entry_action() != a {
                return Err(Error::Unsupported(format!(
                    "loop entered by `{a}` instead of its entry action"
                )));
            }
            let c = compile_loop(&l.decomposition, self.target)?;
            self.marks.extend(c.marks);
            return Ok(c.formula);
        }
        let f = self.state(n)?;
        Ok(match self.target {
            Target::Split => and(atom(a), ex(f)),
            Target::Delta => and(eu(and(atom(a), ax(not(atom(a)))), f.clone()), ex(f)),
        })
    }
}

struct LoopInfo {
    decomposition: LoopDecomposition,
    /// Machine states `m0 … m(n-1)`; `m0` is entered from outside.
    states: Vec<usize>,
}

/// Strongly connected components in reverse topological order.
fn sccs(m: &Machine) -> Vec<Vec<usize>> {
    struct Tarjan<'a> {
        m: &'a Machine,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for w in self.m.states[v].iter().filter_map(|(_, n)| *n) {
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(i) if self.on_stack[w] => self.low[v] = self.low[v].min(i),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = self.stack.pop().unwrap();
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                self.out.push(comp);
            }
        }
    }
    let n = m.states.len();
    let mut t = Tarjan {
        m,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    t.visit(m.root);
    t.out
}

fn find_loops(m: &Machine) -> Result<Vec<LoopInfo>> {
    let mut loops = Vec::new();
    for comp in sccs(m) {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let cyclic = comp.len() > 1 || m.states[comp[0]].iter().any(|(_, n)| *n == Some(comp[0]));
        if !cyclic {
            continue;
        }
        let mut inner: HashMap<usize, (TestLabel, usize)> = HashMap::new();
        for &s in &comp {
            let steps: Vec<_> = m.states[s]
                .iter()
                .filter(|(_, n)| n.is_some_and(|n| members.contains(&n)))
                .collect();
            if steps.len() != 1 {
                return Err(Error::Unsupported("overlapping loops".into()));
            }
            inner.insert(s, (steps[0].0.clone(), steps[0].1.unwrap()));
        }
        let mut entries = BTreeSet::new();
        let mut entry_labels = BTreeSet::new();
        for (s, steps) in m.states.iter().enumerate() {
            if members.contains(&s) {
                continue;
            }
            for (l, n) in steps {
                if let Some(n) = n.filter(|n| members.contains(n)) {
                    entries.insert(n);
                    entry_labels.insert(l.clone());
                }
            }
        }
        if members.contains(&m.root) {
            return Err(Error::Unsupported(
                "a loop must be entered through its entry action".into(),
            ));
        }
        if entries.len() != 1 {
            return Err(Error::Unsupported("loop with several entry points".into()));
        }
        let m0 = *entries.iter().next().unwrap();
        let mut states = vec![m0];
        let mut labels = Vec::new();
        let mut cur = m0;
        loop {
            let (l, next) = inner[&cur].clone();
            labels.push(l);
            if next == m0 {
                break;
            }
            states.push(next);
            cur = next;
        }
        // labels[i] leads from m_i to m_(i+1); the loop action a_i leads into m_i.
        let n = states.len();
        let cycle_actions: Vec<TestLabel> =
            (0..n).map(|i| labels[(i + n - 1) % n].clone()).collect();
        if entry_labels.len() != 1 || entry_labels.iter().next() != Some(&cycle_actions[0]) {
            return Err(Error::Unsupported(
                "loop entered by an action other than its entry action".into(),
            ));
        }
        let exit_tests = states
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let next = states[(i + 1) % n];
                let steps: Vec<_> = m.states[s]
                    .iter()
                    .filter(|(l, t)| !(*t == Some(next) && *l == labels[i]))
                    .cloned()
                    .collect();
                exit_graph(m, steps)
            })
            .collect();
        let decomposition = LoopDecomposition {
            cycle_actions,
            exit_tests,
            entry_marker: 0,
        };
        if !matches!(decomposition.cycle_actions[0], TestLabel::Visible(_)) {
            return Err(Error::Unsupported(
                "loop entry action must be visible".into(),
            ));
        }
        loops.push(LoopInfo {
            decomposition,
            states,
        });
    }
    Ok(loops)
}

fn exit_graph(m: &Machine, steps: Vec<(TestLabel, Option<usize>)>) -> TestGraph {
    let mut sub = m.clone();
    sub.states.push(steps);
    sub.root = sub.states.len() - 1;
    TestGraph::from_machine(&sub)
}
