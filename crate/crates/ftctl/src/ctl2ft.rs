//! Compiling CTL formulae into failure trace tests, on top of an algebra of
//! tests: negation, disjunction with restriction, and conjunction by De Morgan.
//!
//! Tests are handled as lazily expanded expression nodes. An expression's
//! steps are computed on demand from its operands, so recursive tests such
//! as the ones for `E G` and `E F` only ever materialise the finitely many
//! expressions reachable from the root. Disjunctions are kept flat and
//! `¬¬t` is identified with `t`; both keep that set finite.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::ctl::Ctl;
use crate::error::{Error, Result};
use crate::test::{Machine, TestGraph, TestLabel};

/// Upper bound on the states of a constructed test.
const MAX_STATES: usize = 200_000;

/// A test in the form `Σ{b; t(b) : b ∈ B} □ θ; tN`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopNormalTest {
    pub branches: BTreeMap<String, TestGraph>,
    pub theta_branch: TestGraph,
}

/// Splits the top-level choice of `t`, unfolding top-level `i` prefixes.
/// Branches sharing an action are joined by a choice.
pub fn normalize_top(t: &TestGraph) -> TopNormalTest {
    let mut alg = Algebra::default();
    let root = alg.import(t);
    let top = alg
        .top(&BTreeSet::from([root]))
        .expect("imported tests expand without recursion");
    let mut graph = |ids: &BTreeSet<Id>| {
        let e = alg.choice(ids.clone());
        alg.build_graph(e).expect("imported tests stay small")
    };
    let branches = top
        .branches
        .iter()
        .map(|(b, ids)| (b.clone(), graph(ids)))
        .collect();
    let theta_branch = graph(&top.theta);
    TopNormalTest {
        branches,
        theta_branch,
    }
}

/// Turns success into failure and failure into success.
pub fn neg_test(t: &TestGraph) -> Result<TestGraph> {
    let mut alg = Algebra::default();
    let r = alg.import(t);
    let n = alg.neg(r);
    alg.build_graph(n)
}

/// `t` restricted to performing `b` first.
pub fn restrict(t: &TestGraph, b: &str) -> Result<TestGraph> {
    let mut alg = Algebra::default();
    let r = alg.import(t);
    let ids = alg.restrict(&BTreeSet::from([r]), b)?;
    let c = alg.choice(ids);
    alg.build_graph(c)
}

pub fn or_test(t1: &TestGraph, t2: &TestGraph) -> Result<TestGraph> {
    let mut alg = Algebra::default();
    let (a, b) = (alg.import(t1), alg.import(t2));
    let o = alg.or([a, b]);
    alg.build_graph(o)
}

pub fn and_test(t1: &TestGraph, t2: &TestGraph) -> Result<TestGraph> {
    let mut alg = Algebra::default();
    let (a, b) = (alg.import(t1), alg.import(t2));
    let o = alg.and(a, b);
    alg.build_graph(o)
}

/// The test for `f` over `alphabet`. Temporal operators other than
/// `E X`, `E F`, `E G` and `E U` are first rewritten into existential form.
/// The result is simplified with [`TestGraph::simplify`].
pub fn ctltoft(f: &Ctl, alphabet: &[String]) -> Result<TestGraph> {
    if alphabet.is_empty() {
        return Err(Error::Invalid("the alphabet must not be empty".into()));
    }
    let mut alg = Algebra::default();
    let root = Compiler {
        alg: &mut alg,
        alphabet,
    }
    .compile(f)?;
    Ok(alg.build_graph(root)?.simplify())
}

type Id = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Expr {
    Steps(Vec<(TestLabel, Option<Id>)>),
    Neg(Id),
    Or(BTreeSet<Id>),
    Choice(BTreeSet<Id>),
}

struct Top {
    branches: BTreeMap<String, BTreeSet<Id>>,
    theta: BTreeSet<Id>,
}

#[derive(Default)]
struct Algebra {
    exprs: Vec<Expr>,
    interned: HashMap<Expr, Id>,
    steps: HashMap<Id, Vec<(TestLabel, Option<Id>)>>,
    in_progress: BTreeSet<Id>,
}

impl Algebra {
    fn intern(&mut self, e: Expr) -> Id {
        if let Some(&id) = self.interned.get(&e) {
            return id;
        }
        let id = self.fresh(e.clone());
        self.interned.insert(e, id);
        id
    }

    fn fresh(&mut self, e: Expr) -> Id {
        self.exprs.push(e);
        self.exprs.len() - 1
    }

    fn explicit(&mut self, steps: Vec<(TestLabel, Option<Id>)>) -> Id {
        self.fresh(Expr::Steps(steps))
    }

    fn pass(&mut self) -> Id {
        self.intern(Expr::Steps(vec![(TestLabel::Gamma, None)]))
    }

    fn stop(&mut self) -> Id {
        self.intern(Expr::Steps(vec![]))
    }

    fn import(&mut self, t: &TestGraph) -> Id {
        self.import_machine(&t.machine())
    }

    fn import_machine(&mut self, m: &Machine) -> Id {
        let ids: Vec<Id> = m.states.iter().map(|_| self.explicit(vec![])).collect();
        for (k, st) in m.states.iter().enumerate() {
            self.exprs[ids[k]] = Expr::Steps(
                st.iter()
                    .map(|(l, n)| (l.clone(), n.map(|n| ids[n])))
                    .collect(),
            );
        }
        ids[m.root]
    }

    fn neg(&mut self, e: Id) -> Id {
        match self.exprs[e] {
            Expr::Neg(inner) => inner,
            _ => self.intern(Expr::Neg(e)),
        }
    }

    fn or(&mut self, parts: impl IntoIterator<Item = Id>) -> Id {
        let mut flat = BTreeSet::new();
        for p in parts {
            match &self.exprs[p] {
                Expr::Or(xs) => flat.extend(xs.iter().copied()),
                _ => {
                    flat.insert(p);
                }
            }
        }
        match flat.len() {
            0 => self.stop(),
            1 => flat.into_iter().next().unwrap(),
            _ => self.intern(Expr::Or(flat)),
        }
    }

    fn and(&mut self, a: Id, b: Id) -> Id {
        let (na, nb) = (self.neg(a), self.neg(b));
        let o = self.or([na, nb]);
        self.neg(o)
    }

    fn choice(&mut self, parts: BTreeSet<Id>) -> Id {
        match parts.len() {
            0 => self.stop(),
            1 => parts.into_iter().next().unwrap(),
            _ => self.intern(Expr::Choice(parts)),
        }
    }

    fn steps(&mut self, id: Id) -> Result<Vec<(TestLabel, Option<Id>)>> {
        if let Some(s) = self.steps.get(&id) {
            return Ok(s.clone());
        }
        if !self.in_progress.insert(id) {
            return Err(Error::Unsupported(
                "test expression depends on its own first step".into(),
            ));
        }
        let mut out = match self.exprs[id].clone() {
            Expr::Steps(s) => s,
            Expr::Neg(e) => self.neg_steps(e)?,
            Expr::Or(xs) => self.or_steps(&xs)?,
            Expr::Choice(xs) => {
                let mut all = Vec::new();
                for x in xs {
                    all.extend(self.steps(x)?);
                }
                all
            }
        };
        out.sort();
        out.dedup();
        self.in_progress.remove(&id);
        self.steps.insert(id, out.clone());
        Ok(out)
    }

    fn is_success(&mut self, id: Id) -> Result<bool> {
        Ok(self.steps(id)? == [(TestLabel::Gamma, None)])
    }

    // γ is removed, θ into a pure success state is removed, and a state that
    // lost neither gains θ; pass unless it keeps a θ of its own.
    fn neg_steps(&mut self, e: Id) -> Result<Vec<(TestLabel, Option<Id>)>> {
        let st = self.steps(e)?;
        let mut out = Vec::new();
        let mut touched = false;
        let mut keeps_theta = false;
        for (l, n) in st {
            match (l, n) {
                (TestLabel::Gamma, _) => touched = true,
                (TestLabel::Theta, Some(n)) if self.is_success(n)? => touched = true,
                (l, Some(n)) => {
                    keeps_theta |= l == TestLabel::Theta;
                    let m = self.neg(n);
                    out.push((l, Some(m)));
                }
                (_, None) => unreachable!("only γ ends a test"),
            }
        }
        if !touched && !keeps_theta {
            let p = self.pass();
            out.push((TestLabel::Theta, Some(p)));
        }
        Ok(out)
    }

    /// The `i`-closure of a set of tests, split by first action.
    fn top(&mut self, ids: &BTreeSet<Id>) -> Result<Top> {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<Id> = ids.iter().copied().collect();
        let mut top = Top {
            branches: BTreeMap::new(),
            theta: BTreeSet::new(),
        };
        while let Some(x) = todo.pop() {
            if !seen.insert(x) {
                continue;
            }
            for (l, n) in self.steps(x)? {
                match (l, n) {
                    (TestLabel::Visible(a), Some(n)) => {
                        top.branches.entry(a).or_default().insert(n);
                    }
                    (TestLabel::Theta, Some(n)) => {
                        top.theta.insert(n);
                    }
                    (TestLabel::Tau, Some(n)) => todo.push(n),
                    _ => {}
                }
            }
        }
        Ok(top)
    }

    fn succeeds_now(&mut self, x: Id) -> Result<bool> {
        let mut seen = BTreeSet::new();
        let mut todo = vec![x];
        while let Some(y) = todo.pop() {
            if !seen.insert(y) {
                continue;
            }
            for (l, n) in self.steps(y)? {
                match (l, n) {
                    (TestLabel::Gamma, _) => return Ok(true),
                    (TestLabel::Tau, Some(n)) => todo.push(n),
                    _ => {}
                }
            }
        }
        Ok(false)
    }

    fn or_steps(&mut self, xs: &BTreeSet<Id>) -> Result<Vec<(TestLabel, Option<Id>)>> {
        // pass ∨ t = pass and stop ∨ t = t.
        let mut live = BTreeSet::new();
        for &x in xs {
            if self.succeeds_now(x)? {
                return Ok(vec![(TestLabel::Gamma, None)]);
            }
            if !self.steps(x)?.is_empty() {
                live.insert(x);
            }
        }
        if live.len() < 2 {
            return match live.into_iter().next() {
                Some(x) => self.steps(x),
                None => Ok(vec![]),
            };
        }
        let tops: Vec<Top> = live
            .iter()
            .map(|&x| self.top(&BTreeSet::from([x])))
            .collect::<Result<_>>()?;
        let actions: BTreeSet<String> = tops
            .iter()
            .flat_map(|t| t.branches.keys().cloned())
            .collect();
        let mut out = Vec::new();
        for b in actions {
            let mut parts = BTreeSet::new();
            for t in &tops {
                match t.branches.get(&b) {
                    Some(ns) => parts.extend(ns.iter().copied()),
                    None => parts.extend(self.restrict(&t.theta, &b)?),
                }
            }
            let next = self.or(parts);
            out.push((TestLabel::Visible(b), Some(next)));
        }
        let theta: BTreeSet<Id> = tops.iter().flat_map(|t| t.theta.iter().copied()).collect();
        let next = self.or(theta);
        if !self.steps(next)?.is_empty() {
            out.push((TestLabel::Theta, Some(next)));
        }
        Ok(out)
    }

    fn restrict(&mut self, ids: &BTreeSet<Id>, b: &str) -> Result<BTreeSet<Id>> {
        let mut visiting = BTreeSet::new();
        self.restrict_in(ids, b, &mut visiting)
    }

    fn restrict_in(
        &mut self,
        ids: &BTreeSet<Id>,
        b: &str,
        visiting: &mut BTreeSet<BTreeSet<Id>>,
    ) -> Result<BTreeSet<Id>> {
        if ids.is_empty() || !visiting.insert(ids.clone()) {
            return Ok(BTreeSet::new());
        }
        let mut st = Vec::new();
        for &x in ids {
            st.extend(self.steps(x)?);
        }
        let mut out = BTreeSet::new();
        let (mut taus, mut thetas) = (BTreeSet::new(), BTreeSet::new());
        let mut blocks_theta = false;
        for (l, n) in st {
            match (l, n) {
                (TestLabel::Visible(a), Some(n)) if a == b => {
                    blocks_theta = true;
                    out.insert(n);
                }
                (TestLabel::Gamma, _) => {
                    blocks_theta = true;
                    out.insert(self.pass());
                }
                (TestLabel::Tau, Some(n)) => {
                    blocks_theta = true;
                    taus.insert(n);
                }
                (TestLabel::Theta, Some(n)) => {
                    thetas.insert(n);
                }
                _ => {}
            }
        }
        for n in taus {
            out.extend(self.restrict_in(&BTreeSet::from([n]), b, visiting)?);
        }
        if !blocks_theta {
            out.extend(self.restrict_in(&thetas, b, visiting)?);
        }
        Ok(out)
    }

    fn build_graph(&mut self, root: Id) -> Result<TestGraph> {
        let mut index = HashMap::from([(root, 0)]);
        let mut states: Vec<Vec<(TestLabel, Option<usize>)>> = vec![vec![]];
        let mut queue = VecDeque::from([root]);
        while let Some(id) = queue.pop_front() {
            let mut out = Vec::new();
            for (l, n) in self.steps(id)? {
                let next = n.map(|n| {
                    *index.entry(n).or_insert_with(|| {
                        states.push(vec![]);
                        queue.push_back(n);
                        states.len() - 1
                    })
                });
                out.push((l, next));
            }
            if states.len() > MAX_STATES {
                return Err(Error::Unsupported(format!(
                    "test exceeds {MAX_STATES} states"
                )));
            }
            states[index[&id]] = out;
        }
        Ok(TestGraph::from_machine(&Machine { states, root: 0 }))
    }
}

struct Compiler<'a> {
    alg: &'a mut Algebra,
    alphabet: &'a [String],
}

impl Compiler<'_> {
    fn every_action(&self, next: Id) -> Vec<(TestLabel, Option<Id>)> {
        self.alphabet
            .iter()
            .map(|a| (TestLabel::Visible(a.clone()), Some(next)))
            .collect()
    }

    // rec T. t ∧ (Σ{a; T} □ θ; pass)
    fn globally(&mut self, t: Id) -> Id {
        let hole = self.alg.explicit(vec![]);
        let me = self.alg.and(t, hole);
        let mut steps = self.every_action(me);
        steps.push((TestLabel::Theta, Some(self.alg.pass())));
        self.alg.exprs[hole] = Expr::Steps(steps);
        me
    }

    fn compile(&mut self, f: &Ctl) -> Result<Id> {
        Ok(match f {
            Ctl::True => self.alg.pass(),
            Ctl::False => self.alg.stop(),
            Ctl::Atom(a) => {
                if !self.alphabet.contains(a) {
                    return Err(Error::UnknownAction(a.clone()));
                }
                let p = self.alg.pass();
                self.alg
                    .explicit(vec![(TestLabel::Visible(a.clone()), Some(p))])
            }
            Ctl::Not(g) => {
                let t = self.compile(g)?;
                self.alg.neg(t)
            }
            Ctl::Or(g, h) => {
                let (a, b) = (self.compile(g)?, self.compile(h)?);
                self.alg.or([a, b])
            }
            Ctl::And(g, h) => {
                let (a, b) = (self.compile(g)?, self.compile(h)?);
                self.alg.and(a, b)
            }
            Ctl::EX(g) => {
                let t = self.compile(g)?;
                let steps = self.every_action(t);
                self.alg.explicit(steps)
            }
            // rec T. t □ Σ{a; T}
            Ctl::EF(g) => {
                let t = self.compile(g)?;
                let hole = self.alg.explicit(vec![]);
                let me = self.alg.fresh(Expr::Choice(BTreeSet::from([t, hole])));
                self.alg.exprs[hole] = Expr::Steps(self.every_action(me));
                me
            }
            Ctl::EG(g) => {
                let t = self.compile(g)?;
                self.globally(t)
            }
            // rec T. (t1 ∧ (Σ{a; T} □ θ; pass)) □ i; T2, where T2 is the test for E G f2.
            Ctl::EU(g, h) => {
                let (t1, t2) = (self.compile(g)?, self.compile(h)?);
                let g2 = self.globally(t2);
                let hole = self.alg.explicit(vec![]);
                let first = self.alg.and(t1, hole);
                let later = self.alg.explicit(vec![(TestLabel::Tau, Some(g2))]);
                let me = self.alg.fresh(Expr::Choice(BTreeSet::from([first, later])));
                let mut steps = self.every_action(me);
                steps.push((TestLabel::Theta, Some(self.alg.pass())));
                self.alg.exprs[hole] = Expr::Steps(steps);
                me
            }
            Ctl::AX(_) | Ctl::AF(_) | Ctl::AG(_) | Ctl::AU(..) | Ctl::ER(..) | Ctl::AR(..) => {
                self.compile(&f.to_existential())?
            }
        })
    }
}
