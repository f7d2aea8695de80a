//! Running a process against a test under the θ-prioritised parallel composition.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::lts::{Action, Lts, StateId};
use crate::test::{NodeId, Step, TestGraph, TestLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub proc: StateId,
    pub test: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Config {
    At(ProductState),
    Success,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub may: bool,
    pub must: bool,
}

/// Result of one bounded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// The run emitted γ.
    Success,
    /// The run ended in a deadlock without γ.
    Failure,
    /// The run was cut off by the step bound.
    Open,
}

/// Step cache over one process/test pair.
struct Product<'a> {
    lts: &'a Lts,
    test: &'a TestGraph,
    steps: HashMap<NodeId, Vec<Step>>,
}

impl<'a> Product<'a> {
    fn new(lts: &'a Lts, test: &'a TestGraph) -> Result<Self> {
        let alpha = lts.alphabet_set();
        if let Some(a) = test.actions().into_iter().find(|a| !alpha.contains(a)) {
            return Err(Error::UnknownAction(a));
        }
        Ok(Product {
            lts,
            test,
            steps: HashMap::new(),
        })
    }

    fn test_steps(&mut self, t: NodeId) -> Vec<Step> {
        if let Some(s) = self.steps.get(&t) {
            return s.clone();
        }
        let s: Vec<Step> = self.test.step(t).into_iter().collect();
        self.steps.insert(t, s.clone());
        s
    }

    fn successors(&mut self, ps: ProductState) -> Vec<(TestLabel, Config)> {
        let tsteps = self.test_steps(ps.test);
        let mut out = Vec::new();
        for (a, p2) in self.lts.successors(ps.proc) {
            match a {
                Action::Tau => out.push((
                    TestLabel::Tau,
                    Config::At(ProductState {
                        proc: *p2,
                        test: ps.test,
                    }),
                )),
                Action::Visible(a) => {
                    for s in &tsteps {
                        if let (TestLabel::Visible(b), Some(t2)) = (&s.label, s.next) {
                            if a == b {
                                out.push((
                                    s.label.clone(),
                                    Config::At(ProductState {
                                        proc: *p2,
                                        test: t2,
                                    }),
                                ));
                            }
                        }
                    }
                }
            }
        }
        for s in &tsteps {
            match (&s.label, s.next) {
                (TestLabel::Tau, Some(t2)) => out.push((
                    TestLabel::Tau,
                    Config::At(ProductState {
                        proc: ps.proc,
                        test: t2,
                    }),
                )),
                (TestLabel::Gamma, _) => out.push((TestLabel::Gamma, Config::Success)),
                _ => {}
            }
        }
        if out.is_empty() {
            for s in &tsteps {
                if let (TestLabel::Theta, Some(t2)) = (&s.label, s.next) {
                    out.push((
                        TestLabel::Theta,
                        Config::At(ProductState {
                            proc: ps.proc,
                            test: t2,
                        }),
                    ));
                }
            }
        }
        out
    }

    fn start(&self) -> ProductState {
        ProductState {
            proc: self.lts.initial(),
            test: self.test.root(),
        }
    }
}

/// The one-step moves of `p ‖θ t` from `ps`.
pub fn compose_step(
    lts: &Lts,
    test: &TestGraph,
    ps: ProductState,
) -> Result<Vec<(TestLabel, Config)>> {
    let mut prod = Product::new(lts, test)?;
    if ps.proc >= lts.num_states() {
        return Err(Error::UnknownState(format!("#{}", ps.proc)));
    }
    if ps.test >= test.len() {
        return Err(Error::Invalid(format!(
            "test node #{} out of range",
            ps.test
        )));
    }
    Ok(prod.successors(ps))
}

/// `p may t`: a successful configuration is reachable.
pub fn may(lts: &Lts, test: &TestGraph) -> Result<bool> {
    let mut prod = Product::new(lts, test)?;
    let start = prod.start();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(ps) = queue.pop_front() {
        for (_, c) in prod.successors(ps) {
            match c {
                Config::Success => return Ok(true),
                Config::At(n) => {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// `p must t`: every maximal run succeeds; infinite runs count as failures.
pub fn must(lts: &Lts, test: &TestGraph) -> Result<bool> {
    let mut prod = Product::new(lts, test)?;
    let start = prod.start();
    // Iterative DFS with colours to find dead ends and cycles avoiding success.
    let mut color: HashMap<ProductState, u8> = HashMap::new();
    let mut stack: Vec<(ProductState, Vec<ProductState>)> = Vec::new();
    let succ = |prod: &mut Product, ps| -> Option<Vec<ProductState>> {
        let s = prod.successors(ps);
        if s.is_empty() {
            return None;
        }
        Some(
            s.into_iter()
                .filter_map(|(_, c)| if let Config::At(n) = c { Some(n) } else { None })
                .collect(),
        )
    };
    match succ(&mut prod, start) {
        None => return Ok(false),
        Some(ns) => {
            color.insert(start, 1);
            stack.push((start, ns));
        }
    }
    while let Some((ps, pending)) = stack.last_mut() {
        match pending.pop() {
            None => {
                color.insert(*ps, 2);
                stack.pop();
            }
            Some(n) => match color.get(&n) {
                Some(1) => return Ok(false),
                Some(_) => {}
                None => match succ(&mut prod, n) {
                    None => return Ok(false),
                    Some(ns) => {
                        color.insert(n, 1);
                        stack.push((n, ns));
                    }
                },
            },
        }
    }
    Ok(true)
}

pub fn verdict(lts: &Lts, test: &TestGraph) -> Result<Verdict> {
    Ok(Verdict {
        may: may(lts, test)?,
        must: must(lts, test)?,
    })
}

/// Outcomes of the runs of `p ‖θ t` with at most `bound` steps.
pub fn obs(lts: &Lts, test: &TestGraph, bound: usize) -> Result<BTreeSet<Outcome>> {
    let mut prod = Product::new(lts, test)?;
    let start = prod.start();
    let mut memo: HashMap<(ProductState, usize), BTreeSet<Outcome>> = HashMap::new();
    Ok(outcomes(&mut prod, start, bound, &mut memo))
}

fn outcomes(
    prod: &mut Product,
    ps: ProductState,
    budget: usize,
    memo: &mut HashMap<(ProductState, usize), BTreeSet<Outcome>>,
) -> BTreeSet<Outcome> {
    if let Some(r) = memo.get(&(ps, budget)) {
        return r.clone();
    }
    let succ = prod.successors(ps);
    let mut out = BTreeSet::new();
    if succ.is_empty() {
        out.insert(Outcome::Failure);
    } else if budget == 0 {
        out.insert(Outcome::Open);
    } else {
        for (_, c) in succ {
            match c {
                Config::Success => {
                    out.insert(Outcome::Success);
                }
                Config::At(n) => out.extend(outcomes(prod, n, budget - 1, memo)),
            }
        }
    }
    memo.insert((ps, budget), out.clone());
    out
}
