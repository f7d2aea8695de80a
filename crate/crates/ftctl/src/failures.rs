//! Failure traces, stable failures and the bounded failure-trace preorder.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::lts::{Action, Lts, StateId};

pub type Refusal = BTreeSet<String>;

/// `A0 a1 A1 … an An`: refusal sets interleaved with visible actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FailureTrace {
    pub refusals: Vec<Refusal>,
    pub actions: Vec<String>,
}

impl FailureTrace {
    pub fn empty() -> Self {
        FailureTrace {
            refusals: vec![Refusal::new()],
            actions: Vec::new(),
        }
    }

    pub fn new(refusals: Vec<Refusal>, actions: Vec<String>) -> Result<Self> {
        if refusals.len() != actions.len() + 1 {
            return Err(Error::Invalid(
                "a failure trace needs one more refusal than actions".into(),
            ));
        }
        Ok(FailureTrace { refusals, actions })
    }

    /// Pointwise inclusion of refusals over the same action sequence.
    pub fn is_below(&self, other: &FailureTrace) -> bool {
        self.actions == other.actions
            && self
                .refusals
                .iter()
                .zip(&other.refusals)
                .all(|(a, b)| a.is_subset(b))
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, s: &Refusal) -> fmt::Result {
    if s.is_empty() {
        return f.write_str("{}");
    }
    f.write_str("{")?;
    for (i, a) in s.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(a)?;
    }
    f.write_str("}")
}

impl fmt::Display for FailureTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(f, &self.refusals[0])?;
        for (a, r) in self.actions.iter().zip(&self.refusals[1..]) {
            write!(f, " {a} ")?;
            fmt_set(f, r)?;
        }
        Ok(())
    }
}

/// A subset-closed set of failure traces stored through its maximal elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureTraceSet {
    maximal: BTreeSet<FailureTrace>,
}

impl FailureTraceSet {
    fn insert(&mut self, f: FailureTrace) {
        if self.maximal.iter().any(|g| f.is_below(g)) {
            return;
        }
        self.maximal.retain(|g| !g.is_below(&f));
        self.maximal.insert(f);
    }

    /// Membership under subset closure of every refusal.
    pub fn contains(&self, f: &FailureTrace) -> bool {
        self.maximal.iter().any(|g| f.is_below(g))
    }

    pub fn maximal(&self) -> &BTreeSet<FailureTrace> {
        &self.maximal
    }

    pub fn is_subset(&self, other: &FailureTraceSet) -> bool {
        self.maximal.iter().all(|f| other.contains(f))
    }
}

/// `(w, X)`: after `w` the process can be stable and refuse `X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableFailure {
    pub trace: Vec<String>,
    pub refusal: Refusal,
}

fn refusal_at(lts: &Lts, q: StateId) -> Refusal {
    if lts.is_stable(q) {
        lts.maximal_refusal(q)
    } else {
        Refusal::new()
    }
}

struct Enumerator<'a> {
    lts: &'a Lts,
    max_actions: usize,
    out: FailureTraceSet,
    refusals: Vec<Refusal>,
    actions: Vec<String>,
}

impl Enumerator<'_> {
    // `segment` holds the states visited by τ since the last visible action; it
    // cuts τ-cycles, which cannot add stable states that are not already on the path.
    fn explore(&mut self, q: StateId, segment: &mut Vec<StateId>) {
        let here = refusal_at(self.lts, q);
        self.refusals.push(here);
        self.out.insert(FailureTrace {
            refusals: self.refusals.clone(),
            actions: self.actions.clone(),
        });
        let succ = self.lts.successors(q).to_vec();
        if self.actions.len() < self.max_actions {
            for (a, t) in &succ {
                if let Action::Visible(a) = a {
                    self.actions.push(a.clone());
                    let mut fresh = vec![*t];
                    self.explore(*t, &mut fresh);
                    self.actions.pop();
                }
            }
        }
        self.refusals.pop();
        for (a, t) in &succ {
            if *a == Action::Tau && !segment.contains(t) {
                segment.push(*t);
                self.explore(*t, segment);
                segment.pop();
            }
        }
    }
}

/// All failure traces of `s` with at most `max_actions` visible actions.
pub fn failure_traces(lts: &Lts, s: StateId, max_actions: usize) -> Result<FailureTraceSet> {
    if s >= lts.num_states() {
        return Err(Error::UnknownState(format!("#{s}")));
    }
    let mut e = Enumerator {
        lts,
        max_actions,
        out: FailureTraceSet::default(),
        refusals: Vec::new(),
        actions: Vec::new(),
    };
    e.explore(s, &mut vec![s]);
    Ok(e.out)
}

/// Stable failures with `|w| <= max_len`, refusals kept maximal.
pub fn stable_failures(lts: &Lts, s: StateId, max_len: usize) -> Result<BTreeSet<StableFailure>> {
    let mut out = BTreeSet::new();
    for w in fin(lts, s, max_len)? {
        for q in lts.weak_reach_unchecked(s, &w) {
            if lts.is_stable(q) {
                out.insert(StableFailure {
                    trace: w.clone(),
                    refusal: lts.maximal_refusal(q),
                });
            }
        }
    }
    let all: Vec<StableFailure> = out.iter().cloned().collect();
    out.retain(|f| {
        !all.iter()
            .any(|g| g != f && g.trace == f.trace && f.refusal.is_subset(&g.refusal))
    });
    Ok(out)
}

/// Finite traces of length at most `max_len`.
pub fn fin(lts: &Lts, s: StateId, max_len: usize) -> Result<BTreeSet<Vec<String>>> {
    if s >= lts.num_states() {
        return Err(Error::UnknownState(format!("#{s}")));
    }
    let mut out = BTreeSet::new();
    let mut frontier: Vec<(Vec<String>, BTreeSet<StateId>)> =
        vec![(Vec::new(), lts.tau_closure([s]))];
    while let Some((w, states)) = frontier.pop() {
        out.insert(w.clone());
        if w.len() == max_len {
            continue;
        }
        for a in lts.alphabet() {
            let mut img = BTreeSet::new();
            for &q in &states {
                for (b, t) in lts.successors(q) {
                    if b.name() == Some(a.as_str()) {
                        img.insert(*t);
                    }
                }
            }
            if !img.is_empty() {
                let mut w2 = w.clone();
                w2.push(a.clone());
                frontier.push((w2, lts.tau_closure(img)));
            }
        }
    }
    Ok(out)
}

/// `p ⊑FT q` restricted to failure traces with at most `max_actions` actions.
pub fn ft_preorder_bounded(p: &Lts, q: &Lts, max_actions: usize) -> Result<bool> {
    if p.alphabet_set() != q.alphabet_set() {
        return Err(Error::AlphabetMismatch);
    }
    let fp = failure_traces(p, p.initial(), max_actions)?;
    let fq = failure_traces(q, q.initial(), max_actions)?;
    Ok(fp.is_subset(&fq))
}

/// Replays `f` on `lts`: checks that some run produces it.
pub fn has_failure_trace(lts: &Lts, s: StateId, f: &FailureTrace) -> bool {
    // Sets of states that can be current after consuming a prefix of f.
    let mut cur = ok_after_refusal(lts, lts.tau_closure([s]), &f.refusals[0]);
    for (a, r) in f.actions.iter().zip(&f.refusals[1..]) {
        let mut img = BTreeSet::new();
        for &q in &cur {
            for (b, t) in lts.successors(q) {
                if b.name() == Some(a.as_str()) {
                    img.insert(*t);
                }
            }
        }
        cur = ok_after_refusal(lts, lts.tau_closure(img), r);
        if cur.is_empty() {
            return false;
        }
    }
    !cur.is_empty()
}

// States from which the next visible action may be taken after observing
// refusal `r` in the current τ-segment.
fn ok_after_refusal(lts: &Lts, closure: BTreeSet<StateId>, r: &Refusal) -> BTreeSet<StateId> {
    if r.is_empty() {
        return closure;
    }
    closure
        .into_iter()
        .filter(|&q| lts.is_stable(q) && lts.enabled(q).is_disjoint(r))
        .collect()
}
