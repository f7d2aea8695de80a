//! Finite labelled transition systems, weak transitions, stability and refusals.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub type StateId = usize;

/// Words that cannot be used as visible action names because the test and
/// formula languages give them a meaning of their own.
pub const RESERVED: &[&str] = &[
    "tau", "i", "theta", "stop", "pass", "rec", "sum", "true", "false", "Delta", "E", "A", "X",
    "F", "G", "U", "R", "EX", "AX", "EF", "AF", "EG", "AG",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// True when `s` may be declared as a visible action.
pub fn is_action_name(s: &str) -> bool {
    is_identifier(s) && !RESERVED.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Visible(String),
    Tau,
}

impl Action {
    pub fn visible(name: impl Into<String>) -> Self {
        Action::Visible(name.into())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Action::Visible(a) => Some(a),
            Action::Tau => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Visible(a) => f.write_str(a),
            Action::Tau => f.write_str("tau"),
        }
    }
}

/// A rooted finite LTS over a declared visible alphabet.
///
/// State ids are dense indices; the original names are kept for printing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    alphabet: Vec<String>,
    transitions: Vec<(StateId, Action, StateId)>,
    succ: Vec<Vec<(Action, StateId)>>,
    initial: StateId,
}

/// Incremental construction of an [`Lts`].
#[derive(Debug, Clone, Default)]
pub struct LtsBuilder {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    alphabet: Vec<String>,
    transitions: Vec<(StateId, Action, StateId)>,
}

impl LtsBuilder {
    pub fn new<I, S>(alphabet: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut b = LtsBuilder::default();
        for a in alphabet {
            let a = a.into();
            if !is_action_name(&a) {
                return Err(Error::Invalid(format!("`{a}` is not a valid action name")));
            }
            if !b.alphabet.contains(&a) {
                b.alphabet.push(a);
            }
        }
        Ok(b)
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn transition(&mut self, src: StateId, act: Action, dst: StateId) -> Result<()> {
        if let Action::Visible(a) = &act {
            if !self.alphabet.contains(a) {
                return Err(Error::UnknownAction(a.clone()));
            }
        }
        for s in [src, dst] {
            if s >= self.names.len() {
                return Err(Error::UnknownState(format!("#{s}")));
            }
        }
        self.transitions.push((src, act, dst));
        Ok(())
    }

    pub fn build(mut self, initial: &str) -> Lts {
        let initial = self.state(initial);
        let mut succ = vec![Vec::new(); self.names.len()];
        for (s, a, t) in &self.transitions {
            succ[*s].push((a.clone(), *t));
        }
        Lts {
            names: self.names,
            index: self.index,
            alphabet: self.alphabet,
            transitions: self.transitions,
            succ,
            initial,
        }
    }
}

impl Lts {
    /// Builds an LTS from `(src, action, dst)` triples, `tau` naming the internal action.
    pub fn from_triples(
        alphabet: &[&str],
        initial: &str,
        triples: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let mut b = LtsBuilder::new(alphabet.iter().copied())?;
        b.state(initial);
        for (s, a, t) in triples {
            let s = b.state(s);
            let t = b.state(t);
            let act = if *a == "tau" {
                Action::Tau
            } else {
                Action::visible(*a)
            };
            b.transition(s, act, t)?;
        }
        Ok(b.build(initial))
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Result<StateId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    /// The declared alphabet, in declaration order.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_set(&self) -> BTreeSet<String> {
        self.alphabet.iter().cloned().collect()
    }

    pub fn transitions(&self) -> &[(StateId, Action, StateId)] {
        &self.transitions
    }

    pub fn successors(&self, s: StateId) -> &[(Action, StateId)] {
        &self.succ[s]
    }

    fn check_state(&self, s: StateId) -> Result<()> {
        if s < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(format!("#{s}")))
        }
    }

    fn check_action(&self, a: &str) -> Result<()> {
        if self.alphabet.iter().any(|x| x == a) {
            Ok(())
        } else {
            Err(Error::UnknownAction(a.to_string()))
        }
    }

    /// States reachable from `from` through τ steps only, including `from` itself.
    pub fn tau_closure(&self, from: impl IntoIterator<Item = StateId>) -> BTreeSet<StateId> {
        let mut seen: BTreeSet<StateId> = BTreeSet::new();
        let mut stack: Vec<StateId> = from.into_iter().collect();
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            for (a, t) in &self.succ[s] {
                if *a == Action::Tau && !seen.contains(t) {
                    stack.push(*t);
                }
            }
        }
        seen
    }

    fn strong_image(&self, from: &BTreeSet<StateId>, a: &str) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        for &s in from {
            for (b, t) in &self.succ[s] {
                if b.name() == Some(a) {
                    out.insert(*t);
                }
            }
        }
        out
    }

    /// All `q` with `from ⇒word q`.
    pub fn weak_reach<S: AsRef<str>>(
        &self,
        from: StateId,
        word: &[S],
    ) -> Result<BTreeSet<StateId>> {
        self.check_state(from)?;
        for a in word {
            self.check_action(a.as_ref())?;
        }
        Ok(self.weak_reach_unchecked(from, word))
    }

    pub(crate) fn weak_reach_unchecked<S: AsRef<str>>(
        &self,
        from: StateId,
        word: &[S],
    ) -> BTreeSet<StateId> {
        let mut cur = self.tau_closure([from]);
        for a in word {
            if cur.is_empty() {
                break;
            }
            let img = self.strong_image(&cur, a.as_ref());
            cur = self.tau_closure(img);
        }
        cur
    }

    /// Weak initials: the visible actions `a` with `s ⇒a`.
    pub fn initials(&self, s: StateId) -> Result<BTreeSet<String>> {
        self.check_state(s)?;
        let mut out = BTreeSet::new();
        for q in self.tau_closure([s]) {
            for (a, _) in &self.succ[q] {
                if let Action::Visible(a) = a {
                    out.insert(a.clone());
                }
            }
        }
        Ok(out)
    }

    /// Visible actions enabled by a single strong step.
    pub fn enabled(&self, s: StateId) -> BTreeSet<String> {
        self.succ[s]
            .iter()
            .filter_map(|(a, _)| a.name().map(str::to_string))
            .collect()
    }

    pub fn is_stable(&self, s: StateId) -> bool {
        self.succ[s].iter().all(|(a, _)| *a != Action::Tau)
    }

    /// `s ref X`: some stable state in the τ-closure of `s` enables nothing in `X`.
    pub fn refuses(&self, s: StateId, refusal: &BTreeSet<String>) -> Result<bool> {
        self.check_state(s)?;
        for a in refusal {
            self.check_action(a)?;
        }
        Ok(self.tau_closure([s]).into_iter().any(|q| {
            self.is_stable(q)
                && self.succ[q]
                    .iter()
                    .all(|(a, _)| a.name().is_none_or(|n| !refusal.contains(n)))
        }))
    }

    /// The largest set refused at a stable state: everything it does not enable.
    pub fn maximal_refusal(&self, s: StateId) -> BTreeSet<String> {
        let en = self.enabled(s);
        self.alphabet
            .iter()
            .filter(|a| !en.contains(*a))
            .cloned()
            .collect()
    }

    /// Parses the `.lts` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut alphabet: Option<Vec<String>> = None;
        let mut init: Option<String> = None;
        let mut triples: Vec<(usize, [String; 3])> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix("alphabet:") {
                if alphabet.is_some() {
                    return Err(Error::syntax(line_no, 1, "duplicate alphabet line"));
                }
                alphabet = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix("init:") {
                let words: Vec<&str> = rest.split_whitespace().collect();
                if words.len() != 1 || init.is_some() {
                    return Err(Error::syntax(
                        line_no,
                        1,
                        "expected exactly one initial state",
                    ));
                }
                init = Some(words[0].to_string());
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if words.len() != 3 {
                let col = raw.len() - raw.trim_start().len() + 1;
                return Err(Error::syntax(line_no, col, "expected `src action dst`"));
            }
            triples.push((
                line_no,
                [
                    words[0].to_string(),
                    words[1].to_string(),
                    words[2].to_string(),
                ],
            ));
        }
        let alphabet = alphabet.ok_or_else(|| Error::syntax(1, 1, "missing `alphabet:` line"))?;
        let init = init.ok_or_else(|| Error::syntax(1, 1, "missing `init:` line"))?;
        let mut b = LtsBuilder::new(alphabet)?;
        b.state(&init);
        for (line_no, [s, a, t]) in triples {
            let s = b.state(&s);
            let t = b.state(&t);
            let act = if a == "tau" {
                Action::Tau
            } else {
                Action::Visible(a)
            };
            b.transition(s, act, t).map_err(|e| match e {
                Error::UnknownAction(a) => {
                    Error::syntax(line_no, 1, format!("action `{a}` not in alphabet"))
                }
                e => e,
            })?;
        }
        Ok(b.build(&init))
    }

    /// Canonical `.lts` text; `parse(print(l))` prints back to the same bytes.
    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str("alphabet:");
        for a in &self.alphabet {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
        out.push_str(&format!("init: {}\n", self.names[self.initial]));
        for (s, a, t) in &self.transitions {
            out.push_str(&format!("{} {} {}\n", self.names[*s], a, self.names[*t]));
        }
        out
    }

    /// Copy of this LTS with extra transitions, used by monotonicity checks.
    pub fn with_transitions(&self, extra: &[(StateId, Action, StateId)]) -> Result<Self> {
        let mut b = LtsBuilder::new(self.alphabet.iter().cloned())?;
        for n in &self.names {
            b.state(n);
        }
        for (s, a, t) in self.transitions.iter().chain(extra) {
            b.transition(*s, a.clone(), *t)?;
        }
        Ok(b.build(&self.names[self.initial]))
    }

    /// Copy without the transition at `index`; unreachable states are kept.
    pub fn without_transition(&self, index: usize) -> Self {
        let mut b =
            LtsBuilder::new(self.alphabet.iter().cloned()).expect("alphabet already validated");
        for n in &self.names {
            b.state(n);
        }
        for (k, (s, a, t)) in self.transitions.iter().enumerate() {
            if k != index {
                b.transition(*s, a.clone(), *t)
                    .expect("endpoints already validated");
            }
        }
        b.build(&self.names[self.initial])
    }
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}
