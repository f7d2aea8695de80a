//! LTS to Kripke conversions.
//!
//! The split conversion makes one Kripke state `<s,a,t>` per weak visible
//! transition `s ⇒a t`, labelled `{a}`, plus a state `<t>` labelled `{}`
//! with a self-loop for every reachable `t` that offers nothing. The
//! states of the initial LTS state form the initial set.
//!
//! The Δ conversion keeps every LTS state, labelled `{Delta}`, and inserts a
//! state `(r,a,s)` labelled `{a}` on every visible transition.

use std::collections::HashMap;

use crate::ctl::DELTA;
use crate::kripke::{KState, Kripke, KripkeBuilder};
use crate::lts::{Action, Lts, StateId};

/// What a split state stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitState {
    /// The weak transition `src ⇒act dst`.
    Step {
        src: StateId,
        act: String,
        dst: StateId,
    },
    /// A state with no weak initials.
    Terminal(StateId),
}

impl SplitState {
    pub fn name(&self, p: &Lts) -> String {
        match self {
            SplitState::Step { src, act, dst } => {
                format!("<{},{},{}>", p.name(*src), act, p.name(*dst))
            }
            SplitState::Terminal(s) => format!("<{}>", p.name(*s)),
        }
    }
}

fn split_states_of(p: &Lts, s: StateId) -> Vec<SplitState> {
    let mut out = Vec::new();
    for a in p.alphabet() {
        for t in p.weak_reach_unchecked(s, &[a]) {
            out.push(SplitState::Step {
                src: s,
                act: a.clone(),
                dst: t,
            });
        }
    }
    if out.is_empty() {
        out.push(SplitState::Terminal(s));
    }
    out
}

/// The split conversion; its initial states are the set `Q`.
pub fn split_kripke(p: &Lts) -> Kripke {
    split_with_origins(p).0
}

/// The split conversion together with the origin of every Kripke state.
pub fn split_with_origins(p: &Lts) -> (Kripke, Vec<SplitState>) {
    let mut b = KripkeBuilder::new(p.alphabet());
    let mut ids: HashMap<SplitState, KState> = HashMap::new();
    let mut origins: Vec<SplitState> = Vec::new();
    let initials: Vec<KState> = split_states_of(p, p.initial())
        .into_iter()
        .map(|st| intern(p, &mut b, &mut ids, &mut origins, st))
        .collect();
    // Ids follow discovery order, so `origins` is also the work queue.
    let mut id = 0;
    while id < origins.len() {
        match origins[id].clone() {
            SplitState::Terminal(_) => b.edge(id, id),
            SplitState::Step { dst, .. } => {
                for st in split_states_of(p, dst) {
                    let n = intern(p, &mut b, &mut ids, &mut origins, st);
                    b.edge(id, n);
                }
            }
        }
        id += 1;
    }
    (
        b.build(initials).expect("split states are well formed"),
        origins,
    )
}

fn intern(
    p: &Lts,
    b: &mut KripkeBuilder,
    ids: &mut HashMap<SplitState, KState>,
    origins: &mut Vec<SplitState>,
    st: SplitState,
) -> KState {
    if let Some(&id) = ids.get(&st) {
        return id;
    }
    let id = b.state(&st.name(p));
    if let SplitState::Step { act, .. } = &st {
        b.label(id, act);
    }
    ids.insert(st.clone(), id);
    origins.push(st);
    id
}

/// The Δ conversion, made total by self-loops on terminal states.
pub fn delta_kripke(p: &Lts) -> Kripke {
    let mut props: Vec<String> = p.alphabet().to_vec();
    props.push(DELTA.to_string());
    let mut b = KripkeBuilder::new(props);
    for s in p.states() {
        let id = b.state(p.name(s));
        b.label(id, DELTA);
    }
    for (r, act, s) in p.transitions() {
        match act {
            Action::Tau => b.edge(*r, *s),
            Action::Visible(a) => {
                let e = b.state(&format!("({},{},{})", p.name(*r), a, p.name(*s)));
                b.label(e, a);
                b.edge(*r, e);
                b.edge(e, *s);
            }
        }
    }
    b.build([p.initial()])
        .expect("delta states are well formed")
        .make_total()
}

/// Adds a proposition `start_a` to every state labelled `a`, for each `a` in `marks`.
pub fn mark_starts(k: &Kripke, marks: &[String]) -> Kripke {
    let mut b = KripkeBuilder::new(k.props().iter());
    for a in marks {
        b.add_prop(&start_prop(a));
    }
    for s in k.states() {
        let id = b.state(k.name(s));
        for l in k.label(s) {
            b.label(id, l);
            if marks.contains(l) {
                b.label(id, &start_prop(l));
            }
        }
    }
    for s in k.states() {
        for &t in k.successors(s) {
            b.edge(s, t);
        }
    }
    b.build(k.initials().iter().copied())
        .expect("marking keeps the structure well formed")
}

pub fn start_prop(a: &str) -> String {
    format!("start_{a}")
}
