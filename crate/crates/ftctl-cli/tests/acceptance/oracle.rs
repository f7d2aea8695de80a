//! A path-enumeration CTL evaluator, independent of the fixpoint labeller.
//!
//! Every existential path property of CTL has a witness that is a simple
//! lasso: a path of pairwise distinct states whose last state steps back
//! into the path. Universal ones are refuted by such a lasso, since the
//! negation of a CTL path formula is again one of X, U, R, F, G.
//! So quantifying over the simple lassos of a state is exact.

use ftctl::ctl::Ctl;
use ftctl::kripke::{KState, Kripke};

#[derive(Debug, Clone)]
pub struct Lasso {
    pub path: Vec<KState>,
    pub back: usize,
}

impl Lasso {
    fn next(&self, i: usize) -> KState {
        if i + 1 < self.path.len() {
            self.path[i + 1]
        } else {
            self.path[self.back]
        }
    }
}

pub fn lassos_from(k: &Kripke, s: KState) -> Vec<Lasso> {
    let mut out = Vec::new();
    let mut path = vec![s];
    extend(k, &mut path, &mut out);
    out
}

fn extend(k: &Kripke, path: &mut Vec<KState>, out: &mut Vec<Lasso>) {
    let last = *path.last().unwrap();
    for &t in k.successors(last) {
        match path.iter().position(|&u| u == t) {
            Some(back) => out.push(Lasso {
                path: path.clone(),
                back,
            }),
            None => {
                path.push(t);
                extend(k, path, out);
                path.pop();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOp {
    Next,
    Finally,
    Globally,
    Until,
    Release,
}

/// Does the infinite word of `l` satisfy the path operator over the
/// state sets `x` (left or only operand) and `y` (right operand)?
pub fn path_holds(l: &Lasso, op: PathOp, x: &[bool], y: &[bool]) -> bool {
    // Past the last distinct state the word only repeats states already seen.
    let p = &l.path;
    match op {
        PathOp::Next => x[l.next(0)],
        PathOp::Finally => p.iter().any(|&s| x[s]),
        PathOp::Globally => p.iter().all(|&s| x[s]),
        PathOp::Until => {
            for &s in p {
                if y[s] {
                    return true;
                }
                if !x[s] {
                    return false;
                }
            }
            false
        }
        PathOp::Release => {
            for &s in p {
                if !y[s] {
                    return false;
                }
                if x[s] {
                    return true;
                }
            }
            true
        }
    }
}

pub struct Oracle<'a> {
    k: &'a Kripke,
    lassos: Vec<Vec<Lasso>>,
}

impl<'a> Oracle<'a> {
    pub fn new(k: &'a Kripke) -> Self {
        Oracle {
            k,
            lassos: k.states().map(|s| lassos_from(k, s)).collect(),
        }
    }

    pub fn quantify(&self, universal: bool, op: PathOp, x: &[bool], y: &[bool]) -> Vec<bool> {
        self.k
            .states()
            .map(|s| {
                let mut ls = self.lassos[s].iter();
                if universal {
                    ls.all(|l| path_holds(l, op, x, y))
                } else {
                    ls.any(|l| path_holds(l, op, x, y))
                }
            })
            .collect()
    }

    pub fn eval(&self, f: &Ctl) -> Vec<bool> {
        let n = self.k.num_states();
        let none = vec![false; n];
        let un = |g: &Ctl| self.eval(g);
        match f {
            Ctl::True => vec![true; n],
            Ctl::False => none,
            Ctl::Atom(a) => self
                .k
                .states()
                .map(|s| self.k.label(s).contains(a))
                .collect(),
            Ctl::Not(g) => un(g).into_iter().map(|b| !b).collect(),
            Ctl::And(g, h) => un(g).iter().zip(un(h)).map(|(a, b)| *a && b).collect(),
            Ctl::Or(g, h) => un(g).iter().zip(un(h)).map(|(a, b)| *a || b).collect(),
            Ctl::EX(g) => self.quantify(false, PathOp::Next, &un(g), &none),
            Ctl::AX(g) => self.quantify(true, PathOp::Next, &un(g), &none),
            Ctl::EF(g) => self.quantify(false, PathOp::Finally, &un(g), &none),
            Ctl::AF(g) => self.quantify(true, PathOp::Finally, &un(g), &none),
            Ctl::EG(g) => self.quantify(false, PathOp::Globally, &un(g), &none),
            Ctl::AG(g) => self.quantify(true, PathOp::Globally, &un(g), &none),
            Ctl::EU(g, h) => self.quantify(false, PathOp::Until, &un(g), &un(h)),
            Ctl::AU(g, h) => self.quantify(true, PathOp::Until, &un(g), &un(h)),
            Ctl::ER(g, h) => self.quantify(false, PathOp::Release, &un(g), &un(h)),
            Ctl::AR(g, h) => self.quantify(true, PathOp::Release, &un(g), &un(h)),
        }
    }
}
