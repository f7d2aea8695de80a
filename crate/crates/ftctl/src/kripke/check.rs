//! Labeling-algorithm model checking and the two derived satisfaction relations.

use std::collections::VecDeque;

use super::{KState, Kripke};
use crate::ctl::{self, Ctl};
use crate::error::{Error, Result};

fn validate(k: &Kripke, f: &Ctl) -> Result<()> {
    if !k.is_total() {
        return Err(Error::Invalid("transition relation is not total".into()));
    }
    match f.atoms().into_iter().find(|a| !k.props().contains(a)) {
        Some(a) => Err(Error::UnknownProp(a)),
        None => Ok(()),
    }
}

fn check_state_id(k: &Kripke, s: KState) -> Result<()> {
    if s < k.num_states() {
        Ok(())
    } else {
        Err(Error::UnknownState(format!("#{s}")))
    }
}

/// The states satisfying `f`, as a membership vector.
pub fn satisfying(k: &Kripke, f: &Ctl) -> Result<Vec<bool>> {
    validate(k, f)?;
    Ok(Labeler::new(k).eval(&f.to_existential()))
}

pub fn check_state(k: &Kripke, s: KState, f: &Ctl) -> Result<bool> {
    check_state_id(k, s)?;
    Ok(satisfying(k, f)?[s])
}

/// Satisfaction over a set of states: atoms are existential over `q`,
/// boolean connectives act on the judgment, and a quantified formula holds
/// when some member of `q` satisfies it.
pub fn check_set(k: &Kripke, q: &[KState], f: &Ctl) -> Result<bool> {
    validate(k, f)?;
    for &s in q {
        check_state_id(k, s)?;
    }
    let mut lab = Labeler::new(k);
    Ok(set_judgment(&mut lab, q, f))
}

fn set_judgment(lab: &mut Labeler, q: &[KState], f: &Ctl) -> bool {
    match f {
        Ctl::True => true,
        Ctl::False => false,
        Ctl::Atom(a) => q.iter().any(|&s| lab.k.label(s).contains(a)),
        Ctl::Not(g) => !set_judgment(lab, q, g),
        Ctl::And(g, h) => set_judgment(lab, q, g) && set_judgment(lab, q, h),
        Ctl::Or(g, h) => set_judgment(lab, q, g) || set_judgment(lab, q, h),
        _ => {
            let sat = lab.eval(&f.to_existential());
            q.iter().any(|&s| sat[s])
        }
    }
}

/// Rewrites `f` so that Δ-labelled states are skipped.
pub fn delta_transform(f: &Ctl) -> Result<Ctl> {
    use ctl::*;
    let d = delta_transform;
    let delta = || atom(DELTA);
    Ok(match f {
        Ctl::True => Ctl::True,
        Ctl::False => Ctl::False,
        Ctl::Atom(a) if a == DELTA => return Err(Error::Invalid(format!("`{DELTA}` is reserved"))),
        Ctl::Atom(_) => eu(delta(), f.clone()),
        Ctl::Not(g) => not(d(g)?),
        Ctl::And(g, h) => and(d(g)?, d(h)?),
        Ctl::Or(g, h) => or(d(g)?, d(h)?),
        Ctl::EX(g) => ex(eu(delta(), d(g)?)),
        Ctl::AX(g) => ax(au(delta(), d(g)?)),
        Ctl::EU(g, h) => eu(or(delta(), d(g)?), d(h)?),
        Ctl::AU(g, h) => au(or(delta(), d(g)?), d(h)?),
        Ctl::EG(g) => eg(or(delta(), d(g)?)),
        Ctl::AG(g) => ag(or(delta(), d(g)?)),
        Ctl::EF(g) => ef(d(g)?),
        Ctl::AF(g) => af(d(g)?),
        Ctl::ER(g, h) => er(d(g)?, or(delta(), d(h)?)),
        Ctl::AR(g, h) => ar(d(g)?, or(delta(), d(h)?)),
    })
}

/// `check_state` on the Δ-transformed formula. `Delta` counts as false
/// when the structure does not declare it.
pub fn check_delta(k: &Kripke, s: KState, f: &Ctl) -> Result<bool> {
    validate(k, f)?;
    check_state_id(k, s)?;
    let g = delta_transform(f)?;
    Ok(Labeler::new(k).eval(&g.to_existential())[s])
}

struct Labeler<'a> {
    k: &'a Kripke,
    pred: Vec<Vec<KState>>,
}

impl<'a> Labeler<'a> {
    fn new(k: &'a Kripke) -> Self {
        Labeler {
            k,
            pred: k.predecessors(),
        }
    }

    fn eval(&mut self, f: &Ctl) -> Vec<bool> {
        let n = self.k.num_states();
        match f {
            Ctl::True => vec![true; n],
            Ctl::False => vec![false; n],
            Ctl::Atom(a) => self
                .k
                .states()
                .map(|s| self.k.label(s).contains(a))
                .collect(),
            Ctl::Not(g) => self.eval(g).into_iter().map(|b| !b).collect(),
            Ctl::And(g, h) => {
                let (x, y) = (self.eval(g), self.eval(h));
                x.into_iter().zip(y).map(|(a, b)| a && b).collect()
            }
            Ctl::Or(g, h) => {
                let (x, y) = (self.eval(g), self.eval(h));
                x.into_iter().zip(y).map(|(a, b)| a || b).collect()
            }
            Ctl::EX(g) => {
                let x = self.eval(g);
                self.k
                    .states()
                    .map(|s| self.k.successors(s).iter().any(|&t| x[t]))
                    .collect()
            }
            Ctl::EU(g, h) => {
                let (x, y) = (self.eval(g), self.eval(h));
                self.eu(&x, y)
            }
            Ctl::EG(g) => {
                let x = self.eval(g);
                self.eg(x)
            }
            other => unreachable!("not in the existential fragment: {other}"),
        }
    }

    // Least fixpoint: backward search from g-states through f-states.
    fn eu(&self, f: &[bool], g: Vec<bool>) -> Vec<bool> {
        let mut sat = g;
        let mut queue: VecDeque<KState> = self.k.states().filter(|&s| sat[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &self.pred[t] {
                if !sat[s] && f[s] {
                    sat[s] = true;
                    queue.push_back(s);
                }
            }
        }
        sat
    }

    // Greatest fixpoint: repeatedly drop states with no successor left in the set.
    fn eg(&self, f: Vec<bool>) -> Vec<bool> {
        let mut sat = f;
        let mut count: Vec<usize> = self
            .k
            .states()
            .map(|s| self.k.successors(s).iter().filter(|&&t| sat[t]).count())
            .collect();
        let mut queue: VecDeque<KState> = self
            .k
            .states()
            .filter(|&s| sat[s] && count[s] == 0)
            .collect();
        for &s in &queue {
            sat[s] = false;
        }
        while let Some(t) = queue.pop_front() {
            for &s in &self.pred[t] {
                if sat[s] {
                    count[s] -= 1;
                    if count[s] == 0 {
                        sat[s] = false;
                        queue.push_back(s);
                    }
                }
            }
        }
        sat
    }
}
