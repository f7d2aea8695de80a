//! CTL formulae, normalisation to the existential fragment and simplification.

mod syntax;

use std::collections::BTreeSet;
use std::fmt;

pub use syntax::{parse_ctl, parse_ctl_file, print_ctl};

/// The reserved proposition of the Δ-interleaving conversion.
pub const DELTA: &str = "Delta";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctl {
    True,
    False,
    Atom(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    EX(Box<Ctl>),
    AX(Box<Ctl>),
    EF(Box<Ctl>),
    AF(Box<Ctl>),
    EG(Box<Ctl>),
    AG(Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
    ER(Box<Ctl>, Box<Ctl>),
    AR(Box<Ctl>, Box<Ctl>),
}

use Ctl::*;

pub fn atom(a: &str) -> Ctl {
    Atom(a.to_string())
}

pub fn not(f: Ctl) -> Ctl {
    Not(Box::new(f))
}

pub fn and(f: Ctl, g: Ctl) -> Ctl {
    And(Box::new(f), Box::new(g))
}

pub fn or(f: Ctl, g: Ctl) -> Ctl {
    Or(Box::new(f), Box::new(g))
}

pub fn ex(f: Ctl) -> Ctl {
    EX(Box::new(f))
}

pub fn ax(f: Ctl) -> Ctl {
    AX(Box::new(f))
}

pub fn ef(f: Ctl) -> Ctl {
    EF(Box::new(f))
}

pub fn af(f: Ctl) -> Ctl {
    AF(Box::new(f))
}

pub fn eg(f: Ctl) -> Ctl {
    EG(Box::new(f))
}

pub fn ag(f: Ctl) -> Ctl {
    AG(Box::new(f))
}

pub fn eu(f: Ctl, g: Ctl) -> Ctl {
    EU(Box::new(f), Box::new(g))
}

pub fn au(f: Ctl, g: Ctl) -> Ctl {
    AU(Box::new(f), Box::new(g))
}

pub fn er(f: Ctl, g: Ctl) -> Ctl {
    ER(Box::new(f), Box::new(g))
}

pub fn ar(f: Ctl, g: Ctl) -> Ctl {
    AR(Box::new(f), Box::new(g))
}

/// Left-nested disjunction; `⊥` when empty.
pub fn or_all(fs: impl IntoIterator<Item = Ctl>) -> Ctl {
    fs.into_iter().reduce(or).unwrap_or(False)
}

/// Left-nested conjunction; `⊤` when empty.
pub fn and_all(fs: impl IntoIterator<Item = Ctl>) -> Ctl {
    fs.into_iter().reduce(and).unwrap_or(True)
}

impl Ctl {
    pub fn parse(text: &str) -> crate::Result<Ctl> {
        parse_ctl(text)
    }

    /// Direct subformulae.
    pub fn children(&self) -> Vec<&Ctl> {
        match self {
            True | False | Atom(_) => vec![],
            Not(f) | EX(f) | AX(f) | EF(f) | AF(f) | EG(f) | AG(f) => vec![f],
            And(f, g) | Or(f, g) | EU(f, g) | AU(f, g) | ER(f, g) | AR(f, g) => vec![f, g],
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        if let Atom(a) = self {
            out.insert(a.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        self.children()
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    /// True when only `⊤ ⊥ a ¬ ∧ ∨ EX EU EG` occur.
    pub fn is_existential(&self) -> bool {
        match self {
            AX(_) | EF(_) | AF(_) | AG(_) | AU(..) | ER(..) | AR(..) => false,
            _ => self.children().iter().all(|c| c.is_existential()),
        }
    }

    /// Rewrites into `⊤ ⊥ a ¬ ∧ ∨ EX EU EG` by the usual dualities.
    pub fn to_existential(&self) -> Ctl {
        match self {
            True => True,
            False => False,
            Atom(a) => Atom(a.clone()),
            Not(f) => not(f.to_existential()),
            And(f, g) => and(f.to_existential(), g.to_existential()),
            Or(f, g) => or(f.to_existential(), g.to_existential()),
            EX(f) => ex(f.to_existential()),
            EG(f) => eg(f.to_existential()),
            EU(f, g) => eu(f.to_existential(), g.to_existential()),
            EF(f) => eu(True, f.to_existential()),
            AX(f) => not(ex(not(f.to_existential()))),
            AG(f) => not(eu(True, not(f.to_existential()))),
            AF(f) => not(eg(not(f.to_existential()))),
            AU(f, g) => {
                let (f, g) = (f.to_existential(), g.to_existential());
                and(
                    not(eu(not(g.clone()), and(not(f), not(g.clone())))),
                    not(eg(not(g))),
                )
            }
            // E[f R g] = ¬A[¬f U ¬g], with the A-until expanded as above.
            ER(f, g) => {
                let (f, g) = (f.to_existential(), g.to_existential());
                let (nf, ng) = (not(f), not(g));
                not(and(
                    not(eu(not(ng.clone()), and(not(nf), not(ng.clone())))),
                    not(eg(not(ng))),
                ))
            }
            AR(f, g) => not(eu(not(f.to_existential()), not(g.to_existential()))),
        }
    }

    /// Sound rewrites on total Kripke structures: constant absorption,
    /// double negation, idempotence and flattening of `∧`/`∨` chains to
    /// left-nested form.
    pub fn simplify(&self) -> Ctl {
        match self {
            True | False | Atom(_) => self.clone(),
            Not(f) => match f.simplify() {
                True => False,
                False => True,
                Not(g) => *g,
                g => not(g),
            },
            And(..) => {
                let mut parts = Vec::new();
                self.flatten_and(&mut parts);
                let mut kept: Vec<Ctl> = Vec::new();
                for p in parts.iter().map(Ctl::simplify) {
                    let mut sub = Vec::new();
                    p.flatten_and(&mut sub);
                    for q in sub {
                        match q {
                            True => {}
                            False => return False,
                            q if kept.contains(&q) => {}
                            q => kept.push(q),
                        }
                    }
                }
                and_all(kept)
            }
            Or(..) => {
                let mut parts = Vec::new();
                self.flatten_or(&mut parts);
                let mut kept: Vec<Ctl> = Vec::new();
                for p in parts.iter().map(Ctl::simplify) {
                    let mut sub = Vec::new();
                    p.flatten_or(&mut sub);
                    for q in sub {
                        match q {
                            False => {}
                            True => return True,
                            q if kept.contains(&q) => {}
                            q => kept.push(q),
                        }
                    }
                }
                or_all(kept)
            }
            EX(f) | AX(f) | EF(f) | AF(f) | EG(f) | AG(f) => {
                let g = f.simplify();
                match g {
                    True => True,
                    False => False,
                    g => match self {
                        EX(_) => ex(g),
                        AX(_) => ax(g),
                        EF(_) => ef(g),
                        AF(_) => af(g),
                        EG(_) => eg(g),
                        _ => ag(g),
                    },
                }
            }
            EU(f, g) | AU(f, g) => {
                let (f, g) = (f.simplify(), g.simplify());
                match (&f, &g) {
                    (_, True) => True,
                    (_, False) => False,
                    (False, _) => g,
                    _ if matches!(self, EU(..)) => eu(f, g),
                    _ => au(f, g),
                }
            }
            ER(f, g) | AR(f, g) => {
                let (f, g) = (f.simplify(), g.simplify());
                match (&f, &g) {
                    (_, False) => False,
                    (_, True) => True,
                    (True, _) => g,
                    _ if matches!(self, ER(..)) => er(f, g),
                    _ => ar(f, g),
                }
            }
        }
    }

    fn flatten_and(&self, out: &mut Vec<Ctl>) {
        match self {
            And(f, g) => {
                f.flatten_and(out);
                g.flatten_and(out);
            }
            f => out.push(f.clone()),
        }
    }

    fn flatten_or(&self, out: &mut Vec<Ctl>) {
        match self {
            Or(f, g) => {
                f.flatten_or(out);
                g.flatten_or(out);
            }
            f => out.push(f.clone()),
        }
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_ctl(self))
    }
}
