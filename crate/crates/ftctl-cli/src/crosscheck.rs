//! Randomised comparison of the compilers against the may-testing oracle.
//!
//! Each instance draws a process, an acyclic test and a formula from its own
//! random stream. Mismatches are shrunk by greedy deletion of transitions,
//! test branches and subformulae while the disagreement persists.

use std::fmt;

use clap::ValueEnum;
use ftctl::convert::{delta_kripke, split_kripke};
use ftctl::ctl::{self, Ctl};
use ftctl::ctl2ft::ctltoft;
use ftctl::ft2ctl::{fttoctl, Target};
use ftctl::harness::may;
use ftctl::kripke::{check_delta, check_set};
use ftctl::lts::Lts;
use ftctl::test::{Machine, TestGraph};

use crate::gen::{GenConfig, Generator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Ft2ctl,
    Ctl2ft,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Split,
    Delta,
    Both,
}

impl Direction {
    fn parts(self) -> &'static [Direction] {
        match self {
            Direction::Ft2ctl => &[Direction::Ft2ctl],
            Direction::Ctl2ft => &[Direction::Ctl2ft],
            Direction::Both => &[Direction::Ft2ctl, Direction::Ctl2ft],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Direction::Ft2ctl => "ft2ctl",
            Direction::Ctl2ft => "ctl2ft",
            Direction::Both => "both",
        }
    }
}

impl Mode {
    fn targets(self) -> &'static [Target] {
        match self {
            Mode::Split => &[Target::Split],
            Mode::Delta => &[Target::Delta],
            Mode::Both => &[Target::Split, Target::Delta],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::Split => "split",
            Mode::Delta => "delta",
            Mode::Both => "both",
        }
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Split => "split",
        Target::Delta => "delta",
    }
}

/// The compilers under test. Swapping one out gives a mutation fixture.
#[derive(Clone, Copy)]
pub struct Compilers<'a> {
    pub fttoctl: &'a dyn Fn(&TestGraph, Target) -> ftctl::Result<Ctl>,
    pub ctltoft: &'a dyn Fn(&Ctl, &[String]) -> ftctl::Result<TestGraph>,
}

impl Default for Compilers<'static> {
    fn default() -> Self {
        Compilers {
            fttoctl: &fttoctl,
            ctltoft: &ctltoft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    Test(TestGraph),
    Formula(Ctl),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Test(t) => write!(f, "test: {}", t.print().trim_end()),
            Subject::Formula(g) => write!(f, "formula: {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub index: usize,
    pub direction: Direction,
    pub target: Target,
    pub process: Lts,
    pub subject: Subject,
    pub oracle: bool,
    /// The checker's verdict, or the error it raised.
    pub checker: Result<bool, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub seed: u64,
    pub direction: Direction,
    pub mode: Mode,
    pub total: usize,
    pub agreements: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CrosscheckReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for CrosscheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "crosscheck seed={} direction={} mode={}",
            self.seed,
            self.direction.name(),
            self.mode.name()
        )?;
        writeln!(f, "agreements: {}/{}", self.agreements, self.total)?;
        for m in &self.mismatches {
            let checker = match &m.checker {
                Ok(b) => b.to_string(),
                Err(e) => format!("error ({e})"),
            };
            let (oracle_name, checker_name) = match m.direction {
                Direction::Ctl2ft => ("sat", "may"),
                _ => ("may", "sat"),
            };
            writeln!(
                f,
                "mismatch #{} ({}, {}): {oracle_name}={} {checker_name}={checker}",
                m.index,
                m.direction.name(),
                target_name(m.target),
                m.oracle
            )?;
            for line in m.process.print().lines() {
                writeln!(f, "  {line}")?;
            }
            writeln!(f, "  {}", m.subject)?;
        }
        Ok(())
    }
}

/// Oracle verdict and checker verdict for one comparison.
pub fn compare(
    p: &Lts,
    subject: &Subject,
    target: Target,
    compilers: &Compilers,
) -> ftctl::Result<(bool, Result<bool, String>)> {
    let sat = |f: &Ctl| -> ftctl::Result<bool> {
        match target {
            Target::Split => {
                let k = split_kripke(p);
                check_set(&k, k.initials(), f)
            }
            Target::Delta => {
                let k = delta_kripke(p);
                check_delta(&k, k.initials()[0], f)
            }
        }
    };
    Ok(match subject {
        Subject::Test(t) => {
            let oracle = may(p, t)?;
            let checker = (compilers.fttoctl)(t, target)
                .and_then(|f| sat(&f))
                .map_err(|e| e.to_string());
            (oracle, checker)
        }
        Subject::Formula(f) => {
            let oracle = sat(f)?;
            let checker = (compilers.ctltoft)(f, p.alphabet())
                .and_then(|t| may(p, &t))
                .map_err(|e| e.to_string());
            (oracle, checker)
        }
    })
}

fn disagrees(p: &Lts, subject: &Subject, target: Target, compilers: &Compilers) -> bool {
    match compare(p, subject, target, compilers) {
        Ok((oracle, checker)) => checker != Ok(oracle),
        Err(_) => false,
    }
}

pub fn crosscheck(
    cfg: &GenConfig,
    total: usize,
    direction: Direction,
    mode: Mode,
) -> CrosscheckReport {
    crosscheck_with(cfg, total, direction, mode, &Compilers::default())
}

pub fn crosscheck_with(
    cfg: &GenConfig,
    total: usize,
    direction: Direction,
    mode: Mode,
    compilers: &Compilers,
) -> CrosscheckReport {
    let mut report = CrosscheckReport {
        seed: cfg.seed,
        direction,
        mode,
        total,
        agreements: 0,
        mismatches: Vec::new(),
    };
    for index in 0..total {
        match check_instance(cfg, index, direction, mode, compilers) {
            None => report.agreements += 1,
            Some(m) => report.mismatches.push(m),
        }
    }
    report
}

/// The process, acyclic test and formula of instance `index`.
pub fn instance(cfg: &GenConfig, index: usize) -> (Lts, TestGraph, Ctl) {
    let mut g = Generator::for_instance(cfg.clone(), index as u64);
    let p = g.lts();
    let t = g.acyclic_test();
    let f = g.formula(3);
    (p, t, f)
}

/// Runs every selected comparison on instance `index`; returns the first
/// disagreement, already shrunk.
pub fn check_instance(
    cfg: &GenConfig,
    index: usize,
    direction: Direction,
    mode: Mode,
    compilers: &Compilers,
) -> Option<Mismatch> {
    let (p, t, f) = instance(cfg, index);
    for &dir in direction.parts() {
        let subject = match dir {
            Direction::Ctl2ft => Subject::Formula(f.clone()),
            _ => Subject::Test(t.clone()),
        };
        for &target in mode.targets() {
            let (oracle, checker) =
                compare(&p, &subject, target, compilers).expect("generated instances are valid");
            if checker != Ok(oracle) {
                let (p, subject) = shrink(p.clone(), subject, target, compilers);
                let (oracle, checker) =
                    compare(&p, &subject, target, compilers).expect("shrinking keeps validity");
                return Some(Mismatch {
                    index,
                    direction: dir,
                    target,
                    process: p,
                    subject,
                    oracle,
                    checker,
                });
            }
        }
    }
    None
}

/// Greedy deletion until no single deletion keeps the disagreement.
pub fn shrink(
    mut p: Lts,
    mut subject: Subject,
    target: Target,
    compilers: &Compilers,
) -> (Lts, Subject) {
    'outer: loop {
        for i in 0..p.transitions().len() {
            let q = p.without_transition(i);
            if disagrees(&q, &subject, target, compilers) {
                p = q;
                continue 'outer;
            }
        }
        let candidates = match &subject {
            Subject::Test(t) => test_deletions(t)
                .into_iter()
                .map(Subject::Test)
                .collect::<Vec<_>>(),
            Subject::Formula(f) => formula_reductions(f)
                .into_iter()
                .map(Subject::Formula)
                .collect(),
        };
        for s in candidates {
            if disagrees(&p, &s, target, compilers) {
                subject = s;
                continue 'outer;
            }
        }
        return (p, subject);
    }
}

/// Every test obtained by removing one branch of one reachable state.
fn test_deletions(t: &TestGraph) -> Vec<TestGraph> {
    let m = t.machine();
    let mut out = Vec::new();
    for (k, steps) in m.states.iter().enumerate() {
        for j in 0..steps.len() {
            let mut states = m.states.clone();
            states[k].remove(j);
            out.push(TestGraph::from_machine(&Machine {
                states,
                root: m.root,
            }));
        }
    }
    out
}

/// Every formula obtained by replacing one subformula with one of its
/// children or with a constant.
fn formula_reductions(f: &Ctl) -> Vec<Ctl> {
    let mut out: Vec<Ctl> = f.children().into_iter().cloned().collect();
    if !matches!(f, Ctl::True | Ctl::False) {
        out.push(Ctl::True);
        out.push(Ctl::False);
    }
    let children = f.children();
    for (i, c) in children.iter().enumerate() {
        for r in formula_reductions(c) {
            out.push(with_child(f, i, r));
        }
    }
    out
}

fn with_child(f: &Ctl, i: usize, c: Ctl) -> Ctl {
    let pick = |j: usize, g: &Ctl| if i == j { c.clone() } else { g.clone() };
    match f {
        Ctl::True | Ctl::False | Ctl::Atom(_) => f.clone(),
        Ctl::Not(g) => ctl::not(pick(0, g)),
        Ctl::EX(g) => ctl::ex(pick(0, g)),
        Ctl::AX(g) => ctl::ax(pick(0, g)),
        Ctl::EF(g) => ctl::ef(pick(0, g)),
        Ctl::AF(g) => ctl::af(pick(0, g)),
        Ctl::EG(g) => ctl::eg(pick(0, g)),
        Ctl::AG(g) => ctl::ag(pick(0, g)),
        Ctl::And(g, h) => ctl::and(pick(0, g), pick(1, h)),
        Ctl::Or(g, h) => ctl::or(pick(0, g), pick(1, h)),
        Ctl::EU(g, h) => ctl::eu(pick(0, g), pick(1, h)),
        Ctl::AU(g, h) => ctl::au(pick(0, g), pick(1, h)),
        Ctl::ER(g, h) => ctl::er(pick(0, g), pick(1, h)),
        Ctl::AR(g, h) => ctl::ar(pick(0, g), pick(1, h)),
    }
}
