//! Seeded random generators for processes, tests, loops, formulae and failure traces.

use std::collections::BTreeSet;

use ftctl::ctl::{self, Ctl};
use ftctl::failures::FailureTrace;
use ftctl::lts::{Action, Lts, LtsBuilder};
use ftctl::test::{Node, NodeId, Prefix, TestBuilder, TestGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ACTIONS: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub alphabet_size: usize,
    pub max_states: usize,
    pub max_test_depth: usize,
    pub theta_density: f64,
    pub tau_density: f64,
    pub gamma_density: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 42,
            alphabet_size: 3,
            max_states: 6,
            max_test_depth: 5,
            theta_density: 0.3,
            tau_density: 0.15,
            gamma_density: 0.1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=4).contains(&self.alphabet_size) {
            return Err(format!(
                "alphabet size must be between 1 and 4, got {}",
                self.alphabet_size
            ));
        }
        if !(1..=8).contains(&self.max_states) {
            return Err(format!(
                "max states must be between 1 and 8, got {}",
                self.max_states
            ));
        }
        if self.max_test_depth > 6 {
            return Err(format!(
                "max test depth must be at most 6, got {}",
                self.max_test_depth
            ));
        }
        for (name, p) in [
            ("theta", self.theta_density),
            ("tau", self.tau_density),
            ("gamma", self.gamma_density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} density must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Vec<String> {
        ACTIONS[..self.alphabet_size]
            .iter()
            .map(|a| a.to_string())
            .collect()
    }
}

pub struct Generator {
    cfg: GenConfig,
    alphabet: Vec<String>,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Generator {
            alphabet: cfg.alphabet(),
            cfg,
            rng,
        }
    }

    /// An independent stream for instance `index`, so that instances do not
    /// depend on each other or on evaluation order.
    pub fn for_instance(cfg: GenConfig, index: u64) -> Self {
        let mut g = Generator::new(cfg);
        g.rng.set_stream(index);
        g
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn action(&mut self) -> String {
        self.alphabet.choose(&mut self.rng).unwrap().clone()
    }

    /// A process with up to `max_states` states, each with at most three
    /// outgoing transitions.
    pub fn lts(&mut self) -> Lts {
        let n = self.rng.gen_range(1..=self.cfg.max_states);
        let mut b = LtsBuilder::new(&self.alphabet).expect("generated alphabets are valid");
        let ids: Vec<_> = (0..n).map(|i| b.state(&format!("s{i}"))).collect();
        for &s in &ids {
            let out = self.rng.gen_range(0..=3);
            for _ in 0..out {
                let act = if self.rng.gen_bool(self.cfg.tau_density) {
                    Action::Tau
                } else {
                    Action::Visible(self.action())
                };
                let dst = ids[self.rng.gen_range(0..n)];
                b.transition(s, act, dst)
                    .expect("generated transitions are valid");
            }
        }
        b.build("s0")
    }

    /// An acyclic test of depth at most `max_test_depth`.
    pub fn acyclic_test(&mut self) -> TestGraph {
        let depth = self.cfg.max_test_depth;
        self.test_of_depth(depth, true)
    }

    pub fn test_of_depth(&mut self, depth: usize, theta: bool) -> TestGraph {
        let mut b = TestBuilder::new();
        let root = self.node(&mut b, depth, theta);
        b.finish(root).expect("generated tests are guarded")
    }

    fn node(&mut self, b: &mut TestBuilder, depth: usize, theta: bool) -> NodeId {
        if depth == 0 {
            return if self.rng.gen_bool(0.75) {
                b.pass()
            } else {
                b.stop()
            };
        }
        if self.rng.gen_bool(self.cfg.gamma_density) {
            return b.pass();
        }
        if self.rng.gen_bool(self.cfg.tau_density) {
            let next = self.node(b, depth - 1, theta);
            return b.prefix(Prefix::Internal, next);
        }
        let width = self.rng.gen_range(1..=2);
        let mut branches = Vec::new();
        for _ in 0..width {
            let a = self.action();
            let next = self.node(b, depth - 1, theta);
            branches.push(b.action(&a, next));
        }
        if theta && self.rng.gen_bool(self.cfg.theta_density) {
            let next = self.node(b, depth - 1, theta);
            branches.push(b.prefix(Prefix::Theta, next));
        }
        if branches.len() == 1 {
            branches[0]
        } else {
            b.choice(branches)
        }
    }

    /// The θ-free loop `a0; (t0 □ a1; (t1 □ … a(n-1); (t(n-1) □ a0; …)))`
    /// with random exits of depth at most two.
    pub fn loop_test(&mut self, n: usize) -> TestGraph {
        assert!(n >= 1, "a loop needs at least one action");
        let mut b = TestBuilder::new();
        let actions: Vec<String> = (0..n).map(|_| self.action()).collect();
        let holes: Vec<NodeId> = (0..n).map(|_| b.hole()).collect();
        for i in 0..n {
            let exit = self.node(&mut b, 2, false);
            let j = (i + 1) % n;
            let next = b.action(&actions[j], holes[j]);
            b.set(holes[i], Node::Choice(vec![exit, next]));
        }
        let root = b.action(&actions[0], holes[0]);
        b.finish(root).expect("loops are guarded")
    }

    /// A sequential test built directly from the grammar
    /// `pass | a; t | Σ{a; stop : a ∈ A} □ θ; u` with `u` not a refusal.
    pub fn sequential_test(&mut self, max_len: usize) -> TestGraph {
        let len = self.rng.gen_range(0..=max_len);
        let mut b = TestBuilder::new();
        let mut cur = b.pass();
        for i in (0..=len).rev() {
            if self.rng.gen_bool(0.5) {
                let refusal = self.nonempty_subset();
                let mut branches: Vec<NodeId> = refusal
                    .iter()
                    .map(|a| {
                        let s = b.stop();
                        b.action(a, s)
                    })
                    .collect();
                branches.push(b.prefix(Prefix::Theta, cur));
                branches.shuffle(&mut self.rng);
                cur = b.choice(branches);
            }
            if i > 0 {
                let a = self.action();
                cur = b.action(&a, cur);
            }
        }
        b.finish(cur).expect("sequential tests are acyclic")
    }

    fn nonempty_subset(&mut self) -> BTreeSet<String> {
        loop {
            let s: BTreeSet<String> = self
                .alphabet
                .clone()
                .into_iter()
                .filter(|_| self.rng.gen_bool(0.5))
                .collect();
            if !s.is_empty() {
                return s;
            }
        }
    }

    pub fn failure_trace(&mut self, max_len: usize) -> FailureTrace {
        let len = self.rng.gen_range(0..=max_len);
        let actions: Vec<String> = (0..len).map(|_| self.action()).collect();
        let refusals = (0..=len)
            .map(|_| {
                self.alphabet
                    .clone()
                    .into_iter()
                    .filter(|_| self.rng.gen_bool(0.4))
                    .collect()
            })
            .collect();
        FailureTrace::new(refusals, actions).expect("lengths match")
    }

    /// A formula over `⊤ ⊥ a ¬ ∧ ∨ EX EU EG` of depth at most `depth`.
    pub fn formula(&mut self, depth: usize) -> Ctl {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return match self.rng.gen_range(0..10) {
                0 => Ctl::True,
                1 => Ctl::False,
                _ => ctl::atom(&self.action()),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => ctl::not(self.formula(d)),
            1 => ctl::and(self.formula(d), self.formula(d)),
            2 => ctl::or(self.formula(d), self.formula(d)),
            3 => ctl::ex(self.formula(d)),
            4 => ctl::eu(self.formula(d), self.formula(d)),
            _ => ctl::eg(self.formula(d)),
        }
    }

    /// A formula using every CTL connective, over the given propositions.
    pub fn full_formula(&mut self, depth: usize, props: &[String]) -> Ctl {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return match self.rng.gen_range(0..8) {
                0 => Ctl::True,
                1 => Ctl::False,
                _ => ctl::atom(props.choose(&mut self.rng).unwrap()),
            };
        }
        let d = depth - 1;
        let g = self.full_formula(d, props);
        match self.rng.gen_range(0..13) {
            0 => ctl::not(g),
            1 => ctl::and(g, self.full_formula(d, props)),
            2 => ctl::or(g, self.full_formula(d, props)),
            3 => ctl::ex(g),
            4 => ctl::ax(g),
            5 => ctl::ef(g),
            6 => ctl::af(g),
            7 => ctl::eg(g),
            8 => ctl::ag(g),
            9 => ctl::eu(g, self.full_formula(d, props)),
            10 => ctl::au(g, self.full_formula(d, props)),
            11 => ctl::er(g, self.full_formula(d, props)),
            _ => ctl::ar(g, self.full_formula(d, props)),
        }
    }
}
