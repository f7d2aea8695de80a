use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ftctl::convert::{delta_kripke, split_kripke};
use ftctl::ctl::{parse_ctl_file, Ctl};
use ftctl::ctl2ft::{ctltoft, neg_test, or_test};
use ftctl::ft2ctl::{fttoctl, fttoctl_compact, Target};
use ftctl::harness::{may, must};
use ftctl::kripke::{check_delta, check_set, check_state, Kripke};
use ftctl::lts::Lts;
use ftctl::test::TestGraph;
use ftctl_cli::dot::{lts_to_dot, test_to_dot};
use ftctl_cli::{crosscheck, Direction, GenConfig, Mode};

#[derive(Parser)]
#[command(
    name = "ftctl",
    version,
    about = "Failure trace tests, Kripke structures and CTL"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an LTS into a Kripke structure.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "split")]
        mode: ConvertMode,
        /// Output file; a `.dot` extension selects Graphviz output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write Graphviz instead of `.kr` text.
        #[arg(long)]
        dot: bool,
    },
    /// Run a test against a process under may semantics.
    May { process: PathBuf, test: PathBuf },
    /// Run a test against a process under must semantics.
    Must { process: PathBuf, test: PathBuf },
    /// Model-check a formula on a Kripke structure.
    Check {
        kripke: PathBuf,
        formula: PathBuf,
        #[arg(long, value_enum, default_value = "set")]
        regime: Regime,
        /// State to check in the state and delta regimes; defaults to the first initial state.
        #[arg(long)]
        state: Option<String>,
    },
    /// Compile a test into a CTL formula.
    Fttoctl {
        test: PathBuf,
        #[arg(long, value_enum, default_value = "split")]
        target: ConvertMode,
        /// Compile loops into until formulae over `start_a` marks.
        #[arg(long)]
        compact: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compile a CTL formula into a test.
    Ctltoft {
        formula: PathBuf,
        /// Comma-separated action alphabet.
        #[arg(long, value_delimiter = ',', required = true)]
        alphabet: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the negation of a test.
    Negtest {
        test: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the disjunction of two tests.
    Ortest {
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the compilers against the may-testing oracle on random instances.
    Crosscheck(CrosscheckArgs),
    /// Render a `.lts`, `.kr` or `.test` file as Graphviz.
    Dot {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CrosscheckArgs {
    /// Overridden by the FTCTL_SEED environment variable.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    total: usize,
    #[arg(long, value_enum, default_value = "both")]
    direction: Direction,
    #[arg(long, value_enum, default_value = "both")]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    alphabet_size: usize,
    #[arg(long, default_value_t = 6)]
    max_states: usize,
    #[arg(long, default_value_t = 5)]
    max_test_depth: usize,
    #[arg(long, default_value_t = 0.3)]
    theta_density: f64,
    #[arg(long, default_value_t = 0.15)]
    tau_density: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma_density: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvertMode {
    Split,
    Delta,
}

impl From<ConvertMode> for Target {
    fn from(m: ConvertMode) -> Target {
        match m {
            ConvertMode::Split => Target::Split,
            ConvertMode::Delta => Target::Delta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    State,
    Set,
    Delta,
}

type CmdResult = Result<bool, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> ftctl::Result<T>) -> Result<T, String> {
    parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_formula(path: &Path) -> Result<Ctl, String> {
    let mut fs = load(path, parse_ctl_file)?;
    match fs.len() {
        1 => Ok(fs.pop().unwrap()),
        n => Err(format!(
            "{}: expected one formula, found {n}",
            path.display()
        )),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_dot(path: Option<&Path>) -> bool {
    path.and_then(Path::extension).is_some_and(|e| e == "dot")
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Convert {
            input,
            mode,
            output,
            dot,
        } => {
            let p = load(&input, Lts::parse)?;
            let k = match mode {
                ConvertMode::Split => split_kripke(&p),
                ConvertMode::Delta => delta_kripke(&p),
            };
            let text = if dot || is_dot(output.as_deref()) {
                k.to_dot()
            } else {
                k.print()
            };
            emit(output.as_deref(), &text)?;
            Ok(true)
        }
        Command::May { process, test } => {
            let v = may(
                &load(&process, Lts::parse)?,
                &load(&test, TestGraph::parse)?,
            )
            .map_err(|e| e.to_string())?;
            println!("may: {v}");
            Ok(v)
        }
        Command::Must { process, test } => {
            let v = must(
                &load(&process, Lts::parse)?,
                &load(&test, TestGraph::parse)?,
            )
            .map_err(|e| e.to_string())?;
            println!("must: {v}");
            Ok(v)
        }
        Command::Check {
            kripke,
            formula,
            regime,
            state,
        } => {
            let k = load(&kripke, Kripke::parse)?;
            let f = load_formula(&formula)?;
            check(&k, &f, regime, state.as_deref()).map_err(|e| e.to_string())
        }
        Command::Fttoctl {
            test,
            target,
            compact,
            output,
        } => {
            let t = load(&test, TestGraph::parse)?;
            let text = if compact {
                let c = fttoctl_compact(&t, target.into()).map_err(|e| e.to_string())?;
                let mut s = String::new();
                if !c.marks.is_empty() {
                    s.push_str(&format!("# marks: {}\n", c.marks.join(" ")));
                }
                s.push_str(&format!("{}\n", c.formula.simplify()));
                s
            } else {
                format!(
                    "{}\n",
                    fttoctl(&t, target.into())
                        .map_err(|e| e.to_string())?
                        .simplify()
                )
            };
            emit(output.as_deref(), &text)?;
            Ok(true)
        }
        Command::Ctltoft {
            formula,
            alphabet,
            output,
        } => {
            let f = load_formula(&formula)?;
            let t = ctltoft(&f, &alphabet).map_err(|e| e.to_string())?;
            emit(output.as_deref(), &t.print())?;
            Ok(true)
        }
        Command::Negtest { test, output } => {
            let t = neg_test(&load(&test, TestGraph::parse)?).map_err(|e| e.to_string())?;
            emit(output.as_deref(), &t.print())?;
            Ok(true)
        }
        Command::Ortest {
            left,
            right,
            output,
        } => {
            let (l, r) = (
                load(&left, TestGraph::parse)?,
                load(&right, TestGraph::parse)?,
            );
            let t = or_test(&l, &r).map_err(|e| e.to_string())?;
            emit(output.as_deref(), &t.print())?;
            Ok(true)
        }
        Command::Crosscheck(args) => {
            let mut seed = args.seed;
            if let Ok(v) = std::env::var("FTCTL_SEED") {
                seed = v
                    .trim()
                    .parse()
                    .map_err(|_| format!("FTCTL_SEED is not a number: `{v}`"))?;
            }
            let cfg = GenConfig {
                seed,
                alphabet_size: args.alphabet_size,
                max_states: args.max_states,
                max_test_depth: args.max_test_depth,
                theta_density: args.theta_density,
                tau_density: args.tau_density,
                gamma_density: args.gamma_density,
            };
            cfg.validate()?;
            let report = crosscheck(&cfg, args.total, args.direction, args.mode);
            print!("{report}");
            Ok(report.is_clean())
        }
        Command::Dot { input, output } => {
            let ext = input.extension().and_then(|e| e.to_str()).unwrap_or("");
            let text = match ext {
                "lts" => lts_to_dot(&load(&input, Lts::parse)?),
                "kr" => load(&input, Kripke::parse)?.to_dot(),
                "test" => test_to_dot(&load(&input, TestGraph::parse)?),
                _ => {
                    return Err(format!(
                        "{}: expected a .lts, .kr or .test file",
                        input.display()
                    ))
                }
            };
            emit(output.as_deref(), &text)?;
            Ok(true)
        }
    }
}

fn check(k: &Kripke, f: &Ctl, regime: Regime, state: Option<&str>) -> ftctl::Result<bool> {
    let pick = || match state {
        Some(name) => k
            .state(name)
            .ok_or_else(|| ftctl::Error::UnknownState(name.to_string())),
        None => Ok(k.initials()[0]),
    };
    match regime {
        Regime::State => {
            let v = check_state(k, pick()?, f)?;
            println!("sat: {v}");
            Ok(v)
        }
        Regime::Delta => {
            let v = check_delta(k, pick()?, f)?;
            println!("sat: {v}");
            Ok(v)
        }
        Regime::Set => {
            let v = check_set(k, k.initials(), f)?;
            println!("sat: {v}");
            let per: Vec<(&str, bool)> = k
                .initials()
                .iter()
                .map(|&s| Ok((k.name(s), check_state(k, s, f)?)))
                .collect::<ftctl::Result<_>>()?;
            let held = per.iter().filter(|(_, b)| *b).count();
            println!("per-state: {held} of {}", per.len());
            for (n, b) in per {
                println!("  {n}: {b}");
            }
            Ok(v)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
