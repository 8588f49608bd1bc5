//! Command-line front end for the `polygamy` library.

pub mod reproduce;
pub mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polygamy::exponents::{find_alpha0, find_alpha1, find_beta0, ThresholdResult};
use polygamy::measures::{coa, measure_vector, MeasureKind, MeasureVector};
use polygamy::roof::{eoa, RestartBudget};
use polygamy::states::{fmt_f64, load_state, PartitionSpec, State};
use polygamy::Result;

use reproduce::{example, figure_csv, power_curve_csv, Grid};
use verify::{run_verify, VerifyConfig};

#[derive(Debug, Parser)]
#[command(
    name = "polygamy",
    version,
    about = "Polygamy and monogamy exponents for multiqubit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Concurrence,
    Coa,
    Eof,
}

impl From<Kind> for MeasureKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Concurrence => MeasureKind::Concurrence,
            Kind::Coa => MeasureKind::ConcurrenceOfAssistance,
            Kind::Eof => MeasureKind::EoF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Alpha0,
    Alpha1,
    Beta0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, clap::Args)]
pub struct StateArgs {
    /// State file (JSON).
    #[arg(long)]
    pub state: PathBuf,
    /// Focus qubit A.
    #[arg(long, default_value_t = 0)]
    pub focus: usize,
    /// Partner qubits, comma separated; defaults to all others.
    #[arg(long, value_delimiter = ',')]
    pub partners: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Kind::Concurrence)]
    pub kind: Kind,
    /// Restarts for convex-roof estimates.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Seed for convex-roof estimates; derived from the state when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl StateArgs {
    fn budget(&self) -> RestartBudget {
        RestartBudget {
            restarts: self.restarts,
            seed: self.seed,
            ..RestartBudget::default()
        }
    }

    fn load(&self) -> Result<(State, PartitionSpec)> {
        let state = load_state(&self.state)?;
        let n = state.n_qubits();
        let part = match &self.partners {
            Some(p) => PartitionSpec::new(n, self.focus, p.clone())?,
            None => PartitionSpec::with_focus(n, self.focus)?,
        };
        Ok((state, part))
    }

    fn vector(&self) -> Result<MeasureVector> {
        let (state, part) = self.load()?;
        measure_vector(&state, &part, self.kind.into(), Some(&self.budget()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global and pairwise values of a measure.
    Measure {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponent threshold alpha0, alpha1 or beta0.
    Threshold {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of quoted and computed values for a worked example (1, 2 or 3).
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV data for a figure (1 to 4).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        /// Grid as start:stop:step.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded ensemble checks of the inequalities.
    Verify {
        /// Number of 3-qubit states.
        #[arg(long, default_value_t = 500)]
        ensemble: usize,
        /// Number of 4-qubit states; 2/5 of the 3-qubit count by default.
        #[arg(long)]
        ensemble_4q: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Add convex-roof versus closed-form checks on rank-2 two-qubit states.
        #[arg(long)]
        oracle: bool,
        /// Number of rank-2 states for --oracle; the 3-qubit count by default.
        #[arg(long)]
        oracle_states: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol_slack: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol_unit: f64,
        #[arg(long, default_value_t = 2e-3)]
        tol_oracle: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `alpha,lhs,rhs` CSV of global^α against the pairwise sum for a state file.
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value = "0:2.5:0.005")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Rendered output and whether every check in it passed.
pub struct Outcome {
    pub text: String,
    pub out: Option<PathBuf>,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String, out: Option<PathBuf>) -> Self {
        Self {
            text,
            out,
            passed: true,
        }
    }

    /// Writes to `out` or stdout and returns the exit code.
    pub fn emit(self) -> Result<i32> {
        match &self.out {
            Some(path) => std::fs::write(path, &self.text)?,
            None => print!("{}", self.text),
        }
        Ok(if self.passed { 0 } else { 1 })
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct MeasureOutput<'a> {
    kind: &'a str,
    focus: usize,
    partners: &'a [usize],
    global: f64,
    pairs: &'a [f64],
    approximate: bool,
}

fn threshold(args: &StateArgs, which: Which) -> Result<ThresholdResult> {
    let mv = args.vector()?;
    match which {
        Which::Alpha0 => find_alpha0(&mv),
        Which::Alpha1 => find_alpha1(&mv),
        Which::Beta0 => {
            let (state, part) = args.load()?;
            let assisted_pairs = part
                .partners()
                .iter()
                .map(|&b| {
                    let rho = state.reduced(&[part.focus(), b])?;
                    match mv.kind {
                        MeasureKind::EoF => eoa(&rho, &args.budget()),
                        _ => coa(&rho),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let assisted = MeasureVector::new(mv.kind, mv.global, assisted_pairs)?;
            find_beta0(&mv, &assisted)
        }
    }
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Measure { state, format, out } => {
            let (_, part) = state.load()?;
            let mv = state.vector()?;
            let text = match format {
                Format::Json => to_json(&MeasureOutput {
                    kind: mv.kind.name(),
                    focus: part.focus(),
                    partners: part.partners(),
                    global: mv.global,
                    pairs: &mv.pairs,
                    approximate: mv.approximate,
                }),
                Format::Csv => {
                    let mut s = String::from("quantity,value\n");
                    let _ = writeln!(s, "global,{}", fmt_f64(mv.global));
                    for (b, p) in part.partners().iter().zip(&mv.pairs) {
                        let _ = writeln!(s, "pair_{}_{},{}", part.focus(), b, fmt_f64(*p));
                    }
                    s
                }
            };
            Ok(Outcome::ok(text, out))
        }
        Command::Threshold { state, which, out } => {
            Ok(Outcome::ok(to_json(&threshold(&state, which)?), out))
        }
        Command::Example { which, format, out } => {
            let table = example(which)?;
            let text = match format {
                None => table.to_text(),
                Some(Format::Json) => to_json(&table),
                Some(Format::Csv) => {
                    let mut s = String::from("quantity,quoted,computed,diff,tol,pass\n");
                    for r in &table.rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            r.quantity,
                            fmt_f64(r.quoted),
                            fmt_f64(r.computed),
                            fmt_f64(r.diff),
                            fmt_f64(r.tol),
                            r.pass
                        );
                    }
                    s
                }
            };
            Ok(Outcome {
                text,
                out,
                passed: table.all_pass,
            })
        }
        Command::Figure { which, grid, out } => {
            let grid = grid.as_deref().map(Grid::parse).transpose()?;
            Ok(Outcome::ok(figure_csv(which, grid)?, out))
        }
        Command::Verify {
            ensemble,
            ensemble_4q,
            seed,
            oracle,
            oracle_states,
            tol_slack,
            tol_unit,
            tol_oracle,
            out,
        } => {
            let mut cfg = VerifyConfig::new(seed, ensemble);
            if let Some(n) = ensemble_4q {
                cfg.four_qubit = n;
            }
            if let Some(n) = oracle_states {
                cfg.oracle_states = n;
            }
            cfg.oracle = oracle;
            cfg.slack = tol_slack;
            cfg.unit_tol = tol_unit;
            cfg.oracle_tol = tol_oracle;
            let report = run_verify(&cfg)?;
            Ok(Outcome {
                text: to_json(&report),
                out,
                passed: report.all_passed,
            })
        }
        Command::Sweep { state, grid, out } => {
            let grid = Grid::parse(&grid)?;
            let mv = state.vector()?;
            Ok(Outcome::ok(power_curve_csv(&mv, &grid.points()), out))
        }
    }
}
