//! Command line front end over the library.
//!
//! Four subcommands: `validate` checks a system file, `derive-sp` computes
//! the property lattice with the state order and actuality map, `simulate`
//! realizes a value as observed relative frequencies, and `check-morphism`
//! tests a candidate map between two systems and derives its property-level
//! action.
//!
//! Exit codes: 0 when the requested check passes, 1 when it completes with
//! a negative verdict (violations found, recovery failed, experiment
//! unperformable, derivation guarantees degraded), 2 for usage, file, or
//! format errors.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::interval::UnitIntervalSet;
use crate::morphism::{
    derive_sp_morphism, validate_sep_morphism, validate_sp_morphism, SepMorphism,
};
use crate::property::{derive_property_system, derive_property_system_with};
use crate::rational::{in_unit_interval, one, parse_rational};
use crate::sep::SepSystem;
use crate::sim::{recover_subset, SimulationPolicy};
use crate::term::ExperimentTerm;

#[derive(Parser, Debug)]
#[command(
    name = "subsetprob",
    version,
    about = "Exact subset-valued probability: validate systems, derive property \
             structure, simulate frequencies, check morphisms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a system file: complete table, valid values, unit certain.
    Validate {
        /// System file in the `.sep` text format.
        file: PathBuf,
    },
    /// Derive the property lattice, state order, and actuality map.
    #[command(name = "derive-sp")]
    DeriveSp {
        /// System file in the `.sep` text format.
        file: PathBuf,
        /// Soften certainty to "within epsilon of certain": a property holds
        /// when the value fits inside [1 - epsilon, 1]. Exact rational, for
        /// example `1/20`.
        #[arg(long)]
        epsilon: Option<String>,
        /// Also write the lattice Hasse diagram to this file as Graphviz
        /// input.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// What to print on standard output.
        #[arg(long, value_enum, default_value_t = DeriveFormat::Text)]
        format: DeriveFormat,
    },
    /// Realize a value as relative frequencies over many sessions and check
    /// the observations against the exact set.
    Simulate {
        /// System file in the `.sep` text format.
        file: PathBuf,
        /// Experiment term, for example `prod(burn, ~float)`.
        term: String,
        /// State in which to perform it.
        state: String,
        /// Seed for the whole run; the same seed reproduces every session.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sessions (independent context draws).
        #[arg(long, default_value_t = 200)]
        sessions: u64,
        /// Trials per session.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Tolerance for comparing frequencies with the exact set.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Also write per-session rows to this file as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// What to print on standard output.
        #[arg(long, value_enum, default_value_t = SimFormat::Text)]
        format: SimFormat,
    },
    /// Check a candidate morphism between two systems and derive its action
    /// on the property systems.
    #[command(name = "check-morphism")]
    CheckMorphism {
        /// Source system (`.sep`); its states map forward.
        src: PathBuf,
        /// Destination system (`.sep`); its experiments map backward.
        dst: PathBuf,
        /// Morphism file in the `.morph` text format.
        morphism: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeriveFormat {
    /// Human-readable property table, actuality map, and state order.
    Text,
    /// Graphviz input for the lattice Hasse diagram.
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    /// Human-readable recovery report.
    Text,
    /// Per-session CSV rows.
    Csv,
}

/// What a subcommand produced: the text for standard output and the process
/// exit code.
#[derive(Debug, PartialEq, Eq)]
pub struct CmdOutcome {
    pub exit_code: i32,
    pub report: String,
}

/// Run one parsed command line; errors become reports with the conventional
/// exit codes instead of propagating.
pub fn run(cli: Cli) -> CmdOutcome {
    match exec(cli.command) {
        Ok(outcome) => outcome,
        Err(e) => CmdOutcome {
            exit_code: match e {
                Error::Unperformable { .. } => 1,
                _ => 2,
            },
            report: format!("error: {e}\n"),
        },
    }
}

fn exec(command: Command) -> Result<CmdOutcome, Error> {
    match command {
        Command::Validate { file } => {
            let sys = SepSystem::load(&file)?;
            let violations = sys.validate();
            if violations.is_empty() {
                Ok(CmdOutcome {
                    exit_code: 0,
                    report: format!(
                        "ok: {} states, {} experiments, table complete\n",
                        sys.states().len(),
                        sys.base().len()
                    ),
                })
            } else {
                let mut report = format!("invalid: {} problem(s)\n", violations.len());
                for v in &violations {
                    writeln!(report, "  - {v}").unwrap();
                }
                Ok(CmdOutcome { exit_code: 1, report })
            }
        }

        Command::DeriveSp { file, epsilon, dot, format } => {
            let sys = SepSystem::load(&file)?;
            let (sp, warnings) = match epsilon {
                None => (derive_property_system(&sys)?, Vec::new()),
                Some(text) => {
                    let eps = parse_rational(&text)?;
                    if !in_unit_interval(&eps) {
                        return Err(Error::OutOfUnitInterval {
                            what: "epsilon",
                            value: eps,
                        });
                    }
                    let target = UnitIntervalSet::interval(one() - eps, one())?;
                    derive_property_system_with(&sys, &target)?
                }
            };
            let mut report = match format {
                DeriveFormat::Text => sp.report(),
                DeriveFormat::Dot => sp.lattice().to_dot(),
            };
            for w in &warnings {
                match format {
                    DeriveFormat::Text => writeln!(report, "warning: {w}").unwrap(),
                    DeriveFormat::Dot => writeln!(report, "// warning: {w}").unwrap(),
                }
            }
            if let Some(path) = dot {
                fs::write(&path, sp.lattice().to_dot())?;
                if format == DeriveFormat::Text {
                    writeln!(report, "wrote Hasse diagram to {}", path.display()).unwrap();
                }
            }
            Ok(CmdOutcome {
                exit_code: if warnings.is_empty() { 0 } else { 1 },
                report,
            })
        }

        Command::Simulate {
            file,
            term,
            state,
            seed,
            sessions,
            trials,
            delta,
            csv,
            format,
        } => {
            let sys = SepSystem::load(&file)?;
            let term = ExperimentTerm::parse(&term)?;
            let state = sys
                .state_ref(&state)
                .ok_or(Error::UnknownState { id: state })?
                .clone();
            let policy = SimulationPolicy::new(seed);
            let report =
                recover_subset(&sys, &term, &state, &policy, sessions, trials, delta)?;
            let mut text = match format {
                SimFormat::Text => format!("{report}\n"),
                SimFormat::Csv => report.to_csv(),
            };
            if let Some(path) = csv {
                fs::write(&path, report.to_csv())?;
                if format == SimFormat::Text {
                    writeln!(text, "wrote per-session rows to {}", path.display()).unwrap();
                }
            }
            Ok(CmdOutcome { exit_code: if report.pass() { 0 } else { 1 }, report: text })
        }

        Command::CheckMorphism { src, dst, morphism } => {
            let src = SepSystem::load(&src)?;
            let dst = SepSystem::load(&dst)?;
            let phi = SepMorphism::load(&morphism)?;
            let violations = validate_sep_morphism(&src, &dst, &phi)?;
            if !violations.is_empty() {
                let mut report = format!("unlawful: {} problem(s)\n", violations.len());
                for v in &violations {
                    writeln!(report, "  - {v}").unwrap();
                }
                return Ok(CmdOutcome { exit_code: 1, report });
            }
            let sp_src = derive_property_system(&src)?;
            let sp_dst = derive_property_system(&dst)?;
            let n = derive_sp_morphism(&phi, &sp_src, &sp_dst)?;
            let sp_violations = validate_sp_morphism(&sp_src, &sp_dst, &n);
            let mut report = String::from("lawful: probability is preserved\n");
            writeln!(report, "state images:").unwrap();
            for p in sp_src.states() {
                writeln!(report, "  {p} -> {}", n.state_image(p).unwrap()).unwrap();
            }
            writeln!(report, "property pull-backs (destination -> source):").unwrap();
            for (id, e) in sp_dst.lattice().elements().iter().enumerate() {
                let img = n.class_image(id).unwrap();
                writeln!(
                    report,
                    "  {} -> {}",
                    e.representative,
                    sp_src.lattice().element(img).representative
                )
                .unwrap();
            }
            if sp_violations.is_empty() {
                writeln!(report, "derived property action satisfies the lattice laws")
                    .unwrap();
                Ok(CmdOutcome { exit_code: 0, report })
            } else {
                for v in &sp_violations {
                    writeln!(report, "  - {v}").unwrap();
                }
                Ok(CmdOutcome { exit_code: 1, report })
            }
        }
    }
}
