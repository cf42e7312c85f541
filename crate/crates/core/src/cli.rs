//! Command-line front end.
//!
//! Every command writes its result to a string so the binary stays a thin
//! shell around [`run`]. Exit status is 0 on success (or a satisfied
//! `check`), 1 for an unsatisfied `check` or an empty partial instantiation,
//! and 2 for any error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::io::{self, IoError, Model};
use crate::maxplus::{self, MaxPlusError, MaxPlusMatrix};
use crate::mdp::{self, Mdp, MdpError};
use crate::param::{Constraint, Instantiation, LinearTerm, ParamError, ParamSet, Rational};

pub const ORACLE_CAP_ENV: &str = "POLYPOL_ORACLE_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "polypol",
    version,
    about = "Optimal policies and their robustness constraints for parametric MDPs and max-plus systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a model at a full instantiation.
    Solve {
        model: PathBuf,
        /// Parameter values, `name=value,...` or `@file`.
        #[arg(long)]
        pi: Option<String>,
        /// Also print values as decimals.
        #[arg(long)]
        decimal: bool,
        /// Cross-check the result against exhaustive enumeration.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Derive a constraint under which the reference-optimal policy stays optimal.
    Inverse {
        model: PathBuf,
        /// Reference instantiation, `name=value,...` or `@file`.
        #[arg(long)]
        pi0: String,
        /// Also list the inequalities before simplification.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Test whether an instantiation satisfies a constraint file.
    Check {
        constraint: PathBuf,
        #[arg(long)]
        pi: String,
    },
    /// Substitute some parameters into a constraint file.
    Instantiate {
        constraint: PathBuf,
        #[arg(long)]
        pi: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Normalize and simplify a constraint file.
    Simplify {
        constraint: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: IoError },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    MaxPlus(#[from] MaxPlusError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("missing values for parameters: {}", .0.join(", "))]
    Incomplete(Vec<String>),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid {ORACLE_CAP_ENV}: `{0}`")]
    OracleCap(String),
}

/// What a command produced: the text to emit and the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub status: u8,
    pub output: Option<PathBuf>,
}

impl Outcome {
    fn ok(text: String, output: Option<PathBuf>) -> Self {
        Outcome {
            text,
            status: 0,
            output,
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn load_model(path: &std::path::Path) -> Result<Model, CliError> {
    io::parse_model(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

fn load_constraint(path: &std::path::Path) -> Result<(ParamSet, Constraint), CliError> {
    io::parse_constraint(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

/// Inline `name=value` pairs, or `@path` to read them from a file.
fn load_instantiation(arg: &str, params: &ParamSet) -> Result<Instantiation, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => io::parse_instantiation(&read(path.as_ref())?, params).map_err(|source| CliError::Format {
            path: path.to_string(),
            source,
        }),
        None => Ok(io::parse_instantiation(arg, params)?),
    }
}

fn require_total(pi: &Instantiation, params: &ParamSet) -> Result<(), CliError> {
    let missing: Vec<String> = params
        .ids()
        .filter(|&p| pi.get(p).is_none())
        .map(|p| params.name(p).to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Incomplete(missing))
    }
}

fn oracle_cap(default: usize) -> Result<usize, CliError> {
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::OracleCap(v)),
        Err(_) => Ok(default),
    }
}

fn number(r: &Rational, decimal: bool) -> String {
    if decimal && !r.is_integer() {
        format!("{r} (~{})", io::decimal(r, 6))
    } else {
        r.to_string()
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Solve {
            model,
            pi,
            decimal,
            verify,
            out,
        } => {
            let model = load_model(&model)?;
            let pi = match pi {
                Some(arg) => load_instantiation(&arg, model.params())?,
                None => Instantiation::new(),
            };
            require_total(&pi, model.params())?;
            let text = match &model {
                Model::Pmdp(m) => solve_mdp(&mdp::instantiate(m, &pi)?, decimal, verify)?,
                Model::Pdwg(m) => solve_maxplus(&maxplus::instantiate(m, &pi)?, decimal, verify)?,
            };
            Ok(Outcome::ok(text, out.output))
        }
        Command::Inverse { model, pi0, raw, out } => {
            let model = load_model(&model)?;
            let pi0 = load_instantiation(&pi0, model.params())?;
            require_total(&pi0, model.params())?;
            let text = match &model {
                Model::Pmdp(m) => inverse_mdp(m, &pi0, raw)?,
                Model::Pdwg(m) => inverse_maxplus(m, &pi0, raw)?,
            };
            Ok(Outcome::ok(text, out.output))
        }
        Command::Check { constraint, pi } => {
            let (params, k) = load_constraint(&constraint)?;
            let pi = load_instantiation(&pi, &params)?;
            let mut missing: Vec<_> = k.params().filter(|&p| pi.get(p).is_none()).collect();
            missing.sort();
            missing.dedup();
            if !missing.is_empty() {
                return Err(CliError::Incomplete(
                    missing.into_iter().map(|p| params.name(p).to_string()).collect(),
                ));
            }
            let holds = k.satisfies(&pi)?;
            Ok(Outcome {
                text: if holds { "satisfied\n" } else { "not satisfied\n" }.to_string(),
                status: if holds { 0 } else { 1 },
                output: None,
            })
        }
        Command::Instantiate { constraint, pi, out } => {
            let (params, k) = load_constraint(&constraint)?;
            let pi = load_instantiation(&pi, &params)?;
            match k.partial_instantiate(&pi) {
                Ok(rest) => {
                    let (kept, rest) = restrict(&rest, &params, &pi);
                    Ok(Outcome::ok(io::render_constraint(&rest, &kept), out.output))
                }
                Err(ParamError::Contradiction) => Ok(Outcome {
                    text: "unsatisfiable\n".to_string(),
                    status: 1,
                    output: out.output,
                }),
                Err(e) => Err(e.into()),
            }
        }
        Command::Simplify { constraint, out } => {
            let (params, k) = load_constraint(&constraint)?;
            Ok(Outcome::ok(io::render_constraint(&k, &params), out.output))
        }
    }
}

/// Re-indexes `k` over the parameters that `pi` leaves free.
fn restrict(k: &Constraint, params: &ParamSet, pi: &Instantiation) -> (ParamSet, Constraint) {
    let mut kept = ParamSet::default();
    let mut map = std::collections::BTreeMap::new();
    for p in params.ids().filter(|&p| pi.get(p).is_none()) {
        map.insert(p, kept.intern(params.name(p)));
    }
    let remap = |t: &LinearTerm| {
        LinearTerm::from_parts(t.coeffs().map(|(p, c)| (map[&p], c.clone())), t.constant_part().clone())
    };
    let inequalities = k
        .iter()
        .map(|i| crate::param::Inequality::new(remap(&i.lhs), i.rel, remap(&i.rhs)));
    let k = crate::param::simplify(inequalities).expect("re-indexing preserves satisfiability");
    (kept, k)
}

fn solve_mdp(m: &Mdp<Rational>, decimal: bool, verify: bool) -> Result<String, CliError> {
    let (mu, values) = mdp::mdp_pi(m)?;
    let mut out = String::new();
    writeln!(out, "policy: {}", m.policy_display(&mu)).unwrap();
    for (s, v) in values.iter().enumerate() {
        writeln!(out, "value {} = {}", m.states()[s], number(v, decimal)).unwrap();
    }
    if verify {
        let (best, _) = mdp::brute_force_optimal(m, oracle_cap(mdp::DEFAULT_POLICY_CAP)?)?;
        if best != values {
            return Err(CliError::Verification(
                "policy iteration disagrees with exhaustive policy enumeration".into(),
            ));
        }
        out.push_str("verified: exhaustive policy enumeration agrees\n");
    }
    Ok(out)
}

fn solve_maxplus(m: &MaxPlusMatrix<Rational>, decimal: bool, verify: bool) -> Result<String, CliError> {
    let (em, mu) = maxplus::max_pi(m, m.first_policy())?;
    let mut out = String::new();
    let names = m.states();
    let policy: Vec<String> = mu
        .successor
        .iter()
        .enumerate()
        .map(|(i, &j)| format!("{}->{}", names[i], names[j]))
        .collect();
    writeln!(out, "policy: {}", policy.join(", ")).unwrap();
    for (i, name) in names.iter().enumerate() {
        writeln!(
            out,
            "state {name}: eta = {}, x = {}",
            number(&em.eta[i], decimal),
            number(&em.x[i], decimal)
        )
        .unwrap();
    }
    if verify {
        let (best, _) = maxplus::brute_force_mcm(m, oracle_cap(maxplus::DEFAULT_CIRCUIT_CAP)?)?;
        let top = em.eta.iter().max().expect("nonempty matrix");
        if *top != best {
            return Err(CliError::Verification(format!(
                "largest growth rate {top} differs from maximal circuit mean {best}"
            )));
        }
        out.push_str("verified: maximal circuit mean agrees\n");
    }
    Ok(out)
}

fn inverse_mdp(m: &mdp::Pmdp, pi0: &Instantiation, raw: bool) -> Result<String, CliError> {
    let inv = mdp::p_mdp_pi(m, pi0)?;
    let params = m.params();
    let mut out = String::new();
    writeln!(out, "# policy: {}", m.policy_display(&inv.policy)).unwrap();
    for (s, v) in inv.values.iter().enumerate() {
        writeln!(out, "# value {} = {}", m.states()[s], v.display(params)).unwrap();
    }
    if raw {
        for ineq in &inv.raw {
            writeln!(out, "# raw: {}", ineq.display(params)).unwrap();
        }
    }
    out.push_str(&io::render_constraint(&inv.constraint, params));
    Ok(out)
}

fn inverse_maxplus(m: &maxplus::PMaxPlusMatrix, pi0: &Instantiation, raw: bool) -> Result<String, CliError> {
    let inv = maxplus::p_max_pi(m, pi0)?;
    let params = m.params();
    let names = m.states();
    let mut out = String::new();
    let policy: Vec<String> = inv
        .policy
        .successor
        .iter()
        .enumerate()
        .map(|(i, &j)| format!("{}->{}", names[i], names[j]))
        .collect();
    writeln!(out, "# policy: {}", policy.join(", ")).unwrap();
    for (i, name) in names.iter().enumerate() {
        writeln!(
            out,
            "# state {name}: eta = {}, x = {}",
            inv.param_eigenmode.eta[i].display(params),
            inv.param_eigenmode.x[i].display(params)
        )
        .unwrap();
    }
    if raw {
        for g in &inv.raw {
            let (i, j) = g.edge;
            writeln!(
                out,
                "# raw ({}, {}): {}",
                names[i],
                names[j],
                g.inequality.display(params)
            )
            .unwrap();
        }
    }
    out.push_str(&io::render_constraint(&inv.constraint, params));
    Ok(out)
}
