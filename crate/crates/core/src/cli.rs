//! Command-line front end. Every subcommand writes JSON to stdout (or a
//! plain-text table with `--pretty`); diagnostics go to stderr.
//!
//! Exit codes: 0 success or pass, 3 verification failure or
//! non-convergence, 2 input or validation error.

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::algebra::{ExtensionSpec, DEFAULT_JACOBI_TOLERANCE};
use crate::catalog;
use crate::curvature::curvature_report;
use crate::error::{Error, Result};
use crate::exact::parse_rational;
use crate::io::{parse_spec, AlgebraDoc};
use crate::solver::{search, PatternChoice, SearchProblem, DEFAULT_JACOBI_WEIGHT};
use crate::spectral::{enumerate_types, EnumerationOptions, SpectralVector, DEFAULT_DIMENSION_CAP};
use crate::verifier::{classify_type_0001, classify_type_1110, classify_type_1112, verify_extension};

/// Name of the environment variable holding the default tolerance.
pub const TOLERANCE_ENV: &str = "DEXT_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dext", version, about = "Einstein rank-one extensions of metric Lie algebras")]
pub struct Cli {
    /// Render a plain-text table instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write the result to a file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the admissible eigenvalue types in a given dimension.
    Enumerate {
        #[arg(long)]
        dim: usize,
        /// Also apply the cone condition and report both sets.
        #[arg(long)]
        cone_filter: bool,
        /// Largest dimension accepted.
        #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
        cap: usize,
    },
    /// Check whether the extension is Einstein.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, env = TOLERANCE_ENV, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run one of the structural classifiers.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "type", value_enum)]
        kind: ClassifierKind,
        #[arg(long, env = TOLERANCE_ENV, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Grouped Ricci, scalar curvature and extension Ricci data.
    Curvature {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Emit catalog specs as algebra JSON.
    Catalog {
        /// All entries.
        #[arg(long, conflicts_with_all = ["name", "counterexample"])]
        list: bool,
        /// One entry, e.g. `table1:4:2` or `heisenberg:3`.
        #[arg(long)]
        name: Option<String>,
        /// Diagnostics of the zero-trace six-dimensional spectral vector.
        #[arg(long)]
        counterexample: bool,
    },
    /// Search numerically for structure constants of a given type.
    Search {
        /// Comma-separated eigenvalues, e.g. `1,1,2`.
        #[arg(long)]
        spectral: String,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = TOLERANCE_ENV, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = PatternArg::Auto)]
        pattern: PatternArg,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_JACOBI_WEIGHT)]
        jacobi_weight: f64,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Algebra JSON file (`-` for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inline algebra JSON.
    #[arg(long)]
    pub json: Option<String>,
    /// Catalog entry name.
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClassifierKind {
    #[value(name = "0001")]
    Type0001,
    #[value(name = "1110")]
    Type1110,
    #[value(name = "1112")]
    Type1112,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PatternArg {
    Auto,
    Full,
}

/// Rendered output and whether the run counts as a pass.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_OK
        } else {
            EXIT_FAIL
        }
    }
}

fn load(input: &InputArgs) -> Result<ExtensionSpec> {
    let spec = if let Some(path) = &input.input {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            fs::read_to_string(path)?
        };
        parse_spec(&text)?
    } else if let Some(text) = &input.json {
        parse_spec(text)?
    } else if let Some(name) = &input.catalog {
        catalog::lookup(name)?.spec
    } else {
        return Err(Error::Parse("no input given".into()));
    };
    spec.validate(DEFAULT_JACOBI_TOLERANCE)?;
    Ok(spec)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

fn parse_spectral(text: &str) -> Result<SpectralVector> {
    let entries = text.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    SpectralVector::new(entries)
}

fn list_types(types: &std::collections::BTreeSet<SpectralVector>) -> String {
    types.iter().map(|p| format!("  {p}\n")).collect()
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let pretty = cli.pretty;
    match &cli.command {
        Command::Enumerate { dim, cone_filter, cap } => {
            let e = enumerate_types(*dim, EnumerationOptions { cap: *cap, cone_filter: *cone_filter })?;
            let unfiltered: Vec<_> = e.unfiltered.keys().cloned().collect();
            let text = match (&e.filtered, pretty) {
                (None, false) => to_json(&unfiltered)?,
                (Some(f), false) => to_json(&json!({
                    "filtered": f,
                    "unfiltered": unfiltered,
                    "removed": e.discrepancy(),
                }))?,
                (None, true) => format!("dimension {dim}: {} types\n{}", unfiltered.len(), list_types(&e.types())),
                (Some(f), true) => format!(
                    "dimension {dim}: {} types, {} after the cone filter\n{}removed:\n{}",
                    unfiltered.len(),
                    f.len(),
                    list_types(f),
                    list_types(&e.discrepancy())
                ),
            };
            Ok(Outcome { text, pass: true })
        }
        Command::Verify { input, tol } => {
            let spec = load(input)?;
            let report = verify_extension(&spec, *tol)?;
            let text = if pretty {
                let mut s = format!(
                    "einstein: {}\nconstant: {}\n",
                    report.einstein,
                    report.einstein_constant.map_or("-".into(), |c| c.to_string())
                );
                for (k, v) in &report.residuals {
                    s += &format!("  {k:<22} {v:.3e}\n");
                }
                s
            } else {
                to_json(&report)?
            };
            Ok(Outcome { text, pass: report.einstein })
        }
        Command::Classify { input, kind, tol } => {
            let spec = load(input)?;
            let report = match kind {
                ClassifierKind::Type0001 => classify_type_0001(&spec, *tol)?,
                ClassifierKind::Type1110 => classify_type_1110(&spec, *tol)?,
                ClassifierKind::Type1112 => classify_type_1112(&spec, *tol)?,
            };
            let text = if pretty {
                let mut s = format!("{}: {}\n{}\n", report.classifier, report.passed, report.verdict);
                for c in &report.checks {
                    s += &format!("  [{}] {:<40} {:.3e}\n", if c.passed { "ok" } else { "!!" }, c.name, c.value);
                }
                s
            } else {
                to_json(&report)?
            };
            Ok(Outcome { text, pass: report.passed })
        }
        Command::Curvature { input } => {
            let spec = load(input)?;
            let report = curvature_report(&spec)?;
            let text = if pretty { serde_json::to_string_pretty(&report)? } else { to_json(&report)? };
            Ok(Outcome { text, pass: true })
        }
        Command::Catalog { list, name, counterexample } => {
            let text = if *counterexample {
                let d = catalog::diagnose(&catalog::counterexample_p6())?;
                if pretty { serde_json::to_string_pretty(&d)? } else { to_json(&d)? }
            } else if let Some(name) = name {
                let e = catalog::lookup(name)?;
                let doc = AlgebraDoc::from_spec(&e.spec, Some(&e.name));
                if pretty { serde_json::to_string_pretty(&doc)? } else { to_json(&doc)? }
            } else if *list {
                let docs: Vec<AlgebraDoc> =
                    catalog::entries().iter().map(|e| AlgebraDoc::from_spec(&e.spec, Some(&e.name))).collect();
                if pretty {
                    docs.iter()
                        .map(|d| format!("{:<16} dim {}\n", d.name.as_deref().unwrap_or(""), d.dim))
                        .collect()
                } else {
                    to_json(&docs)?
                }
            } else {
                return Err(Error::Parse("catalog needs --list, --name or --counterexample".into()));
            };
            Ok(Outcome { text, pass: true })
        }
        Command::Search { spectral, restarts, seed, tol, pattern, max_iter, jacobi_weight } => {
            let p = parse_spectral(spectral)?;
            let choice = match pattern {
                PatternArg::Auto => PatternChoice::Auto,
                PatternArg::Full => PatternChoice::Full,
            };
            let mut problem = SearchProblem::new(p.clone()).with_pattern(choice);
            problem.restarts = *restarts;
            problem.seed = *seed;
            problem.tolerance = *tol;
            problem.max_iterations = *max_iter;
            problem.jacobi_weight = *jacobi_weight;
            let result = search(&problem)?;
            let spec = ExtensionSpec::from_spectral(result.best_mu.clone(), &p)?;
            let doc = AlgebraDoc::from_spec(&spec, None);
            let text = if pretty {
                let mut s = format!("converged: {}\nresidual: {:.3e}\n", result.converged, result.residual);
                for (i, j, k, v) in result.best_mu.nonzeros() {
                    s += &format!("  mu_{{{}{}|{}}} = {v:.9}\n", i + 1, j + 1, k + 1);
                }
                s
            } else {
                to_json(&json!({
                    "converged": result.converged,
                    "residual": result.residual,
                    "best_mu": doc,
                    "trace": result.trace,
                }))?
            };
            Ok(Outcome { text, pass: result.converged })
        }
    }
}

/// Runs the CLI on parsed arguments, writing output and returning the exit
/// code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            let mut text = outcome.text.clone();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            let written = match &cli.output {
                Some(path) => fs::write(path, &text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.exit_code(),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
