//! The `sumdiff` command line: argument parsing and the five subcommands.
//!
//! Every subcommand writes its report to the given writer (or to `--out`)
//! and returns the process exit code. Diagnostics go to standard error.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use sumdiff_core::blowup::sweep_csv;
use sumdiff_core::constructions::{self, ConstructionRow};
use sumdiff_core::numfmt::round_sig;
use sumdiff_core::{
    convergence_sweep, entropy_ratio, enumerate_and_rank, maximize_alpha, BlowupOptions,
    Configuration, Error, Measure, OptimizerOptions, SearchSpec, SymmetryAnsatz,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_THRESHOLD: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sumdiff",
    version,
    about = "Entropy counterexamples to sums-differences statements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy profile of a measure on a configuration.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Rebuild the four reference constructions and check their thresholds.
    Constructions {
        /// Evaluate the stored reference measures instead of solving.
        #[arg(long)]
        no_opt: bool,
        /// Slack below each threshold; defaults to half a unit in its last
        /// stated digit.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        search: SearchFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Maximize α over measures on a configuration.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        ansatz: Option<PathBuf>,
        /// JSON optimizer options; --seed and --starts override it.
        #[arg(long)]
        options: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Multinomial blow-up sweep as CSV.
    Blowup {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Comma-separated denominators, e.g. 3,30,300.
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Enumerate grid configurations and rank them by optimized α.
    Search {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        budget: Option<u128>,
        #[command(flatten)]
        search: SearchFlags,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct SearchFlags {
    /// Seed for the random starts (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
}

impl SearchFlags {
    fn apply(&self, opts: &mut OptimizerOptions) {
        if let Some(seed) = self.seed {
            opts.seed = seed;
        }
        if let Some(starts) = self.starts {
            opts.starts = starts;
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: String) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// A measure file is either `{"weights": [...]}` or a bare array.
fn load_measure(path: &Path) -> Result<Measure, Failure> {
    let text = read(path)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let parsed = match value {
        Value::Array(_) => serde_json::from_value::<Vec<f64>>(value)
            .map_err(|e| e.to_string())
            .and_then(|w| Measure::new(w).map_err(|e| e.to_string())),
        other => serde_json::from_value::<Measure>(other).map_err(|e| e.to_string()),
    };
    parsed.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn check_dimensions(c: &Configuration, m: &Measure) -> Result<(), Failure> {
    if c.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: m.len(),
        }
        .into());
    }
    Ok(())
}

/// Rounds every float in a JSON tree to the report precision.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    round_floats(&mut v);
    if pretty {
        serde_json::to_string_pretty(&v)
    } else {
        serde_json::to_string(&v)
    }
    .expect("reports serialize")
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_INVALID,
        message: format!("write failed: {e}"),
    };
    match &output.out {
        Some(path) => fs::write(path, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

#[derive(Serialize)]
struct ConstructionReport<'a> {
    rows: &'a [ConstructionRow],
    passed: bool,
}

/// Runs one parsed command, returning the exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            f.code
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, Failure> {
    match cmd {
        Command::Verify {
            config,
            measure,
            output,
        } => {
            let c: Configuration = parse_json(&config)?;
            let m = load_measure(&measure)?;
            check_dimensions(&c, &m)?;
            let profile = entropy_ratio(&c, &m)?;
            emit(&output, &(to_json(&profile, true) + "\n"), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Constructions {
            no_opt,
            tol,
            search,
            output,
        } => {
            let mut opts = OptimizerOptions::default();
            search.apply(&mut opts);
            let rows = constructions::reproduce(!no_opt, tol, &opts)?;
            let passed = rows.iter().all(|r| r.passed);
            let report = ConstructionReport {
                rows: &rows,
                passed,
            };
            emit(&output, &(to_json(&report, true) + "\n"), stdout)?;
            for r in rows.iter().filter(|r| !r.passed) {
                let _ = writeln!(
                    stderr,
                    "threshold failed: {} alpha {} does not exceed {} - {}",
                    r.construction.name(),
                    sumdiff_core::numfmt::format_sig(r.alpha),
                    r.threshold,
                    r.tolerance
                );
            }
            Ok(if passed { EXIT_OK } else { EXIT_THRESHOLD })
        }
        Command::Optimize {
            config,
            ansatz,
            options,
            search,
            output,
        } => {
            let c: Configuration = parse_json(&config)?;
            let ansatz: Option<SymmetryAnsatz> = ansatz.as_deref().map(parse_json).transpose()?;
            let mut opts: OptimizerOptions = match options {
                Some(p) => parse_json(&p)?,
                None => OptimizerOptions::default(),
            };
            search.apply(&mut opts);
            let result = maximize_alpha(&c, ansatz.as_ref(), &opts)?;
            emit(&output, &(to_json(&result, true) + "\n"), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Blowup {
            config,
            measure,
            m,
            output,
        } => {
            let c: Configuration = parse_json(&config)?;
            let p = load_measure(&measure)?;
            check_dimensions(&c, &p)?;
            let reports = convergence_sweep(&c, &p, &m, BlowupOptions::default())?;
            emit(&output, &sweep_csv(c.slopes(), &reports), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Search {
            spec,
            budget,
            search,
            output,
        } => {
            let mut spec: SearchSpec = parse_json(&spec)?;
            if let Some(b) = budget {
                spec.budget = b;
            }
            search.apply(&mut spec.optimizer);
            let ranked = enumerate_and_rank(&spec)?;
            let mut text = String::new();
            for entry in &ranked.entries {
                text.push_str(&to_json(entry, false));
                text.push('\n');
            }
            emit(&output, &text, stdout)?;
            Ok(EXIT_OK)
        }
    }
}
