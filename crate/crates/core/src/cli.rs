//! Command-line front end: `sample`, `limit`, `rate`, `chi` and `verify`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::sample_pair;
use crate::error::{Error, Result};
use crate::harness::{run_suite, SuiteConfig};
use crate::limits::minimizer_for;
use crate::rate::{free_entropy, rate_contracted, ExtReal};
use crate::rng::RngStream;
use crate::spectra::{spectrum, CatalogFunction, SpectralMeasure};
use crate::tolerance;
use crate::tracial::TracialState;

/// Exit status for a failed verification.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Exit status for malformed invocations and unreadable inputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "twoproj",
    version,
    about = "Random projection pairs: spectra, limit laws and rate functions"
)]
pub struct Cli {
    /// Worker threads for sampling (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample h(P, Q) and write its sorted spectrum, one row per sample.
    Sample(SampleArgs),
    /// Export the limit law of h(p, q) for free projections.
    Limit(LimitArgs),
    /// Evaluate the rate function of a measure stored as JSON.
    Rate(RateArgs),
    /// Free entropy of a tracial state stored as JSON.
    Chi(ChiArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// Catalog function: pqp, anticommutator, linear, unitary.
    #[arg(long = "fn", default_value = "pqp")]
    pub function: String,
    /// Coefficient of P for `linear`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Coefficient of Q for `linear`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
}

impl FunctionArgs {
    fn resolve(&self) -> Result<CatalogFunction> {
        let coeffs = match (self.a, self.b) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(Error::param("give both --a and --b")),
        };
        CatalogFunction::parse(&self.function, coeffs)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Matrix dimension.
    #[arg(long = "N", short = 'N', alias = "n")]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// Trace of P; sets k = round(alpha N).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Trace of Q; sets l = round(beta N).
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, env = "TWOPROJ_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Number of density grid points.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Law JSON output (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional `x,density` CSV of the grid.
    #[arg(long)]
    pub grid_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Measure JSON: {"atoms": [[x, m]], "cloud": [...], "cloud_mass": m}.
    #[arg(long)]
    pub measure: PathBuf,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    /// Tracial state JSON: {"a11", "a10", "a01", "a00", "mu"}.
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, env = "TWOPROJ_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Suite size overrides as JSON (missing fields keep their defaults).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report JSON output (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric { .. } | Error::Extraction { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Runs a parsed command; `Ok` carries the exit status.
pub fn dispatch(cli: &Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::param("--threads must be positive"));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match &cli.command {
        Command::Sample(args) => sample(args),
        Command::Limit(args) => limit(args),
        Command::Rate(args) => rate(args),
        Command::Chi(args) => chi(args),
        Command::Verify(args) => verify(args),
    }
}

/// Realized ranks plus a note on how they were obtained.
fn resolve_ranks(args: &SampleArgs) -> Result<(usize, usize, String)> {
    let n = args.n;
    match (args.k, args.l, args.alpha, args.beta) {
        (Some(k), Some(l), None, None) => Ok((k, l, "ranks=given".to_string())),
        (None, None, Some(alpha), Some(beta)) => {
            if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
                return Err(Error::param("alpha and beta must lie in [0, 1]"));
            }
            let k = (alpha * n as f64).round() as usize;
            let l = (beta * n as f64).round() as usize;
            Ok((
                k,
                l,
                format!("ranks=round(alpha*N),round(beta*N) alpha={alpha} beta={beta}"),
            ))
        }
        _ => Err(Error::param(
            "give exactly one of (--k, --l) or (--alpha, --beta)",
        )),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Shortest round-trip text of a float, with an exponent for tiny or huge
/// magnitudes (same formatting as the JSON outputs).
pub fn format_float(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_float(v))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Serialize)]
struct SampleFile<'a> {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    l: usize,
    function: CatalogFunction,
    seed: u64,
    ranks: &'a str,
    samples: Vec<Vec<f64>>,
}

fn sample(args: &SampleArgs) -> Result<i32> {
    let h = args.function.resolve()?;
    let (k, l, note) = resolve_ranks(args)?;
    let n = args.n;
    let rows: Vec<Vec<f64>> = (0..args.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(args.seed, i).rng();
            let pair = sample_pair(n, k, l, &mut rng)?;
            spectrum(&pair, h, tolerance::ATOM)
        })
        .collect::<Result<_>>()?;
    let text = match args.format {
        Format::Csv => {
            let mut out = format!(
                "# twoproj sample N={n} k={k} l={l} fn={h} samples={} seed={} {note}\n",
                args.samples, args.seed
            );
            for row in &rows {
                out.push_str(&csv_row(row));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let file = SampleFile {
                n,
                k,
                l,
                function: h,
                seed: args.seed,
                ranks: &note,
                samples: rows,
            };
            serde_json::to_string(&file)? + "\n"
        }
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(0)
}

fn limit(args: &LimitArgs) -> Result<i32> {
    let h = args.function.resolve()?;
    let law = minimizer_for(h, args.alpha, args.beta)?;
    let export = law.export(args.grid);
    if let Some(path) = &args.grid_csv {
        let mut csv = String::from("x,density\n");
        for (x, d) in export.grid.iter().zip(&export.density_values) {
            let _ = writeln!(csv, "{},{}", format_float(*x), format_float(*d));
        }
        fs::write(path, csv)?;
    }
    let text = serde_json::to_string(&export)? + "\n";
    write_output(args.output.as_deref(), &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct RateOut {
    rate: ExtReal,
}

fn rate(args: &RateArgs) -> Result<i32> {
    let h = args.function.resolve()?;
    let measure: SpectralMeasure = serde_json::from_str(&fs::read_to_string(&args.measure)?)?;
    let value = rate_contracted(&measure, h, args.alpha, args.beta)?;
    println!("{}", serde_json::to_string(&RateOut { rate: value })?);
    Ok(0)
}

#[derive(Serialize)]
struct ChiOut {
    chi: ExtReal,
}

fn chi(args: &ChiArgs) -> Result<i32> {
    let state: TracialState = serde_json::from_str(&fs::read_to_string(&args.state)?)?;
    println!(
        "{}",
        serde_json::to_string(&ChiOut {
            chi: free_entropy(&state)
        })?
    );
    Ok(0)
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let config: SuiteConfig = match &args.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => SuiteConfig::default(),
    };
    let report = run_suite(&args.suite, &config, args.seed)?;
    for c in &report.checks {
        eprintln!(
            "{} {}: {} (threshold {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            format_float(c.statistic),
            format_float(c.threshold)
        );
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    write_output(args.report.as_deref(), &text)?;
    Ok(if report.pass { 0 } else { EXIT_VERIFY_FAILED })
}
