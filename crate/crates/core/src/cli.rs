//! Command-line front end.
//!
//! Subcommands print one JSON document on stdout; failures print a single
//! `error[<kind>]: <reason>` line on stderr and exit with a stable code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (including an `Unclassified` analysis) |
//! | 2 | unreadable or invalid input |
//! | 3 | enumeration cap exceeded |
//! | 4 | non-coercive loss |
//! | 5 | analysis failure |
//! | 6 | simulation failure |

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{analyze, AnalysisSettings};
use crate::config::{load_data, load_json, ConfigError, ProblemFile, DEFAULT_SEED};
use crate::estimator::{argmin_interval, kernel_sample_with_cap, EstimatorError, Policy, DEFAULT_CAP};
use crate::montecarlo::{run, SimConfig, SimError};
use crate::population::SMIRNOV_EPS_MAX;
use crate::problem::{KERNEL_IDS, LOSS_IDS};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_NON_COERCIVE: i32 = 4;
pub const EXIT_ANALYSIS: i32 = 5;
pub const EXIT_SIMULATION: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "uminimizer", version, about = "Minimizers of convex U-processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimizer interval of a dataset.
    Estimate(EstimateArgs),
    /// Population analysis: m, zeta, attraction class, a_n, limit law.
    Analyze(AnalyzeArgs),
    /// Monte Carlo check of the limit law.
    Simulate(SimulateArgs),
    /// List losses, kernels, distributions, policies and defaults.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Problem JSON (loss and kernel).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV data, one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub policy: Option<Policy>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report JSON; the `(t, V(m+t))` trace goes next to it as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for nested Monte Carlo estimates of zeta.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Depth of the ratio-test grid.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Result JSON; the residual CSV goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub policy: Option<Policy>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: exit code, machine-readable kind, message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl ToString) -> Self {
        Failure { code, kind, message: message.to_string().replace('\n', " ") }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let kind = match e {
            ConfigError::Io { .. } => "io",
            ConfigError::Analysis(_) => "problem",
            _ => "parse",
        };
        Failure::new(EXIT_INPUT, kind, e)
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::CapExceeded { .. } => Failure::new(EXIT_CAP, "cap_exceeded", e),
            EstimatorError::NonCoercive(_) => Failure::new(EXIT_NON_COERCIVE, "non_coercive", e),
            _ => Failure::new(EXIT_INPUT, "data", e),
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<String, Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(EXIT_INPUT, "serialize", e))?;
    if let Some(p) = out {
        std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::new(EXIT_INPUT, "io", format!("{}: {e}", p.display())))?;
    }
    Ok(text)
}

fn companion_csv(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<String, Failure> {
    let file: ProblemFile = load_json(&a.config)?;
    let data = load_data(&a.data)?;
    let loss = file.problem.loss()?;
    let kernel = file.problem.kernel()?;
    let ks = kernel_sample_with_cap(&data, &kernel, file.cap)?;
    let iv = argmin_interval(&ks, &loss, a.policy.unwrap_or(file.policy))?;
    write_json(&iv, a.out.as_deref())
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<String, Failure> {
    let file: ProblemFile = load_json(&a.config)?;
    let prob = file.problem.population()?;
    let loss = file.problem.loss()?;
    let mut settings = file.analysis.clone();
    if let Some(s) = a.seed {
        settings.zeta_seed = s;
    }
    if let Some(l) = a.levels {
        settings.levels = l;
        settings.escalated_levels = settings.escalated_levels.max(2 * l);
    }
    let report = analyze(&prob, &loss, file.problem.m, &settings)
        .map_err(|e| Failure::new(EXIT_ANALYSIS, "analysis", e))?;
    let text = write_json(&report, a.out.as_deref())?;
    if let Some(out) = &a.out {
        let path = companion_csv(out);
        let io = |e: csv::Error| Failure::new(EXIT_INPUT, "io", format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(["t", "V(m+t)"]).map_err(io)?;
        for (t, v) in report.v_trace() {
            w.write_record([t.to_string(), v.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| io(e.into()))?;
    }
    Ok(text)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String, Failure> {
    let mut cfg: SimConfig = load_json(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(p) = a.policy {
        cfg.policy = p;
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    let res = run(&cfg).map_err(|e| match e {
        SimError::Config(_) | SimError::Problem(_) => Failure::new(EXIT_INPUT, "config", e),
        SimError::Analysis(_) => Failure::new(EXIT_ANALYSIS, "analysis", e),
        _ => Failure::new(EXIT_SIMULATION, "simulation", e),
    })?;
    let text = write_json(&res, a.out.as_deref())?;
    if let Some(out) = &a.out {
        let path = companion_csv(out);
        res.write_csv(&path)
            .map_err(|e| Failure::new(EXIT_INPUT, "io", format!("{}: {e}", path.display())))?;
    }
    eprintln!("ks = {:.6}, runtime = {:.3}s", res.ks, res.runtime_secs);
    Ok(text)
}

#[derive(Serialize)]
struct Catalog {
    losses: &'static [&'static str],
    kernels: &'static [&'static str],
    distributions: Vec<&'static str>,
    raw_models: Vec<&'static str>,
    policies: Vec<Policy>,
    smirnov_eps_max: f64,
    default_seed: u64,
    default_cap: u64,
    analysis_defaults: AnalysisSettings,
    exit_codes: Vec<(i32, &'static str)>,
}

pub fn cmd_catalog(a: &CatalogArgs) -> Result<String, Failure> {
    let c = Catalog {
        losses: LOSS_IDS,
        kernels: KERNEL_IDS,
        distributions: vec!["normal", "cauchy", "exponential", "uniform", "smirnov", "piecewise"],
        raw_models: vec!["iid", "linear_regression"],
        policies: Policy::ALL.to_vec(),
        smirnov_eps_max: SMIRNOV_EPS_MAX,
        default_seed: DEFAULT_SEED,
        default_cap: DEFAULT_CAP,
        analysis_defaults: AnalysisSettings::default(),
        exit_codes: vec![
            (0, "success"),
            (EXIT_INPUT, "unreadable or invalid input"),
            (EXIT_CAP, "enumeration cap exceeded"),
            (EXIT_NON_COERCIVE, "non-coercive loss"),
            (EXIT_ANALYSIS, "analysis failure"),
            (EXIT_SIMULATION, "simulation failure"),
        ],
    };
    write_json(&c, a.out.as_deref())
}

/// Run a parsed command; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Catalog(a) => cmd_catalog(a),
    };
    match res {
        Ok(text) => {
            use std::io::Write;
            // A closed pipe (`| head`) is not an error of the command.
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error[io]: stdout: {e}");
                    EXIT_INPUT
                }
                _ => 0,
            }
        }
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.message);
            f.code
        }
    }
}

pub fn main() -> ! {
    let cli = Cli::parse();
    std::process::exit(execute(&cli))
}
