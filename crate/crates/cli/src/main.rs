//! `acv`: run prediction-error experiments from a JSON config, or run the
//! built-in property suites.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (or a failed check),
//! 2 on a usage or configuration error.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use antithetic_cv::config::RunConfig;
use antithetic_cv::harness::{run_mse_grid, write_csv, GridResult, Scenario};
use antithetic_cv::verify::{run_suite, Suite};
use antithetic_cv::{Error, Execution};
use clap::{Parser, Subcommand};

const WORKERS_ENV: &str = "ACV_WORKERS";

#[derive(Parser)]
#[command(name = "acv", version, about = "Cross-validation with antithetic Gaussian randomization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replication grid described by a config file.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads. Falls back to the config, then to $ACV_WORKERS,
        /// then to one per CPU.
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination. Without it (and without `output` in the config)
        /// the CSV goes to stdout and the summary to stderr.
        #[arg(long, value_name = "CSV")]
        out: Option<PathBuf>,
    },
    /// Run a property suite: sampler, stein, variance, sure, glm or zograd.
    Verify { suite: String },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, workers, out } => cmd_run(config, seed, workers, out),
        Command::Verify { suite } => cmd_verify(&suite),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("{WORKERS_ENV}: expected a positive integer, got {v:?}"))),
        },
    }
}

fn execution(workers: Option<usize>) -> Execution {
    workers.map_or(Execution::Auto, Execution::with_workers)
}

fn cmd_run(path: PathBuf, seed: Option<u64>, workers: Option<usize>, out: Option<PathBuf>) -> Result<ExitCode, Failure> {
    let mut cfg = RunConfig::from_path(&path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    if out.is_some() {
        cfg.output = out;
    }
    if cfg.workers.is_none() {
        cfg.workers = env_workers()?;
    }
    cfg.validate()?;

    let spec = cfg.scenario_spec();
    let result = run_mse_grid(&spec, &cfg.method_specs(), &cfg.grid_options(), execution(cfg.workers))
        .map_err(|e| Failure::Runtime(e.to_string()))?;

    let io_err = |e: io::Error| Failure::Runtime(e.to_string());
    match &cfg.output {
        Some(dest) => {
            let file = std::fs::File::create(dest)
                .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dest.display())))?;
            let mut w = io::BufWriter::new(file);
            write_csv(&result.reports, &mut w).and_then(|_| w.flush()).map_err(io_err)?;
            log::info!("wrote {} rows to {}", result.reports.len(), dest.display());
            print_summary(&mut io::stdout().lock(), spec.scenario, spec.n, &result).map_err(io_err)?;
        }
        None => {
            write_csv(&result.reports, io::stdout().lock()).map_err(io_err)?;
            print_summary(&mut io::stderr().lock(), spec.scenario, spec.n, &result).map_err(io_err)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Methods ranked by MSE, smallest first.
fn print_summary<W: Write>(w: &mut W, scenario: Scenario, n: usize, result: &GridResult) -> io::Result<()> {
    writeln!(
        w,
        "{} (n={n}): oracle prediction error {:.6} ± {:.2e}",
        scenario.label(),
        result.oracle.value,
        result.oracle.stderr
    )?;
    let mut ranked: Vec<_> = result.reports.iter().collect();
    ranked.sort_by(|a, b| a.mse.total_cmp(&b.mse));
    writeln!(
        w,
        "{:>4}  {:<18} {:>8} {:>5} {:>6} {:>14} {:>12} {:>7}",
        "rank", "method", "alpha", "k", "reps", "mse", "stderr", "dropped"
    )?;
    for (i, r) in ranked.iter().enumerate() {
        writeln!(
            w,
            "{:>4}  {:<18} {:>8} {:>5} {:>6} {:>14.6} {:>12.4e} {:>7}",
            i + 1,
            r.method.label(),
            r.alpha,
            r.k,
            r.replications,
            r.mse,
            r.stderr,
            r.dropped
        )?;
    }
    Ok(())
}

fn cmd_verify(name: &str) -> Result<ExitCode, Failure> {
    let suite: Suite = name.parse().map_err(|e: Error| {
        let names: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
        Failure::Usage(format!("{e} (expected one of: {})", names.join(", ")))
    })?;
    let checks = run_suite(suite, execution(env_workers()?)).map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut stdout = io::stdout().lock();
    for c in &checks {
        writeln!(stdout, "{c}").map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        writeln!(stdout, "{}: all {} checks passed", suite.name(), checks.len()).ok();
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(stdout, "{}: {failed} of {} checks failed", suite.name(), checks.len()).ok();
        Ok(ExitCode::from(1))
    }
}
