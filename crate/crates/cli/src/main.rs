//! `qgauss`: reproducible verification runs with JSON/CSV reports.

mod config;
mod guard;
mod report;
mod suites;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::{FileConfig, Format, RunConfig, Suite, DEFAULT_SEED};
use guard::Guard;
use report::{Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource guard: {what} needs about {needed} bytes, limit is {limit} (set {env})", env = guard::GUARD_ENV)]
    Guard {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    #[error("cannot write report: {0}")]
    Output(String),

    #[error(transparent)]
    Core(#[from] qgauss::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Guard { .. } | CliError::Core(qgauss::Error::Resource { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qgauss",
    version,
    about = "Verification runs for truncated q-Gaussian models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Built-in group (s3, d4, klein, zN) or a JSON group file.
    #[arg(long, global = true)]
    group: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vacuum moments of field words over an orthonormal pair, by both routes.
    Moments {
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Run the invariant suite of one module, or all of them.
    Verify {
        #[arg(value_enum)]
        suite: Option<Suite>,
    },
    /// Spectral-gap sweep over |F|.
    Gap {
        /// Comma-separated |F| values.
        #[arg(long, value_delimiter = ',')]
        f_sizes: Option<Vec<usize>>,
    },
    /// Adversarial search and concentration checks for torus measures.
    Rigidity,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let (max_len, f_sizes, suite) = match &cli.command {
        Command::Moments { max_len } => (max_len.or(file.max_len), None, None),
        Command::Verify { suite } => (None, None, suite.or(file.suite)),
        Command::Gap { f_sizes } => (None, f_sizes.clone(), None),
        Command::Rigidity => (None, None, None),
    };
    Ok(RunConfig {
        q: cli.q.or(file.q).unwrap_or(0.5),
        dim: cli.dim.or(file.dim).unwrap_or(2),
        cutoff: cli.cutoff.or(file.cutoff),
        group: cli
            .group
            .clone()
            .or(file.group)
            .unwrap_or_else(|| "s3".into()),
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: cli.out.clone().or(file.out),
        format: cli.format.or(file.format).unwrap_or(Format::Json),
        trials: cli.trials.or(file.trials).unwrap_or(10_000),
        resolution: cli.resolution.or(file.resolution).unwrap_or(16),
        max_len: max_len.or(file.max_len).unwrap_or(6),
        f_sizes: f_sizes.or(file.f_sizes).unwrap_or_else(|| vec![1, 2, 4]),
        suite: suite.or(file.suite),
    })
}

fn run_suite(
    suite: Suite,
    cfg: &RunConfig,
    guard: &Guard,
) -> Result<suites::SuiteOutput, CliError> {
    match suite {
        Suite::Fock => suites::fock(cfg, guard),
        Suite::Wick => suites::wick(cfg, guard),
        Suite::Gqg => suites::gqg(cfg, guard),
        Suite::Rigidity => suites::rigidity(cfg, guard),
        Suite::All => {
            let parts: Vec<_> = [Suite::Fock, Suite::Wick, Suite::Gqg, Suite::Rigidity]
                .par_iter()
                .map(|&s| run_suite(s, cfg, guard))
                .collect();
            let mut all = suites::SuiteOutput::default();
            for p in parts {
                all.extend(p?);
            }
            Ok(all)
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let cfg = resolve(cli)?;
    let guard = Guard::from_env()?;
    let tabular = matches!(cli.command, Command::Moments { .. } | Command::Gap { .. });
    if cfg.format == Format::Csv && !tabular {
        return Err(CliError::Config(
            "CSV output is only available for tabular sweeps (moments, gap)".into(),
        ));
    }
    let (name, out, table) = match &cli.command {
        Command::Moments { .. } => {
            let (out, rows) = suites::moments(&cfg, &guard)?;
            ("moments".to_string(), out, Some(Table::Moments(rows)))
        }
        Command::Verify { .. } => {
            let suite = cfg.suite.unwrap_or(Suite::All);
            (
                format!("verify.{}", suite.name()),
                run_suite(suite, &cfg, &guard)?,
                None,
            )
        }
        Command::Gap { .. } => {
            let (out, rows) = suites::gap(&cfg, &guard)?;
            ("gap".to_string(), out, Some(Table::Gap(rows)))
        }
        Command::Rigidity => (
            "rigidity".to_string(),
            suites::rigidity(&cfg, &guard)?,
            None,
        ),
    };
    let seeds: BTreeMap<String, u64> = out.seeds;
    Ok(Report::new(&name, &cfg, out.records, seeds, table))
}

fn emit(report: &Report) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &report.config.out {
        Some(p) => Box::new(
            File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let sink = BufWriter::new(sink);
    match report.config.format {
        Format::Json => report.write_json(sink),
        Format::Csv => report.write_csv(sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = execute(&cli).and_then(|report| emit(&report).map(|_| report));
    let elapsed = start.elapsed();
    match result {
        Ok(report) => {
            let failed: Vec<&str> = report
                .records
                .iter()
                .filter(|r| !r.pass)
                .map(|r| r.name.as_str())
                .collect();
            eprintln!(
                "{}: {} of {} checks pass in {:.2?}",
                report.suite,
                report.records.len() - failed.len(),
                report.records.len(),
                elapsed
            );
            for name in &failed {
                eprintln!("  failed: {name}");
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("qgauss: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
