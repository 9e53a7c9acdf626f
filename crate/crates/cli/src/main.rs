//! `coupleman`: run bounds tables, simulations and verification suites.
//!
//! Exit codes: 0 when every pass/fail check passes, 1 when any fails, 2 for
//! configuration or usage errors, 3 for I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupleman::experiment::{
    cmd_bounds, cmd_caratheodory, cmd_simulate, cmd_verify, cmd_wilson, BoundsConfig, CaratheodoryConfig, RunReport,
    SimulateConfig, Suite, VerifyConfig,
};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "coupleman", version, about = "Coupling experiments on negatively curved model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed; overrides the config. Falls back to COUPLEMAN_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; never changes numeric output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form bound table.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Survival curve or exit-event probability of a coupled pair.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        /// disk_schwarz, caratheodory, h2c_prop72, comparison_1d, psd_probe or martingale.
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Stochastic Carathéodory distance against its closed form.
    Caratheodory {
        #[command(flatten)]
        common: Common,
    },
    /// Wilson score interval.
    Wilson {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<coupleman::Error> for Failure {
    fn from(e: coupleman::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn read_config(path: Option<&Path>) -> Result<Option<Value>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("invalid {what} config: {e}")))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("COUPLEMAN_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("COUPLEMAN_SEED is not a u64: {s:?}"))),
        Err(_) => Ok(None),
    }
}

/// Flag seed beats the config seed, which beats the environment.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<Option<u64>, Failure> {
    Ok(match (flag, config) {
        (Some(s), _) | (None, Some(s)) => Some(s),
        _ => env_seed()?,
    })
}

fn run(command: Command) -> Result<(RunReport, Common, Format), Failure> {
    Ok(match command {
        Command::Bounds { common } => {
            let cfg: BoundsConfig = match read_config(common.config.as_deref())? {
                Some(v) => parse(v, "bounds")?,
                None => BoundsConfig::default(),
            };
            (cmd_bounds(&cfg)?, common, Format::Csv)
        }
        Command::Simulate { common } => {
            let v = read_config(common.config.as_deref())?
                .ok_or_else(|| Failure::Usage("simulate needs --config <path>".into()))?;
            let mut cfg: SimulateConfig = parse(v, "simulate")?;
            cfg.seed = resolve_seed(common.seed, cfg.seed)?;
            (cmd_simulate(&cfg)?, common, Format::Csv)
        }
        Command::Verify { suite, common } => {
            let mut cfg: VerifyConfig = match (read_config(common.config.as_deref())?, &suite) {
                (Some(v), _) => {
                    let mut v = v;
                    if let (Some(name), Value::Object(map)) = (&suite, &mut v) {
                        map.insert("suite".into(), Value::String(name.clone()));
                    }
                    parse(v, "verify")?
                }
                (None, Some(name)) => {
                    let s = Suite::from_name(name).ok_or_else(|| {
                        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                        Failure::Usage(format!("unknown suite {name:?}; expected one of {}", names.join(", ")))
                    })?;
                    VerifyConfig::new(s)
                }
                (None, None) => return Err(Failure::Usage("verify needs a suite name or --config".into())),
            };
            cfg.seed = resolve_seed(common.seed, cfg.seed)?;
            (cmd_verify(&cfg)?, common, Format::Json)
        }
        Command::Caratheodory { common } => {
            let v = read_config(common.config.as_deref())?
                .ok_or_else(|| Failure::Usage("caratheodory needs --config <path>".into()))?;
            let mut cfg: CaratheodoryConfig = parse(v, "caratheodory")?;
            cfg.seed = resolve_seed(common.seed, cfg.seed)?;
            (cmd_caratheodory(&cfg)?, common, Format::Json)
        }
        Command::Wilson { k, n, z, common } => (cmd_wilson(k, n, z)?, common, Format::Csv),
    })
}

fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => match &report.table {
            Some(t) => t.to_csv(),
            None => report.checks_csv(),
        },
    }
}

fn threads_of(command: &Command) -> Option<usize> {
    match command {
        Command::Bounds { common }
        | Command::Simulate { common }
        | Command::Verify { common, .. }
        | Command::Caratheodory { common }
        | Command::Wilson { common, .. } => common.threads,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = threads_of(&cli.command);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = pool.install(|| run(cli.command));
    let (report, common, default_format) = match result {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let text = render(&report, common.format.unwrap_or(default_format));
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
    eprintln!(
        "{}: {} checks, {} failed, {:.2} s",
        report.command,
        report.checks.len(),
        failed.len(),
        start.elapsed().as_secs_f64()
    );
    for name in &failed {
        eprintln!("FAIL {name}");
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
