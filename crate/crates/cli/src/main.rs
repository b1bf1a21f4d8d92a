//! `nc-soliton`: build and certify soliton projections from the command line.
//!
//! Exit codes: 0 when the run finished and its assertions passed, 1 when an
//! assertion failed or a computation errored, 2 for configuration and usage
//! errors. Non-frame windows and non-self-dual projections are results, not
//! failures.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "nc-soliton", version, about = "Soliton projections on the Moyal plane and noncommutative tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank-one projection of a window on the Moyal plane.
    Moyal {
        #[command(flatten)]
        opts: Opts,
    },
    /// Full soliton certificate for one window at one theta.
    Torus {
        #[command(flatten)]
        opts: Opts,
    },
    /// One CSV row per (theta, window), theta-major.
    Sweep {
        #[command(flatten)]
        opts: Opts,
    },
    /// Named identity checks; prints a pass/fail table.
    Verify {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Debug)]
struct Opts {
    /// JSON file with any of the settings below (snake_case keys); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Window spec: gaussian[:re,im], hermite:k or tp:delta:d1,d2,... (repeatable for sweep).
    #[arg(long = "window")]
    windows: Vec<String>,
    /// Gaussian phase `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    /// start,stop,step
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta_range: Option<Vec<f64>>,
    /// Comma-separated theta values.
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    /// Signal grid half-width.
    #[arg(long = "grid-T")]
    grid_t: Option<f64>,
    /// Signal grid point count.
    #[arg(long = "grid-N")]
    grid_n: Option<usize>,
    /// Left truncation radius in the first index.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Left truncation radius in the second index.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Right truncation radius.
    #[arg(long = "R")]
    r: Option<usize>,
    /// Replaces every asserted tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Check names for verify (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Opts {
    fn resolve(self) -> Result<RunConfig, ConfigError> {
        let theta_range = match self.theta_range.as_deref() {
            None => None,
            Some(&[a, b, c]) => Some([a, b, c]),
            Some(v) => return Err(ConfigError(format!("--theta-range needs start,stop,step; got {} values", v.len()))),
        };
        let flags = RunConfig {
            theta: self.theta,
            theta_range,
            thetas: self.thetas,
            windows: self.windows,
            lambda: self.lambda,
            grid_t: self.grid_t,
            grid_n: self.grid_n,
            k: self.k,
            l: self.l,
            r: self.r,
            tolerance: self.tolerance,
            only: self.only,
            output: self.output,
            format: self.format,
        };
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(flags))
    }
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(text) = std::env::var("NC_SOLITON_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("NC_SOLITON_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (name, opts) = match cli.command {
        Command::Moyal { opts } => ("moyal", opts),
        Command::Torus { opts } => ("torus", opts),
        Command::Sweep { opts } => ("sweep", opts),
        Command::Verify { opts } => ("verify", opts),
    };
    let cfg = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match name {
        "moyal" => run::cmd_moyal(&cfg),
        "torus" => run::cmd_torus(&cfg),
        "sweep" => run::cmd_sweep(&cfg),
        _ => run::cmd_verify(&cfg),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(run::RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(run::RunError::Failed(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
