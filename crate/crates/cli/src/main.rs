use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::Overrides;
use config::{Command, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] degentrace::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Internal(_) => 4,
        }
    }
}

/// Trace-formula experiments at a totally degenerate critical level.
///
/// Exit codes: 0 success, 1 failed acceptance criterion, 2 configuration or
/// hypothesis error, 3 convergence failure, 4 internal error.
/// DEGENTRACE_THREADS sets the worker count.
#[derive(Parser)]
#[command(name = "degentrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Windowed eigenvalues over the h grid.
    Spectrum(ScenarioArgs),
    /// γ(E_c, h), the leading-order prediction and the exponent fit.
    Gamma(ScenarioArgs),
    /// Λ₀ and the exponent 2n/k − n.
    Predict(ScenarioArgs),
    /// Log-log fit of the `gamma` column against `h` in a CSV file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Oscillatory-integral expansion against brute-force quadrature.
    OscintCheck(ScenarioArgs),
    /// Flow and Hamilton–Jacobi structure checks.
    FlowCheck(ScenarioArgs),
    /// Acceptance suite; one line per criterion.
    Accept {
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// The subcommand named by the config's "command" field.
    Run(ScenarioArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides output.csv.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides output.json.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<(ScenarioConfig, Overrides), CliError> {
        Ok((ScenarioConfig::load(&self.config)?, Overrides { csv: self.csv.clone(), json: self.json.clone() }))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DEGENTRACE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("DEGENTRACE_THREADS = `{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Internal(e.to_string()))
}

fn scenario(cmd: Command, args: &ScenarioArgs) -> Result<(), CliError> {
    let (cfg, out) = args.load()?;
    dispatch(cmd, &cfg, &out)
}

fn dispatch(cmd: Command, cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    match cmd {
        Command::Spectrum => commands::spectrum_cmd(cfg, out),
        Command::Gamma => commands::gamma_cmd(cfg, out),
        Command::Predict => commands::predict_cmd(cfg, out),
        Command::OscintCheck => commands::oscint_cmd(cfg, out),
        Command::FlowCheck => commands::flow_cmd(cfg, out),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    match &cli.command {
        Cmd::Spectrum(a) => scenario(Command::Spectrum, a)?,
        Cmd::Gamma(a) => scenario(Command::Gamma, a)?,
        Cmd::Predict(a) => scenario(Command::Predict, a)?,
        Cmd::OscintCheck(a) => scenario(Command::OscintCheck, a)?,
        Cmd::FlowCheck(a) => scenario(Command::FlowCheck, a)?,
        Cmd::Fit { input, json } => commands::fit_cmd(input, json.as_deref())?,
        Cmd::Accept { only, json } => {
            if !commands::accept_cmd(only, json.as_deref())? {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Run(a) => {
            let (cfg, out) = a.load()?;
            let cmd = cfg.command.ok_or_else(|| CliError::Config("`run` needs a \"command\" field in the config".into()))?;
            dispatch(cmd, &cfg, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
