use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polygamy_cli::{emit, load_state, parse_dims, run, run_check, CliError, SweepConfig, SweepMode};
use polygamy_core::polygamy::Mode;
use polygamy_core::states::State;

#[derive(Parser)]
#[command(name = "polygamy", version, about = "Polygamy inequalities for concurrence of assistance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the inequality for one pure state stored as JSON.
    Check {
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        focus: usize,
        #[arg(long, default_value = "general-tau")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep Haar-random pure states (or run oracle/diagnostic modes).
    Sweep {
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        focus: usize,
        #[arg(long, default_value = "general-tau")]
        mode: String,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the closed-form upper bound with the ensemble oracle on random mixed states.
    OracleCompare {
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the cut concurrence with the sum over pair subspaces.
    Diagnostic {
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        focus: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<i32, CliError> {
    let (config, out) = match command {
        Command::Check { state, focus, mode, out } => {
            let mode: Mode = mode.parse().map_err(|e| CliError::Input(format!("{e}")))?;
            let ket = match load_state(&state)? {
                State::Pure(k) => k,
                State::Mixed(_) => return Err(CliError::Input("check needs a pure state".into())),
            };
            let (_, outcome) = run_check(&ket, focus, mode)?;
            let anchor = out.clone().unwrap_or(state);
            emit(&outcome, out.as_deref(), &anchor)?;
            return Ok(outcome.exit_code());
        }
        Command::Sweep { dims, samples, seed, focus, mode, budget, rank, out } => (
            SweepConfig {
                dims: parse_dims(&dims)?,
                samples,
                seed,
                mode: mode.parse()?,
                focus,
                oracle_budget: budget,
                rank,
                output_path: out.clone(),
            },
            out,
        ),
        Command::OracleCompare { dims, samples, seed, rank, budget, out } => (
            SweepConfig {
                dims: parse_dims(&dims)?,
                samples,
                seed,
                mode: SweepMode::OracleCompare,
                focus: 0,
                oracle_budget: budget,
                rank,
                output_path: out.clone(),
            },
            out,
        ),
        Command::Diagnostic { dims, samples, seed, focus, out } => (
            SweepConfig {
                dims: parse_dims(&dims)?,
                samples,
                seed,
                mode: SweepMode::Diagnostic,
                focus,
                oracle_budget: 0,
                rank: None,
                output_path: out.clone(),
            },
            out,
        ),
    };
    let outcome = run(&config)?;
    let anchor = out.clone().unwrap_or_else(|| PathBuf::from("sweep"));
    emit(&outcome, out.as_deref(), &anchor)?;
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
