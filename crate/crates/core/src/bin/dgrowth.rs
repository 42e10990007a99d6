use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distraction_growth::cli::{
    cmd_gradcheck, cmd_rates, cmd_simulate, cmd_sweep, cmd_verify, parse_config, CliError,
    EXIT_CONFIG,
};

/// Balanced growth and transition dynamics for the home-office distraction model.
#[derive(Parser)]
#[command(name = "dgrowth", version)]
struct Args {
    /// Configuration file with `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override or add a configuration entry, e.g. `--set rho=0.6`
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form balanced-growth rates and validation flags
    Rates {
        #[arg(long)]
        csv: bool,
        /// Exit with status 1 if any validation flag fails
        #[arg(long)]
        strict: bool,
    },
    /// Integrate from the balanced-path initial state and write the trajectory
    Simulate,
    /// Compare a simulated trajectory against every closed-form prediction
    Verify,
    /// Closed-form rates over the configured parameter grid
    Sweep,
    /// Finite-difference check of the Hamiltonian partials
    Gradcheck,
}

fn run(args: &Args) -> Result<i32, CliError> {
    let mut text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    for entry in &args.overrides {
        text.push('\n');
        text.push_str(entry);
    }
    let cfg = parse_config(&text)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match args.command {
        Command::Rates { csv, strict } => cmd_rates(&cfg, csv, strict, &mut out),
        Command::Simulate => cmd_simulate(&cfg, &mut out),
        Command::Verify => cmd_verify(&cfg, &mut out),
        Command::Sweep => cmd_sweep(&cfg, &mut out),
        Command::Gradcheck => cmd_gradcheck(&cfg, &mut out),
    }?;
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dgrowth: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
}
