mod commands;
mod config;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{CliResult, EvolveArgs, GroverArgs, ReverseCheckArgs, SampleArgs, SpectralCheckArgs, StabilityArgs};

#[derive(Parser)]
#[command(name = "lattice-qd", version, about = "Reversible lattice Schrödinger evolution and lattice Grover search")]
struct Cli {
    /// TOML file with defaults for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a wave function and write a per-step trace.
    Evolve(EvolveArgs),
    /// Run forward then backward and compare with the start.
    ReverseCheck(ReverseCheckArgs),
    /// Classify stability of the free leapfrog at a given ε.
    Stability(StabilityArgs),
    /// Compare the closed-form mode solution with direct stepping.
    SpectralCheck(SpectralCheckArgs),
    /// Grover search from global diffusion and a phase well.
    Grover(GroverArgs),
    /// Sample position measurements of a lattice state.
    Sample(SampleArgs),
}

fn emit_error(kind: &str, message: &str) {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{body}");
}

/// Config keys a subcommand accepts: its flag ids minus the global ones.
fn allowed_keys(name: &str) -> BTreeSet<String> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("known subcommand");
    sub.get_arguments()
        .map(|a| a.get_id().as_str().to_string())
        .filter(|id| id != "config" && id != "help")
        .collect()
}

fn load<T: Serialize + DeserializeOwned>(flags: &T, cli_config: &Option<PathBuf>, name: &str) -> CliResult<T> {
    config::load(flags, cli_config.as_deref(), &allowed_keys(name))
}

fn run(cli: Cli) -> CliResult<()> {
    let file = &cli.config;
    match &cli.command {
        Command::Evolve(a) => commands::evolve(load(a, file, "evolve")?),
        Command::ReverseCheck(a) => commands::reverse_check(load(a, file, "reverse-check")?),
        Command::Stability(a) => commands::stability(load(a, file, "stability")?),
        Command::SpectralCheck(a) => commands::spectral_check(load(a, file, "spectral-check")?),
        Command::Grover(a) => commands::grover(load(a, file, "grover")?),
        Command::Sample(a) => commands::sample(load(a, file, "sample")?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let message = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            emit_error("usage", message);
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}
