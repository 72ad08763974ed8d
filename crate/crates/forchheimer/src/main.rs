use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use forchheimer::cli;

#[derive(Parser)]
#[command(name = "forchheimer", about = "Mixed finite-element solver for Darcy-Forchheimer gas flow", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solve described by a config file.
    Run {
        /// Path to the INI-style config.
        config: PathBuf,
        /// Output directory (default: ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the RNG seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Print progress to stderr.
        #[arg(long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // help/version requests are successes, everything else is a
            // usage error (exit 1)
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match args.command {
        Command::Run { config, out, seed, verbose } => {
            match cli::run_from_args(&config, out, seed, verbose) {
                Ok(()) => ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(cli::exit_code_for(&err) as u8)
                }
            }
        }
    }
}
