mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommandName, Flags};

/// Sum-of-squares certificates and ranks for unweighted minimum knapsack.
#[derive(Parser, Debug)]
#[command(name = "soskp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    /// JSON file mirroring the run configuration. Without a subcommand the
    /// file must name one in its `command` field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build a certificate, verify it and write it as JSON.
    Construct {
        #[command(flatten)]
        flags: Flags,
    },
    /// Load a certificate file and check it.
    Verify {
        file: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Oracle SOS rank by ascending degree scan.
    Rank {
        #[command(flatten)]
        flags: Flags,
    },
    /// reported_degree or oracle rank over q = q_floor + 2^-e.
    Sweep {
        #[command(flatten)]
        flags: Flags,
    },
    /// Smoothed-analysis Monte Carlo run.
    Smooth {
        #[command(flatten)]
        flags: Flags,
    },
    /// Closed-form bound shapes (unit constants).
    Bounds {
        #[command(flatten)]
        flags: Flags,
    },
    /// Quadrature check of the I_k / J_k inequalities.
    CheckIj {
        #[command(flatten)]
        flags: Flags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, input, flags) = match cli.command {
        None => (None, None, Flags::default()),
        Some(cmd) => {
            let (name, input, flags) = match cmd {
                Cmd::Construct { flags } => (CommandName::Construct, None, flags),
                Cmd::Verify { file, flags } => (CommandName::Verify, file, flags),
                Cmd::Rank { flags } => (CommandName::Rank, None, flags),
                Cmd::Sweep { flags } => (CommandName::Sweep, None, flags),
                Cmd::Smooth { flags } => (CommandName::Smooth, None, flags),
                Cmd::Bounds { flags } => (CommandName::Bounds, None, flags),
                Cmd::CheckIj { flags } => (CommandName::CheckIj, None, flags),
            };
            (Some(name), input, flags)
        }
    };
    let code = match config::resolve(name, cli.config.as_ref(), input, &flags) {
        Ok(cfg) => commands::run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            commands::Exit::Usage
        }
    };
    ExitCode::from(code as u8)
}
