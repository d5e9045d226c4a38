//! Batch driver for compiling, verifying and simulating syndrome extraction
//! on module arrays.
//!
//! Settings come from built-in defaults, then `--config FILE` (TOML, same
//! field names as the flags with `_` for `-`, plus `[decoder]` and
//! `parallelism`), then flags; later sources win.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "modarray", version, about = "Syndrome extraction on 2xL module arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in codes with n, k, d and weight.
    Catalog,
    /// Print the machine program of a layout (`--rounds`, default 1).
    Compile,
    /// Check a noiseless memory experiment and report the layout depth.
    Verify,
    /// Layer counts of the BB layouts against their closed forms.
    Depth,
    /// Logical error rates over the p grid, as CSV.
    Experiment,
    /// Noisy shifts at p against noiseless shifts at 2p.
    Modularity,
    /// Fit p_L = p^(d/2) exp(c0 + c1 p + c2 p^2) to a results CSV.
    Fit {
        /// CSV written by `experiment`; `--code` and `--layout` filter rows.
        input: PathBuf,
    },
    /// Cyclic layout against measuring each operator in turn, on small
    /// random instances drawn from `--seed`.
    Oracle {
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match &cli.command {
        Command::Catalog => commands::catalog(),
        Command::Compile => commands::compile(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Depth => commands::depth(&cfg),
        Command::Experiment => commands::experiment(&cfg),
        Command::Modularity => commands::modularity(&cfg),
        Command::Fit { input } => commands::fit(&cfg, input),
        Command::Oracle { instances } => commands::oracle(&cfg, *instances),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
