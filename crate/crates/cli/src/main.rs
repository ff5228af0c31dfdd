//! `parafrac`: fractal analysis of parabolic germs from a JSON run config.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 degraded result,
//! 3 oracle mismatch.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Exit;
use config::Run;

#[derive(Parser)]
#[command(name = "parafrac", version, about = "Directed area of ε-neighborhoods of parabolic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure the ε-neighborhoods, fit the asymptotics and recover (k, a₁, a).
    Analyze(Common),
    /// Compare the fitted invariants of the germ and its conjugates.
    Verify(Common),
    /// Compare exact areas and centroids with the Monte-Carlo sampler.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Multiplies the exact area before comparison (negative control).
        #[arg(long, hide = true)]
        corrupt_exact: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Run config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Validate the config and print the planned orbit length.
    #[arg(long)]
    dry_run: bool,
    /// Overrides `oracle.seed` of the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(Run, PathBuf)> {
        let mut run = Run::load(&self.config)?;
        if let Some(seed) = self.seed {
            run.config.oracle.seed = seed;
        }
        let dir = self.out_dir.clone().unwrap_or_else(|| run.config.output.dir.clone());
        Ok((run, dir))
    }
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Exit {
    let (common, corrupt) = match &cli.command {
        Command::Analyze(c) | Command::Verify(c) => (c, None),
        Command::OracleCheck { common, corrupt_exact } => (common, *corrupt_exact),
    };
    let loaded = configure_threads(common.threads).and_then(|_| common.load());
    let (run, dir) = match loaded {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Exit::Config;
        }
    };
    let result = if common.dry_run {
        let with_oracle = matches!(cli.command, Command::OracleCheck { .. }) || run.config.oracle.enabled;
        commands::dry_run(&run, with_oracle)
    } else {
        match cli.command {
            Command::Analyze(_) => commands::analyze(&run, &dir),
            Command::Verify(_) => commands::verify(&run, &dir),
            Command::OracleCheck { .. } => commands::oracle_check(&run, &dir, corrupt),
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        Exit::Config
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Config as u8 } else { 0 });
        }
    };
    ExitCode::from(execute(cli) as u8)
}
