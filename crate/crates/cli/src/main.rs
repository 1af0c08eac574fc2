use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use debtrun_cli::{replay, run, CliError, Command, RunConfig, RunOptions};

/// Debt-run, illiquidity and insolvency barriers, default probabilities and
/// scenario simulations from a TOML configuration.
#[derive(Parser)]
#[command(name = "debtrun", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
    /// Also write a gnuplot script.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Debt-run, illiquidity and insolvency barriers per tenor and belief.
    Barriers(Common),
    /// Default probabilities over a V0 sweep with their decomposition.
    DefaultProb {
        #[command(flatten)]
        common: Common,
        /// Barrier CSV to use instead of solving.
        #[arg(long)]
        barriers: Option<PathBuf>,
    },
    /// Classified scenario paths.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Barrier CSV to use instead of solving.
        #[arg(long)]
        barriers: Option<PathBuf>,
        /// Overrides `simulate.n_scenarios`.
        #[arg(long)]
        n_scenarios: Option<usize>,
    },
    /// Value functions and barriers of discrete and staggered tenors.
    CompareTenor(Common),
    /// Re-runs a manifest and checks that every output is reproduced.
    Replay {
        manifest: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<debtrun_cli::Manifest, CliError> {
    let (command, common, barriers, n_scenarios) = match cli.command {
        Cmd::Barriers(c) => (Command::Barriers, c, None, None),
        Cmd::DefaultProb { common, barriers } => (Command::DefaultProb, common, barriers, None),
        Cmd::Simulate {
            common,
            barriers,
            n_scenarios,
        } => (Command::Simulate, common, barriers, n_scenarios),
        Cmd::CompareTenor(c) => (Command::CompareTenor, c, None, None),
        Cmd::Replay { manifest, out } => return replay(&manifest, &out),
    };
    let mut config = RunConfig::load(&common.config).map_err(CliError::Config)?;
    if let Some(n) = n_scenarios {
        config.simulate.n_scenarios = n;
    }
    let options = RunOptions {
        barriers,
        gnuplot: common.gnuplot,
    };
    run(command, &config, &options, &common.out)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for c in manifest.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {}: {}", c.name, c.detail);
            }
            for o in &manifest.outputs {
                println!("{}  {}", o.sha256, o.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
