use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anacon_cli::config::RunConfig;
use anacon_cli::{commands, Failure};

/// Analytic-content toolkit: domain constants, partial balayage and
/// discrete Brenier transport.
#[derive(Parser)]
#[command(name = "anacon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config entry).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for all randomized components.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Direct minimax estimate of the domain constant.
    Lambda1(Common),
    /// Partial balayage of a configured measure onto the uniform cap.
    Balayage(Common),
    /// Discrete optimal transport onto the volume-matched ball.
    Brenier(Common),
    /// Constructive upper bound via transport, mollification and balayage.
    ProofTrace(Common),
    /// Closed-form reference values for the domain.
    Oracle(Common),
    /// Built-in verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run the built-in domain suite.
        #[arg(long)]
        suite: bool,
        /// Also run the constructive bound on the planar suite domains.
        #[arg(long)]
        with_proof_trace: bool,
    },
}

fn load_config(common: &Common, required: bool) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None if required => return Err(Failure::Config("this command requires --config".into())),
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run() -> Result<String, Failure> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Lambda1(c) => {
            let cfg = load_config(c, true)?;
            commands::run_lambda1(&cfg, c.out.as_deref())
        }
        Command::Balayage(c) => {
            let cfg = load_config(c, true)?;
            commands::run_balayage(&cfg, c.out.as_deref())
        }
        Command::Brenier(c) => {
            let cfg = load_config(c, true)?;
            commands::run_brenier(&cfg, c.out.as_deref())
        }
        Command::ProofTrace(c) => {
            let cfg = load_config(c, true)?;
            commands::run_proof_trace(&cfg, c.out.as_deref())
        }
        Command::Oracle(c) => {
            let cfg = load_config(c, true)?;
            commands::run_oracle(&cfg, c.out.as_deref())
        }
        Command::Verify {
            common,
            suite,
            with_proof_trace,
        } => {
            if !suite {
                return Err(Failure::Config(
                    "verify currently only supports --suite".into(),
                ));
            }
            let cfg = load_config(common, false)?;
            commands::run_verify(&cfg, *with_proof_trace, common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.reason_json());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
