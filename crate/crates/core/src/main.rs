use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use firmnet::pipeline::{run, PipelineConfig, Stage};
use firmnet::validation::PvalueMode;

#[derive(Parser)]
#[command(name = "firmnet", about = "Validated hashtag co-occurrence network pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline stage (or `all`).
    Run {
        #[arg(value_enum)]
        stage: Stage,
        /// TOML configuration file; paths inside are relative to it.
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the Louvain seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the FDR level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the p-value mode.
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliMode {
    Exact,
    Poisson,
    Auto,
}

impl From<CliMode> for PvalueMode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Exact => PvalueMode::Exact,
            CliMode::Poisson => PvalueMode::Poisson,
            CliMode::Auto => PvalueMode::Auto,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        stage,
        config,
        out,
        seed,
        alpha,
        mode,
    } = cli.command;

    let mut cfg = match PipelineConfig::load(&config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("firmnet: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    if let Some(seed) = seed {
        cfg.communities.seed = seed;
    }
    if let Some(alpha) = alpha {
        cfg.validation.alpha = alpha;
    }
    if let Some(mode) = mode {
        cfg.validation.mode = mode.into();
    }
    if let Err(e) = cfg.validate() {
        eprintln!("firmnet: {e}");
        return ExitCode::from(2);
    }

    match run(stage, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("firmnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
