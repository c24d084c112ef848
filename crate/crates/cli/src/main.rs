//! `hotelcluster`: synthesize data, run exploratory analysis, and run
//! experiment grids.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, Overrides, RunConfig};

const EXIT_VALIDATION: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

#[derive(Parser)]
#[command(name = "hotelcluster", version, about = "Hotel-cluster prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write correlation, histogram and crosstab plot data.
    Analyze(Common),
    /// Run the experiment grid and write reports and models.
    Experiment(Common),
    /// Write a synthetic events.csv and destinations.csv.
    Synthesize(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Global seed (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides the file).
    #[arg(long)]
    workers: Option<usize>,
}

fn load_config(args: &Common) -> Result<RunConfig, String> {
    let text = fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    cfg.apply(&Overrides {
        seed: args.seed,
        out: args.out.clone(),
        workers: args.workers,
    });
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Experiment(a) => (Command::Experiment, a),
        Cmd::Synthesize(a) => (Command::Synthesize, a),
    };
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let problems = cfg.problems(command);
    if !problems.is_empty() {
        eprintln!("invalid configuration:");
        for p in &problems {
            eprintln!("  - {p}");
        }
        return ExitCode::from(EXIT_VALIDATION);
    }

    let outcome = match command {
        Command::Analyze => commands::analyze_cmd(&cfg),
        Command::Synthesize => commands::synthesize_cmd(&cfg),
        Command::Experiment => commands::experiment_cmd(&cfg).map(|(report, written)| {
            print!("{}", report.to_text());
            let failed = report.rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} of {} cells failed", report.rows.len());
            }
            written
        }),
    };
    match outcome {
        Ok(written) => {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pipeline failed at {e}");
            ExitCode::from(EXIT_PIPELINE)
        }
    }
}
