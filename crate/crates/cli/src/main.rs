// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landscape_cli::checks::{gradcheck, rankscan, validate};
use landscape_cli::run::run_all;
use landscape_cli::{exit, CliError, CommonOptions, ExperimentConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "landscape", version, about = "Control landscape experiments for bipartite quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Maximum number of concurrent runs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Added to every configured seed.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long, value_name = "X")]
    rank_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Gradient ascent for every seed; writes traces, spectra and final controls.
    Run(Common),
    /// Analytic gradients against central differences at random points.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Rank condition at random controls.
    Rankscan {
        #[command(flatten)]
        common: Common,
        /// Points per seed.
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Re-reads the files of a previous `run` and re-checks them.
    Validate(Common),
}

fn print_json<T: Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("error: cannot serialize summary: {e}"),
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (common, action) = match &cli.command {
        Command::Run(c) | Command::Validate(c) => (c, &cli.command),
        Command::Gradcheck { common, .. } | Command::Rankscan { common, .. } => (common, &cli.command),
    };
    if let Some(tol) = common.rank_tol {
        if !(tol > 0.0 && tol < 1.0) {
            eprintln!("error: --rank-tol must lie in (0, 1), got {tol}");
            return Ok(exit::CONFIG);
        }
    }
    let cfg = ExperimentConfig::load(&common.config)?;
    let opts = CommonOptions {
        out_dir: common.out.clone(),
        jobs: common.jobs as usize,
        seed_offset: common.seed_offset,
        rank_tol: common.rank_tol,
    };
    match action {
        Command::Run(_) => {
            let (summary, _) = run_all(&cfg, &opts)?;
            print_json(&summary);
            Ok(if summary.numeric_failures() > 0 { exit::NUMERIC } else { exit::SUCCESS })
        }
        Command::Gradcheck { draws, step, .. } => {
            if !(*step > 0.0) || *draws == 0 {
                eprintln!("error: --draws must be positive and --step must be positive");
                return Ok(exit::CONFIG);
            }
            let summary = gradcheck(&cfg, &opts, *draws, *step)?;
            print_json(&summary);
            Ok(if summary.passed { exit::SUCCESS } else { exit::BOUND })
        }
        Command::Rankscan { points, .. } => {
            let summary = rankscan(&cfg, &opts, *points)?;
            print_json(&summary);
            Ok(exit::SUCCESS)
        }
        Command::Validate(_) => {
            let summary = validate(&cfg, &opts)?;
            print_json(&summary);
            Ok(if summary.passed { exit::SUCCESS } else { exit::BOUND })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
