use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use snakefit::plot::View;
use snakefit::{ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "snakefit", version, about = "Fit snake robot configurations to gait backbone curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the gait sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's `output_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for the frequency sweep.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write an SVG overlay of one frame of a trajectory produced by `run`.
    Plot {
        trajectory: PathBuf,
        frame_index: usize,
        #[arg(long, value_enum, default_value = "oblique")]
        view: View,
        /// Output file; defaults to a name next to the trajectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run { config, seed, out_dir, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(dir) = out_dir {
                cfg.output_dir = dir;
            }
            if threads == Some(0) {
                return Err(RunError::Usage("--threads must be >= 1".into()));
            }
            let summary = snakefit::run(&cfg, threads)?;
            let path = summary.output_dir.join(snakefit::runner::METRICS_FILE);
            let records = snakefit::formats::read_metrics(std::fs::File::open(&path).map_err(|source| RunError::Io { path, source })?)?;
            for r in records {
                println!(
                    "{:<22} {:<14} f={:<5} D={:.5}±{:.5} S={:.2}° CSPS={:.1}% converged={:.1}%",
                    r.gait,
                    r.method.name(),
                    r.f_hz,
                    r.mean_D_bl2,
                    r.std_D_bl2,
                    r.smoothness_deg,
                    r.csps_percent,
                    100.0 * r.converged_fraction
                );
            }
            Ok(())
        }
        Command::Plot { trajectory, frame_index, view, out } => {
            let path = snakefit::plot(&trajectory, frame_index, view, out.as_deref())?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
