use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use markerflow_cli::{load_config, presets_report, resolve_threads, run_with_threads, THREADS_ENV};

#[derive(Parser)]
#[command(name = "markerflow", version, about = "Multi-phase vortex patches with softmax-gated markers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for β sweeps (MARKERFLOW_THREADS takes precedence).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List shipped presets with measured nondegeneracy constants.
    Presets {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = markerflow_core::preset::DEFAULT_STRIP_DELTA)]
        strip_delta: f64,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets { n, strip_delta } => match presets_report(n, strip_delta) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run { config, out, threads } => {
            let env = std::env::var(THREADS_ENV).ok();
            let threads = match resolve_threads(threads, env.as_deref()) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            match run_with_threads(&cfg, out.as_deref(), threads) {
                Ok(summary) => {
                    println!(
                        "{} records written to {}",
                        summary.records.len(),
                        summary.out_dir.display()
                    );
                    for fit in &summary.fits {
                        println!(
                            "fit {} ({}): slope {:.4}, r2 {:.5}",
                            fit.quantity, fit.model, fit.slope, fit.r2
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
