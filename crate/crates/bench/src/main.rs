use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipas::problems::{write_libsvm, LogisticDataset};
use ipas_bench::experiment::{CURVES_FILE, SUMMARY_FILE};
use ipas_bench::summary::{write_curves, write_summary};
use ipas_bench::{run_experiment, summarize_dir, BenchError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ipas-bench", version, about = "Seeded sweeps of the ipas solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every grid point for every seed.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config and IPAS_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute summary.csv and curves.csv from a directory of traces.
    Summarize { trace_dir: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Write a synthetic LIBSVM-format logistic dataset.
    GenerateDataset {
        out: PathBuf,
        #[arg(long, default_value_t = 768)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        features: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_for(e: &BenchError) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_config_error() { ExitCode::from(2) } else { ExitCode::from(1) }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, workers } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            let dir = cfg.resolve_output_dir(out.as_deref());
            match run_experiment(&cfg, &dir, workers) {
                Ok(outcome) => {
                    let failed = outcome.failures();
                    println!("{} runs written to {} ({failed} failed)", outcome.manifest.len(), dir.display());
                    if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS }
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Summarize { trace_dir } => {
            let result = summarize_dir(&trace_dir).and_then(|(rows, curves)| {
                write_summary(&trace_dir.join(SUMMARY_FILE), &rows)?;
                write_curves(&trace_dir.join(CURVES_FILE), &curves)?;
                Ok(rows.len())
            });
            match result {
                Ok(groups) => {
                    println!("summarized {groups} groups in {}", trace_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Validate { config } => {
            let checked = ExperimentConfig::load(&config).and_then(|cfg| Ok((cfg.validate()?, cfg)));
            match checked {
                Ok((warnings, cfg)) => {
                    for w in &warnings {
                        println!("warning: {w}");
                    }
                    let points = cfg.grid().len();
                    println!("ok: {points} grid points x {} seeds = {} runs", cfg.seeds.len(), points * cfg.seeds.len());
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::GenerateDataset { out, samples, features, seed } => {
            let written = LogisticDataset::synthetic(samples, features, seed)
                .map_err(BenchError::from)
                .and_then(|ds| {
                    let w = BufWriter::new(File::create(&out)?);
                    write_libsvm(&ds, w)?;
                    Ok(())
                });
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => exit_for(&e),
            }
        }
    }
}
