use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kuq::calibrate::Norm;
use kuq::harness::{
    calibrate_archive, estimate, exit_code, load_config, parse_mu_grid, read_report, run_sweep, write_tables,
    EstimateRequest, Sweep,
};
use kuq::models::ModelKind;
use kuq::vrmc::WeightMode;
use kuq::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "kuq", version, about = "Multifidelity UQ experiments for collisional plasma kinetics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the model at K random draws and write a sample archive.
    Run {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        ic: String,
        /// TOML file laid over the preset of the initial condition.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent draws averaged into the control-variate mean.
        #[arg(long)]
        mean_samples: Option<usize>,
        #[arg(long)]
        mean_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the Fokker-Planck collision frequency to the Landau operator.
    Calibrate {
        /// Archive storing the distribution `f`.
        #[arg(long)]
        dataset: PathBuf,
        /// Candidates for 1/mu: `lo..hi`, `log:lo:hi:n` or `a,b,c`.
        #[arg(long, default_value = "1..40")]
        mu_grid: String,
        #[arg(long, default_value = "l1")]
        norm: Norm,
        /// CSV table of (1/mu, error).
        #[arg(long)]
        out: PathBuf,
    },
    /// Control-variate estimate of the high-fidelity expectation.
    Estimate {
        #[arg(long)]
        high: PathBuf,
        #[arg(long, required = true)]
        low: Vec<PathBuf>,
        /// Archives carrying each surrogate's mean; defaults to the `--low` archives.
        #[arg(long)]
        mean: Vec<PathBuf>,
        #[arg(long, default_value = "auto")]
        mode: WeightMode,
        #[arg(long)]
        quantity: Option<String>,
        /// Dense high-fidelity archive used as the exact expectation.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// JSON report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn estimate reports into CSV tables.
    Report {
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Directory receiving the tables.
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            model,
            ic,
            config,
            samples,
            seed,
            mean_samples,
            mean_seed,
            out,
        } => {
            let text = config
                .as_ref()
                .map(|p| fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e }))
                .transpose()?;
            let cfg = load_config(model, &ic, text.as_deref())?;
            let mean = match (mean_samples, mean_seed) {
                (Some(l), s) => Some((l, s.unwrap_or(seed.wrapping_add(1)))),
                (None, Some(_)) => {
                    return Err(Error::InvalidParameter("--mean-seed needs --mean-samples".into()));
                }
                (None, None) => None,
            };
            let archive = run_sweep(&cfg, &Sweep { samples, seed, mean }, &out)?;
            println!("wrote {} samples to {}", archive.len(), out.display());
        }
        Command::Calibrate {
            dataset,
            mu_grid,
            norm,
            out,
        } => {
            let cal = calibrate_archive(&dataset, &parse_mu_grid(&mu_grid)?, norm)?;
            fs::write(&out, cal.table()).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            println!("mu_inv* = {}", 1.0 / cal.mu_star);
        }
        Command::Estimate {
            high,
            low,
            mean,
            mode,
            quantity,
            reference,
            out,
        } => {
            let rep = estimate(&EstimateRequest {
                high,
                lows: low,
                means: mean,
                quantity,
                mode,
                reference,
            })?;
            rep.write(&out)?;
            println!("{} times, k = {}, mode {:?}", rep.times.len(), rep.k, rep.mode);
        }
        Command::Report { inputs, out } => {
            let reports = inputs
                .iter()
                .map(|p| {
                    let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into());
                    read_report(p).map(|r| (name, r))
                })
                .collect::<Result<Vec<_>>>()?;
            for p in write_tables(&reports, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
