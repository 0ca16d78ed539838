use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use onebit_dapsk::harness::oracle::run_oracles;
use onebit_dapsk::harness::{emit_csv, emit_svg, prepare_model, sweep, train_model, Mode, SimConfig};
use onebit_dapsk::neural::save_model;
use onebit_dapsk::{Error, Result};

#[derive(Parser)]
#[command(name = "onebit-dapsk", version, about = "DAPSK over one-bit massive-MIMO uplinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset, train the amplitude detector and write the model.
    Train {
        /// Simulation config; its SNR grid becomes the model's one-hot grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Model file to write.
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Run one or more campaigns and write a CSV table plus an SVG plot.
    Sweep {
        /// Simulation configs; repeat to put several curves in one output.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV path; the plot goes next to it with an `.svg` extension.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Print Monte-Carlo and quadrature reference values.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional file to write the table to as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>, seed: Option<u64>) -> Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => SimConfig::from_file(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, seed, out } => {
            let mut cfg = load(config.as_deref(), seed)?;
            cfg.mode = Mode::DifferentialVqlNn;
            cfg.model = None;
            cfg.validate()?;
            let (model, report) = train_model(&cfg, cfg.seed)?;
            save_model(&model, &out)?;
            println!(
                "trained {} parameters on {} samples: loss {:.5} -> {:.5}; wrote {}",
                model.parameter_count(),
                cfg.train_samples,
                report.initial_loss,
                report.final_loss,
                out.display()
            );
        }
        Command::Sweep { config, seed, out } => {
            let mut records = Vec::new();
            for path in &config {
                let cfg = load(Some(path), seed)?;
                let model = prepare_model(&cfg)?;
                let recs = sweep(&cfg, model.as_ref())?;
                for r in &recs {
                    println!(
                        "{:<22} U={:<4} {:>6.1} dB  ber={:.3e}  ser={:.3e}  se={:.3}",
                        r.mode.as_str(),
                        r.antennas,
                        r.snr_db,
                        r.ber,
                        r.ser,
                        r.spectral_efficiency
                    );
                }
                records.extend(recs);
            }
            emit_csv(&records, &out)?;
            if !records.is_empty() {
                emit_svg(&records, &out.with_extension("svg"))?;
            }
            println!("wrote {}", out.display());
        }
        Command::Oracle { config, seed, out } => {
            let cfg = load(config.as_deref(), seed)?;
            let lines = run_oracles(&cfg, cfg.seed)?;
            let mut table = String::new();
            for l in &lines {
                table.push_str(&format!("{:<48} {:>14.6} {:>14.6}\n", l.name, l.estimate, l.closed_form));
            }
            print!("{:<48} {:>14} {:>14}\n{table}", "quantity", "estimate", "closed form");
            if let Some(path) = out {
                std::fs::write(&path, table).map_err(|source| Error::Io { path, source })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
