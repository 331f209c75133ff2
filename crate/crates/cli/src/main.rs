//! `torspec`: runs one pipeline stage per invocation.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure, 1 file-system error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torspec_core::pipeline::{self, ExperimentConfig, PipelineError, StageReport, SymbolSource, OUTPUT_ROOT_ENV};

#[derive(Parser, Debug)]
#[command(name = "torspec", version, about = "Spectra of -h^2 Laplacian + i eps q on the flat torus")]
struct Cli {
    /// Experiment configuration; built-in defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding the configuration.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Root for relative output directories.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV)]
    output_root: Option<PathBuf>,

    #[command(subcommand)]
    stage: Stage,
}

#[derive(Subcommand, Debug)]
enum Stage {
    /// Write the symbol exchange file.
    GenSymbol {
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Torus averages, Q-infinity segments and band bounds.
    Classical,
    /// Shell-matrix spectra, one file per epsilon.
    Spectrum2d {
        /// Parallel workers over the epsilon list.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Low-lying spectrum of the one-dimensional model.
    Model1d,
    /// Lattice predictions near rational tori.
    Predict,
    /// Match predictions against computed spectra.
    Compare,
    /// Resolvent bound scan of the one-dimensional model.
    Rescheck,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::parse("")?,
    };
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    match &cli.stage {
        Stage::GenSymbol { degree, kappa, seed } if degree.is_some() || kappa.is_some() || seed.is_some() => {
            let (d0, k0, s0) = match cfg.symbol {
                SymbolSource::Generate { degree, kappa, seed } => (degree, kappa, seed),
                _ => (2, 2.0, 1),
            };
            cfg.symbol = SymbolSource::Generate {
                degree: degree.unwrap_or(d0),
                kappa: kappa.unwrap_or(k0),
                seed: seed.unwrap_or(s0),
            };
        }
        Stage::Spectrum2d { workers: Some(w) } => cfg.workers = (*w).max(1),
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(PathBuf, StageReport), PipelineError> {
    let cfg = load(cli)?;
    let dir = cfg.resolved_output(cli.output_root.as_deref());
    std::fs::create_dir_all(&dir).map_err(|e| torspec_core::io::file_err(&dir, e))?;
    let report = match cli.stage {
        Stage::GenSymbol { .. } => pipeline::run_gen_symbol(&cfg, &dir)?,
        Stage::Classical => pipeline::run_classical(&cfg, &dir)?,
        Stage::Spectrum2d { .. } => pipeline::run_spectrum(&cfg, &dir)?,
        Stage::Model1d => pipeline::run_model1d(&cfg, &dir)?,
        Stage::Predict => pipeline::run_predict(&cfg, &dir)?,
        Stage::Compare => pipeline::run_compare(&cfg, &dir)?,
        Stage::Rescheck => pipeline::run_rescheck(&cfg, &dir)?,
    };
    pipeline::update_manifest(&dir, &report)?;
    Ok((dir, report))
}

fn print_report(dir: &Path, report: &StageReport) {
    println!("{}: {} file(s) in {}", report.stage, report.files.len(), dir.display());
    for f in &report.files {
        println!("  {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((dir, report)) => {
            print_report(&dir, &report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("torspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
