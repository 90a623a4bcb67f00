//! `trispin`: exact-diagonalization and mean-field runs for spin-½
//! Heisenberg-plus-chiral models on triangular lattices, emitted as CSV.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::PartialConfig;

#[derive(Parser)]
#[command(
    name = "trispin",
    about = "Spectra, chirality sweeps, correlators, entanglement witnesses and \
             mean-field theory for triangular-lattice chiral spin models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energy, degeneracy, gap, spin and momentum per coupling
    Spectrum(CommonArgs),
    /// Mean ground-state chirality across a coupling grid
    Sweep(CommonArgs),
    /// Connected correlators from a reference site, bond or plaquette
    Correlations(CommonArgs),
    /// Chiral entanglement witness of ground-state triples or a state file
    Witness(CommonArgs),
    /// Type-A ladder mean-field theory with optional exact-energy columns
    Meanfield(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key=value config file; flags of the same names override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Geometry tag: ladder-a:N[:open], ladder-b:N[:open], ladder-c:N,
    /// ring:N, torus:RxC
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long = "lambda-min")]
    lambda_min: Option<f64>,
    #[arg(long = "lambda-max")]
    lambda_max: Option<f64>,
    #[arg(long = "lambda-step")]
    lambda_step: Option<f64>,
    /// Eigenpairs per magnetization sector
    #[arg(long)]
    k: Option<usize>,
    /// Eigensolver residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the coupling grid (0 = library default)
    #[arg(long)]
    workers: Option<usize>,
    /// Reference object: site `i`, bond `i-j`, or plaquette `i-j-k`
    #[arg(long)]
    reference: Option<String>,
    /// External three-spin state: 8 amplitude lines or 64 density lines
    /// of `re im` (witness only)
    #[arg(long = "state-file")]
    state_file: Option<PathBuf>,
    /// Comma-separated even ladder sizes for exact-energy comparison
    /// columns (meanfield only)
    #[arg(long = "ed-sizes")]
    ed_sizes: Option<String>,
}

impl CommonArgs {
    fn resolve(self) -> Result<config::RunConfig> {
        let from_flags = PartialConfig {
            geometry: self.geometry,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            lambda_step: self.lambda_step,
            k_eigen: self.k,
            tol: self.tol,
            out: self.out,
            seed: self.seed,
            workers: self.workers,
            reference: self.reference,
            state_file: self.state_file,
            ed_sizes: self.ed_sizes,
        };
        let merged = match &self.config {
            Some(path) => from_flags.or(PartialConfig::from_file(path)?),
            None => from_flags,
        };
        merged.resolve()
    }
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum(args) => commands::cmd_spectrum(&args.resolve()?),
        Command::Sweep(args) => commands::cmd_sweep(&args.resolve()?),
        Command::Correlations(args) => commands::cmd_correlations(&args.resolve()?),
        Command::Witness(args) => commands::cmd_witness(&args.resolve()?),
        Command::Meanfield(args) => commands::cmd_meanfield(&args.resolve()?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
