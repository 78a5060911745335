//! File formats and the command-line driver for quantum neural network force
//! fields. The numerical work lives in `qff_core`; this crate adds IO.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod dataset;
mod error;
pub mod output;

pub use error::{exit, Error, Result};

use clap::{Parser, Subcommand};
use config::RunArgs;

#[derive(Debug, Parser)]
#[command(name = "qff", version, about = "Quantum neural network force fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label geometries with a preset's analytic oracle.
    Gen(RunArgs),
    /// Fit a QNN or MLP and write a checkpoint.
    Train(RunArgs),
    /// RMSE of a checkpoint on a dataset, plus scatter data.
    Eval(RunArgs),
    /// Monte Carlo effective dimension of a model family.
    Effdim(RunArgs),
    /// Velocity Verlet dynamics on a checkpoint or oracle.
    Md(RunArgs),
    /// Spectrum of a trajectory column or of a QNN's Fourier series.
    Spectrum(RunArgs),
    /// Convert extended XYZ frames to the dataset format.
    Convert(RunArgs),
}

/// Runs one parsed command line and returns its stdout summary.
pub fn run(cli: Cli) -> Result<String> {
    use commands::*;
    let (f, args): (fn(&RunArgs) -> Result<String>, RunArgs) = match cli.command {
        Command::Gen(a) => (cmd_gen, a),
        Command::Train(a) => (cmd_train, a),
        Command::Eval(a) => (cmd_eval, a),
        Command::Effdim(a) => (cmd_effdim, a),
        Command::Md(a) => (cmd_md, a),
        Command::Spectrum(a) => (cmd_spectrum, a),
        Command::Convert(a) => (cmd_convert, a),
    };
    f(&args.resolve()?)
}
