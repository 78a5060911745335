//! Run settings shared by every subcommand.
//!
//! Settings come from command-line flags and, optionally, a TOML file given
//! with `--config`. A key set in the config file overrides the flag of the
//! same name; anything unset in both falls back to the preset default.
//! Config keys are the flag names with `-` replaced by `_`.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::error::{read_text, usage, Error, Result};

macro_rules! run_args {
    ($( $(#[$attr:meta])* $name:ident : $ty:ty ),* $(,)?) => {
        #[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct RunArgs {
            /// TOML file whose keys override the matching flags.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            $( $(#[$attr])* #[arg(long)] pub $name: Option<$ty>, )*
        }

        impl RunArgs {
            /// Fields of `over` that are set replace those of `self`.
            pub fn overlay(self, over: RunArgs) -> RunArgs {
                RunArgs { config: self.config, $( $name: over.$name.or(self.$name), )* }
            }
        }
    };
}

run_args! {
    /// Molecule preset: lih, h2o, h3o or custom.
    preset: String,
    /// Model family: qnn or mlp.
    model: String,
    /// Number of encoding re-uploads D.
    depth: usize,
    /// Pair pattern: none, linear, circular or full.
    entanglement: String,
    /// Highest Z-string degree l.
    degree: usize,
    /// Force weight in the loss.
    chi: f64,
    /// adam or gradient-free.
    optimizer: String,
    /// Optimizer steps, or MD steps for `md`.
    steps: usize,
    seed: u64,
    /// Training samples taken from the data file; the rest validate.
    train_size: usize,
    /// Input dataset (or trajectory for `spectrum`).
    data: PathBuf,
    /// Model checkpoint to write (`train`) or read.
    checkpoint: PathBuf,
    /// Primary output file.
    out: PathBuf,
    /// Adam learning rate.
    lr: f64,
    /// Parameter budget for an MLP topology search.
    budget: usize,
    /// Comma-separated MLP layer widths, input first.
    widths: String,
    /// Internal coordinates for the custom preset, e.g. "bond 0 1;angle 1 0 2".
    coords: String,
    /// Features for the custom preset, e.g. "pi_scale 0;arcsin 0".
    features: String,
    /// Number of samples to generate.
    count: usize,
    /// Mirror LiH samples about the largest bond length.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    mirror: bool,
    /// Smallest sampled bond length (A).
    r_min: f64,
    /// Mirror point and largest sampled bond length (A).
    r_max: f64,
    /// Require forces in the evaluation data.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    forces: bool,
    /// Data-set size n in the effective dimension.
    n: usize,
    /// Parameter draws for the effective dimension.
    draws: usize,
    /// Parameter box: angles ([-pi, pi]) or unit ([-1, 1]).
    domain: String,
    /// Fisher normalization: as-printed or trace-normalized.
    normalization: String,
    /// Worker threads for the effective dimension.
    threads: usize,
    /// Initial bond length for diatomic MD (A).
    r0: f64,
    /// Initial bond velocity for diatomic MD (A/fs).
    v0: f64,
    /// Time step (fs).
    dt: f64,
    /// Column of the trajectory file to analyse (0-based).
    column: usize,
    /// Times the series is tiled before the transform.
    repetitions: usize,
    /// Feature swept for a model spectrum.
    feature: usize,
    /// Grid points per period for a model spectrum.
    grid: usize,
    /// Also write a gnuplot script next to the output.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    plot: bool,
}

pub fn parse_config(text: &str, source_name: &str) -> Result<RunArgs> {
    toml::from_str(text).map_err(|e| Error::Usage(format!("config {source_name}: {}", e.message())))
}

impl RunArgs {
    /// Applies the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<RunArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = parse_config(&read_text(&path)?, &path.display().to_string())?;
        Ok(self.overlay(file))
    }

    pub fn require_data(&self) -> Result<&Path> {
        match &self.data {
            Some(p) => Ok(p),
            None => usage!("--data is required"),
        }
    }

    pub fn require_checkpoint(&self) -> Result<&Path> {
        match &self.checkpoint {
            Some(p) => Ok(p),
            None => usage!("--checkpoint is required"),
        }
    }

    /// Rejects runs that would overwrite one of their own inputs.
    pub fn check_distinct(&self, inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
        for o in outputs {
            if inputs.contains(o) {
                usage!("output {} is also an input", o.display());
            }
        }
        for (i, a) in outputs.iter().enumerate() {
            if outputs[i + 1..].contains(a) {
                usage!("output {} is named twice", a.display());
            }
        }
        Ok(())
    }
}
