//! `ldct` command-line pipeline: simulate → reconstruct → evaluate.
//!
//! Every command reads an optional JSON [`RunConfig`] and applies flag
//! overrides on top. Exit codes: 0 success, 2 config error, 3 data/format
//! error, 4 numerical failure.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_fbp, cmd_gridsearch, cmd_metrics, cmd_phantom, cmd_reconstruct, cmd_simulate};
pub use config::{EdgeAdaptiveConfig, GridConfig, LambdaSource, PairConfig, PhantomConfig, RunConfig, SolverConfig};

use crate::error::Error;
use crate::solvers::FilterKind;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            Error::NonFinite(_) => CliError::Numerical(e.to_string()),
            Error::DimensionMismatch(_) | Error::Format { .. } | Error::Io { .. } => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ldct", version, about = "Low-dose CT simulation and PD3O reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate clean and low-dose sinograms of a phantom or input image.
    Simulate(CommonArgs),
    /// Filtered back projection of a sinogram.
    Fbp(CommonArgs),
    /// FBP followed by PD3O with the configured parameter-map.
    Reconstruct(CommonArgs),
    /// Scalar-λ grid search maximizing mean PSNR.
    Gridsearch(CommonArgs),
    /// PSNR/SSIM of an image against a reference.
    Metrics(MetricsArgs),
    /// Render a synthetic phantom.
    Phantom(PhantomArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scalar regularization weight.
    #[arg(long, group = "lam")]
    pub lambda: Option<f64>,
    /// Parameter-map file (PMAP).
    #[arg(long, group = "lam")]
    pub pmap: Option<PathBuf>,
    /// Edge-adaptive heuristic map (parameters from config or defaults).
    #[arg(long, group = "lam")]
    pub edge_adaptive: bool,
    /// PD3O iteration count.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_enum)]
    pub filter: Option<FilterKind>,
    /// Primal step safety factor in (0, 1].
    #[arg(long)]
    pub relax: Option<f64>,
    /// Input sinogram (SNGM).
    #[arg(long)]
    pub sino: Option<PathBuf>,
    /// Ground-truth image (IMGF).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Input image (IMGF) to simulate instead of a phantom.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Image under test (IMGF).
    #[arg(long)]
    pub image: PathBuf,
    /// Reference image (IMGF).
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub data_range: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PhantomKind {
    SheppLogan,
    Ellipses,
}

#[derive(Debug, Clone, Args)]
pub struct PhantomArgs {
    #[arg(long, value_enum, default_value = "shepp-logan")]
    pub kind: PhantomKind,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, default_value_t = 8)]
    pub n_ellipses: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl CommonArgs {
    /// Loads the config file (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = LambdaSource::Scalar(l);
        }
        if let Some(p) = &self.pmap {
            cfg.lambda = LambdaSource::Pmap(p.clone());
        }
        if self.edge_adaptive && !matches!(cfg.lambda, LambdaSource::EdgeAdaptive(_)) {
            cfg.lambda = LambdaSource::EdgeAdaptive(EdgeAdaptiveConfig::default());
        }
        if let Some(t) = self.iters {
            cfg.solver.iters = t;
        }
        if let Some(f) = self.filter {
            cfg.solver.filter = f;
        }
        if let Some(r) = self.relax {
            cfg.solver.relax = r;
        }
        if let Some(s) = &self.sino {
            cfg.sinogram = Some(s.clone());
        }
        if let Some(t) = &self.truth {
            cfg.ground_truth = Some(t.clone());
        }
        if let Some(i) = &self.input {
            cfg.input_image = Some(i.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a.resolve()?).map(|_| ()),
        Command::Fbp(a) => cmd_fbp(&a.resolve()?).map(|_| ()),
        Command::Reconstruct(a) => cmd_reconstruct(&a.resolve()?).map(|_| ()),
        Command::Gridsearch(a) => cmd_gridsearch(&a.resolve()?).map(|_| ()),
        Command::Metrics(a) => cmd_metrics(&a).map(|_| ()),
        Command::Phantom(a) => cmd_phantom(&a).map(|_| ()),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ldct: {e}");
            e.exit_code()
        }
    }
}
