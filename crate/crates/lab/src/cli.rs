//! Command-line flags shared by every experiment subcommand.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::config::{ConfigError, ConfigOverrides, Experiment, NoiseKindName, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "stochfrac", version, about = "Run stochastic Kantorovich and fractional calculus experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition of unity, symmetry and positivity of the kernel
    Kernel(Flags),
    /// L1 Caputo discretization order
    Caputo(Flags),
    /// Sup-error rates of the lattice operator on Hölder fields
    #[command(name = "kantorovich_rates")]
    KantorovichRates(Flags),
    /// Pointwise variance growth with n
    #[command(name = "variance_scaling")]
    VarianceScaling(Flags),
    /// Voronovskaya remainders
    Voronovskaya(Flags),
    /// Sup-error rates and bound of the mollifier
    #[command(name = "mollifier_rates")]
    MollifierRates(Flags),
    /// Bias/variance/MSE decomposition
    Mse(Flags),
    /// Fractional Burgers proxy
    Burgers(Flags),
    /// Energy dissipation convergence
    Dissipation(Flags),
    /// L² convergence of mollification
    L2(Flags),
}

impl Command {
    pub fn split(&self) -> (Experiment, &Flags) {
        match self {
            Command::Kernel(f) => (Experiment::Kernel, f),
            Command::Caputo(f) => (Experiment::Caputo, f),
            Command::KantorovichRates(f) => (Experiment::KantorovichRates, f),
            Command::VarianceScaling(f) => (Experiment::VarianceScaling, f),
            Command::Voronovskaya(f) => (Experiment::Voronovskaya, f),
            Command::MollifierRates(f) => (Experiment::MollifierRates, f),
            Command::Mse(f) => (Experiment::Mse, f),
            Command::Burgers(f) => (Experiment::Burgers, f),
            Command::Dissipation(f) => (Experiment::Dissipation, f),
            Command::L2(f) => (Experiment::L2, f),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a log-log SVG plot
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated resolutions, e.g. 8,16,32,64
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Lattice truncation radius
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Dissipation exponent
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long = "sigma-f")]
    pub sigma_f: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// cell_multiplier or white_noise
    #[arg(long = "noise-kind")]
    pub noise_kind: Option<String>,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Flags {
    pub fn overrides(&self, experiment: Experiment) -> Result<ConfigOverrides, ConfigError> {
        Ok(ConfigOverrides {
            experiment: Some(experiment),
            q: self.q,
            lambda: self.lambda,
            k: self.k,
            alpha: self.alpha,
            s: self.s,
            nu: self.nu,
            sigma_f: self.sigma_f,
            gamma: self.gamma,
            n_list: self.n_list.clone(),
            dim: self.dim,
            points: self.points,
            steps: self.steps,
            sigma: self.sigma,
            seed: self.seed,
            noise_kind: self.noise_kind.as_deref().map(str::parse::<NoiseKindName>).transpose()?,
            replicates: self.replicates,
            workers: self.workers,
            out: self.out.clone(),
            svg: self.svg.then_some(true),
        })
    }

    /// Config file (if any) overlaid with these flags, then defaults.
    pub fn resolve(&self, experiment: Experiment) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        file.merge(self.overrides(experiment)?).resolve()
    }
}
