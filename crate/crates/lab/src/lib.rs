//! Experiment harness for `stochfrac`: configuration, the experiment
//! catalogue and report writers. The `stochfrac` binary is a thin wrapper.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigError, ConfigOverrides, Experiment, RunConfig};
pub use experiments::{run, Outcome};
pub use output::{render_csv, render_svg, write_outputs};
