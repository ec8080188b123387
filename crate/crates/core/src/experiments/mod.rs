//! Experiment drivers behind the command-line tool.
//!
//! Every command takes an [`ExperimentConfig`], writes its files under
//! `config.out` and returns an [`Outcome`]. Exit codes: 0 success, 2
//! configuration error, 3 numerical failure, 4 threshold violation in
//! self-test mode.

mod commands;
pub mod config;
mod figures;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use commands::{errordist, hamdev, order, simulate, structure_check, SimulateOptions};
pub use config::{parse_config, ConfigError, ExperimentConfig, MethodChoice};
pub use figures::{figure_curves, figures, FigureCurve, FigureId};

use crate::integrators::IntegrateError;
use crate::limit::LimitError;
use crate::modified::ModifiedError;
use crate::montecarlo::MonteCarloError;
use crate::noise::NoiseError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("numerical failure: {0}")]
    MonteCarlo(#[from] MonteCarloError),
    #[error("numerical failure: {0}")]
    Integrate(#[from] IntegrateError),
    #[error("numerical failure: {0}")]
    Limit(#[from] LimitError),
    #[error("numerical failure: {0}")]
    Modified(#[from] ModifiedError),
    #[error("numerical failure: {0}")]
    Noise(#[from] NoiseError),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io(_) => 2,
            ExperimentError::MonteCarlo(MonteCarloError::OffGrid(_) | MonteCarloError::InvalidConfig(_)) => 2,
            ExperimentError::Limit(LimitError::OffGrid(_)) => 2,
            _ => 3,
        }
    }
}

/// Result of a successful command run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
    /// Set when a self-test threshold was violated.
    pub violation: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violation.is_some() {
            4
        } else {
            0
        }
    }
}
