//! Sampled Cox partial likelihood, Newton-Raphson fitting, replicated
//! sampling and least-squares outcome models.

mod cox;
mod replicate;
mod rom;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cox::{fit_cox, log_likelihood, CoxOptions, LogLikelihood, StratumRows};
pub use replicate::{fit_replicated, ReplicatedFit, Replication, ReplicationSummary};
pub use rom::{fit_ols, fit_rom, rom_design, RomDesign, RomFit, RomOptions, INTERCEPT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("no strata to fit")]
    NoStrata,
    #[error("stratum {stratum} has no controls")]
    NoControls { stratum: usize },
    #[error("non-finite value of `{spec}` in stratum {stratum}")]
    NonFinite { stratum: usize, spec: String },
    #[error("separation detected: `{spec}` diverges (|theta| > {bound}) while the likelihood keeps improving")]
    Separation { spec: String, bound: f64 },
    #[error("singular information: {0}")]
    SingularInformation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("outcomes not available")]
    OutcomesUnavailable,
    #[error("no observations for the outcome model")]
    NoObservations,
}

/// Significance stars at the 0.05 / 0.01 / 0.001 levels.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Maximum likelihood estimates of a sampled Cox model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub labels: Vec<String>,
    pub theta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    pub log_likelihood: f64,
    /// `2k - 2 logL`; NaN unless converged.
    pub aic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_events: usize,
    /// Events plus sampled controls.
    pub n_observations: usize,
}

impl ModelFit {
    pub fn k(&self) -> usize {
        self.theta.len()
    }
}

pub fn aic(log_likelihood: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}
