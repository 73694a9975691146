use thiserror::Error;

use crate::estimate::EstimateError;
use crate::hyperstore::StoreError;
use crate::sampling::SamplingError;
use crate::simulate::SimError;
use crate::statistics::StatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Umbrella error for pipelines that cross module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Statistic(#[from] StatError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}
