//! Hyperedge statistics `s(h; t; G[E;t])`.
//!
//! Statistics are evaluated by an [`Evaluator`] bound to a history snapshot.
//! Every statistic reduces to the node-level inverted lists of the snapshot:
//! sub-hyperedge degrees come from the intersection profile of `h`, closure
//! terms from the events containing each candidate sub-hyperedge.

mod closure;
mod covariates;
mod eval;
mod spec;

use thiserror::Error;

pub use covariates::CovariateTable;
pub use eval::{eval, eval_batch, Evaluator, NodeUniverse, StatMatrix};
pub use spec::{Aggregator, Applicability, ClosureVariant, StatKind, StatisticSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("statistic/variant mismatch: `{spec}` is not defined for {variant} hyperedges")]
    VariantMismatch { spec: String, variant: &'static str },
    #[error("loopless required: `{spec}` is only defined for loopless directed hyperedges")]
    LoopRequired { spec: String },
    #[error("`{spec}` needs a covariate table")]
    MissingCovariates { spec: String },
    #[error("unknown covariate attribute `{0}`")]
    UnknownAttribute(String),
    #[error("outcomes not available for `{spec}`")]
    OutcomesUnavailable { spec: String },
    #[error("invalid statistic order: {0}")]
    InvalidOrder(String),
    #[error("statistic parse error: {0}")]
    Parse(String),
    #[error("covariates: {0}")]
    Covariates(String),
    #[error("row {row}, column {column} (`{spec}`): {source}")]
    Batch {
        row: usize,
        column: usize,
        spec: String,
        #[source]
        source: Box<StatError>,
    },
}
