//! Relational hyperevent models (RHEM) and relational outcome models (ROM).
//!
//! The crate is organised bottom-up:
//!
//! - [`hyperstore`]: the event data model and the incremental index over past
//!   events (activity, degree, intersection profiles, performance sums).
//! - [`statistics`]: hyperedge statistics evaluated against a history snapshot.
//! - [`sampling`]: risk-set construction and case-control strata.
//! - [`estimate`]: sampled Cox partial likelihood, Newton-Raphson fitting,
//!   replicated sampling and least-squares outcome models.
//! - [`simulate`]: generative samplers for synthetic event streams.
//!
//! With the default `parallel` feature, batch evaluation, stratum scoring,
//! likelihood terms and replications fan out over rayon. Every reduction is
//! performed in a fixed order, so results are bit-identical regardless of the
//! number of worker threads (or with the feature disabled).

pub mod combinatorics;
pub mod error;
pub mod estimate;
pub mod hyperstore;
mod par;
pub mod sampling;
pub mod simulate;
pub mod statistics;

pub use error::{Error, Result};
pub use estimate::{fit_cox, fit_replicated, fit_rom, log_likelihood, CoxOptions, ModelFit, RomFit};
pub use hyperstore::{Event, History, Hyperedge, NodeId, NodeRegistry};
pub use sampling::{build_strata, RiskSetPolicy, Stratum};
pub use statistics::{StatKind, StatisticSpec};
