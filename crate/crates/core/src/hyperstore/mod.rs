//! Event data model and the incremental index over past events.
//!
//! A [`History`] is an append-only, time-ordered log of hyperevents with
//! per-node inverted lists. All queries go through a [`Snapshot`] taken at a
//! time `t` and only see events with `t_e < t`, so events sharing a timestamp
//! never see each other.

mod history;
mod hyperedge;
pub mod io;

use thiserror::Error;

pub use history::{History, ProfileEntry, Snapshot};
pub use hyperedge::{Event, Hyperedge, NodeId, NodeRegistry, NodeSet};

/// Default cap on the number of participants per side of an ingested event.
pub const DEFAULT_MAX_EVENT_SIZE: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("event {ordinal} at time {time} precedes the previous event at time {previous}")]
    OutOfOrder { ordinal: usize, time: f64, previous: f64 },
    #[error("event {ordinal} has non-finite time {time}")]
    NonFiniteTime { ordinal: usize, time: f64 },
    #[error("hyperedge must have at least one node{0}")]
    EmptyHyperedge(&'static str),
    #[error("event {ordinal}: {found} hyperedge pushed into a {expected} history")]
    VariantMismatch { ordinal: usize, expected: &'static str, found: &'static str },
    #[error("event {ordinal}: outcome must be {} for this history", if *.declared { "present" } else { "absent" })]
    OutcomeMismatch { ordinal: usize, declared: bool },
    #[error("outcomes not available")]
    OutcomesUnavailable,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e.to_string())
    }
}
