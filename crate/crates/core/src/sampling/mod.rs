//! Risk sets and case-control strata.
//!
//! A stratum pairs an observed event (the case) with control hyperedges drawn
//! from the risk set at the event time. Controls are drawn with a
//! counter-based random stream derived from `(seed, replication, ordinal)`,
//! so strata do not depend on evaluation order or thread count.

mod samplers;
mod strata;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use samplers::{enumerate_risk_set, risk_set_size, sample_conditional_size, sample_repeated, sample_unconstrained};
pub use strata::{build_strata, stream_rng, StrataConfig, StrataSet, Stratum};

/// Largest risk set that may be enumerated.
pub const DEFAULT_FULL_BOUND: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("risk set exhausted: {needed} controls requested, {available} available")]
    Exhausted { needed: usize, available: u128 },
    #[error("risk set exhausted: no new control after {attempts} draws")]
    TooManyRejections { attempts: usize },
    #[error("empty node pool")]
    EmptyPool,
    #[error("risk set of {size} hyperedges exceeds the enumeration bound {bound}")]
    TooLarge { size: u128, bound: u64 },
    #[error("case hyperedge has no prior event; it belongs to the first-event model")]
    NotRepeated,
    #[error("invalid risk-set policy: {0}")]
    InvalidPolicy(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskSetKind {
    Full,
    #[default]
    Unconstrained,
    ConditionalSize,
    Repeated,
}

impl RiskSetKind {
    pub fn name(self) -> &'static str {
        match self {
            RiskSetKind::Full => "full",
            RiskSetKind::Unconstrained => "unconstrained",
            RiskSetKind::ConditionalSize => "conditional-size",
            RiskSetKind::Repeated => "repeated",
        }
    }
}

impl FromStr for RiskSetKind {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => RiskSetKind::Full,
            "unconstrained" => RiskSetKind::Unconstrained,
            "conditional-size" | "conditional" => RiskSetKind::ConditionalSize,
            "repeated" => RiskSetKind::Repeated,
            other => return Err(SamplingError::InvalidPolicy(format!("unknown risk set `{other}`"))),
        })
    }
}

/// Which nodes hyperedges in the risk set may be built from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodePool {
    /// Nodes that took part in an event at or before the event time.
    #[default]
    Active,
    /// Every node of the roster.
    Roster,
}

impl FromStr for NodePool {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "active" => Ok(NodePool::Active),
            "roster" | "full" => Ok(NodePool::Roster),
            other => Err(SamplingError::InvalidPolicy(format!("unknown node pool `{other}`"))),
        }
    }
}

/// First-event / repeated-event classification by prior activity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    All,
    First,
    Repeated,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::All => "all",
            Split::First => "first",
            Split::Repeated => "repeated",
        }
    }

    pub fn admits(self, prior_activity: usize) -> bool {
        match self {
            Split::All => true,
            Split::First => prior_activity == 0,
            Split::Repeated => prior_activity > 0,
        }
    }
}

impl FromStr for Split {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(Split::All),
            "first" => Ok(Split::First),
            "repeated" => Ok(Split::Repeated),
            other => Err(SamplingError::InvalidPolicy(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RiskSetPolicy {
    pub kind: RiskSetKind,
    /// Controls per event; ignored by `Full`.
    pub m: usize,
    pub pool: NodePool,
    pub full_bound: u64,
}

impl RiskSetPolicy {
    pub fn full() -> Self {
        RiskSetPolicy { kind: RiskSetKind::Full, m: 0, pool: NodePool::Roster, full_bound: DEFAULT_FULL_BOUND }
    }

    pub fn unconstrained(m: usize) -> Self {
        RiskSetPolicy { kind: RiskSetKind::Unconstrained, m, pool: NodePool::Active, full_bound: DEFAULT_FULL_BOUND }
    }

    pub fn conditional_size(m: usize) -> Self {
        RiskSetPolicy { kind: RiskSetKind::ConditionalSize, ..Self::unconstrained(m) }
    }

    pub fn repeated(m: usize) -> Self {
        RiskSetPolicy { kind: RiskSetKind::Repeated, ..Self::unconstrained(m) }
    }

    pub fn with_pool(mut self, pool: NodePool) -> Self {
        self.pool = pool;
        self
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.kind != RiskSetKind::Full && self.m == 0 {
            return Err(SamplingError::InvalidPolicy(format!("{} risk sets need m >= 1", self.kind.name())));
        }
        Ok(())
    }
}

/// Policy tag, e.g. `unconstrained(m=10,pool=active)`. Fits with different
/// tags were estimated on different data.
impl fmt::Display for RiskSetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pool = match self.pool {
            NodePool::Active => "active",
            NodePool::Roster => "roster",
        };
        match self.kind {
            RiskSetKind::Full => write!(f, "full(pool={pool})"),
            RiskSetKind::Repeated => write!(f, "repeated(m={})", self.m),
            k => write!(f, "{}(m={},pool={pool})", k.name(), self.m),
        }
    }
}
