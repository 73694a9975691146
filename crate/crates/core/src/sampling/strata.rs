use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hyperstore::{Event, History, Hyperedge, NodeId, Snapshot};
use crate::par;
use crate::statistics::{CovariateTable, Evaluator, NodeUniverse, StatError, StatMatrix, StatisticSpec};

use super::samplers::{
    enumerate_risk_set, risk_set_size, sample_conditional_size, sample_repeated, sample_unconstrained,
};
use super::{NodePool, RiskSetKind, RiskSetPolicy, SamplingError, Split};

/// One observed event and its controls. Row 0 of `stats` is the case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub event_ordinal: usize,
    pub time: f64,
    pub case: Hyperedge,
    pub controls: Vec<Hyperedge>,
    pub stats: StatMatrix,
    /// Fewer controls than requested were available.
    pub underfilled: bool,
}

impl Stratum {
    pub fn rows(&self) -> usize {
        self.stats.nrows()
    }

    /// Case first, then controls.
    pub fn hyperedges(&self) -> impl Iterator<Item = &Hyperedge> {
        std::iter::once(&self.case).chain(&self.controls)
    }
}

#[derive(Clone, Debug)]
pub struct StrataConfig<'a> {
    pub policy: RiskSetPolicy,
    pub specs: &'a [StatisticSpec],
    pub seed: u64,
    pub split: Split,
    pub universe: NodeUniverse,
    pub covariates: Option<&'a CovariateTable>,
    /// Roster size; defaults to one past the largest node id in the events.
    pub node_count: Option<usize>,
}

impl<'a> StrataConfig<'a> {
    pub fn new(policy: RiskSetPolicy, specs: &'a [StatisticSpec]) -> Self {
        StrataConfig {
            policy,
            specs,
            seed: 0,
            split: Split::All,
            universe: NodeUniverse::Roster,
            covariates: None,
            node_count: None,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn universe(mut self, universe: NodeUniverse) -> Self {
        self.universe = universe;
        self
    }

    pub fn covariates(mut self, covariates: Option<&'a CovariateTable>) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn node_count(mut self, n: usize) -> Self {
        self.node_count = Some(n);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrataSet {
    pub strata: Vec<Stratum>,
    /// Events whose risk set could not supply the controls.
    pub dropped: usize,
    /// Strata kept with fewer controls than requested.
    pub underfilled: usize,
    /// Events outside the requested first/repeated split.
    pub excluded_by_split: usize,
}

impl StrataSet {
    pub fn n_events(&self) -> usize {
        self.strata.len()
    }

    /// Events plus controls.
    pub fn n_observations(&self) -> usize {
        self.strata.iter().map(Stratum::rows).sum()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for one stratum; depends only on its three coordinates.
pub fn stream_rng(seed: u64, replication: u32, ordinal: usize) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ u64::from(replication)) ^ ordinal as u64);
    ChaCha8Rng::seed_from_u64(key)
}

enum Outcome {
    Kept(Stratum),
    Dropped(SamplingError),
    Excluded,
}

/// Sweeps the events in time order and builds one stratum per admitted event.
///
/// Events sharing a timestamp are sampled against the same snapshot, which
/// holds only strictly earlier events, and are pushed together afterwards.
pub fn build_strata(
    events: &[Event],
    directed: bool,
    config: &StrataConfig<'_>,
    replication: u32,
) -> Result<StrataSet, Error> {
    let policy = config.policy;
    policy.validate()?;
    if policy.kind == RiskSetKind::Repeated && config.split != Split::Repeated {
        return Err(SamplingError::InvalidPolicy("repeated risk sets require split = repeated".into()).into());
    }
    let outcomes = !events.is_empty() && events.iter().all(|e| e.outcome.is_some());
    let mut history = if outcomes { History::with_outcomes(directed) } else { History::new(directed) };
    let max_id = events.iter().flat_map(|e| e.hyperedge.nodes()).map(|v| v.index() + 1).max().unwrap_or(0);
    let node_count = config.node_count.unwrap_or(0).max(max_id);
    history = history.with_roster(node_count);
    let roster: Vec<NodeId> = (0..node_count as u32).map(NodeId).collect();

    if policy.kind == RiskSetKind::Full {
        let size = risk_set_size(roster.len(), directed, true).unwrap_or(u128::MAX);
        if policy.pool == NodePool::Roster && size > u128::from(policy.full_bound) {
            return Err(SamplingError::TooLarge { size, bound: policy.full_bound }.into());
        }
    }

    let mut set = StrataSet::default();
    let mut start = 0;
    while start < events.len() {
        let t = events[start].time;
        let end = start + events[start..].iter().take_while(|e| e.time == t).count();
        let group = &events[start..end];
        let snapshot = history.current();
        let pool: Vec<NodeId> = match policy.pool {
            NodePool::Roster => roster.clone(),
            NodePool::Active => {
                let mut p: Vec<NodeId> =
                    snapshot.active_nodes().chain(group.iter().flat_map(|e| e.hyperedge.nodes())).collect();
                p.sort_unstable();
                p.dedup();
                p
            }
        };
        let evaluator = Evaluator::new(snapshot).with_covariates(config.covariates).with_universe(config.universe);
        let built = par::map_range(group.len(), |i| {
            stratum(start + i, &group[i], snapshot, &evaluator, &pool, config, replication)
        });
        for b in built {
            match b? {
                Outcome::Kept(s) => {
                    if s.underfilled {
                        set.underfilled += 1;
                    }
                    set.strata.push(s);
                }
                Outcome::Dropped(e) => {
                    log::debug!("stratum dropped: {e}");
                    set.dropped += 1;
                }
                Outcome::Excluded => set.excluded_by_split += 1,
            }
        }
        for e in group {
            history.push_event(e.clone())?;
        }
        start = end;
    }
    if set.dropped > 0 {
        log::warn!("{} strata dropped: risk set could not supply {} controls", set.dropped, policy.m);
    }
    if set.underfilled > 0 {
        log::warn!("{} strata kept with fewer than {} controls", set.underfilled, policy.m);
    }
    Ok(set)
}

fn stratum(
    ordinal: usize,
    event: &Event,
    snapshot: Snapshot<'_>,
    evaluator: &Evaluator<'_>,
    pool: &[NodeId],
    config: &StrataConfig<'_>,
    replication: u32,
) -> Result<Outcome, Error> {
    let case = &event.hyperedge;
    if !config.split.admits(snapshot.activity(case)) {
        return Ok(Outcome::Excluded);
    }
    let policy = config.policy;
    let mut rng = stream_rng(config.seed, replication, ordinal);
    let mut underfilled = false;
    let drawn = match policy.kind {
        RiskSetKind::Full => {
            let loopless = case.is_directed() && !case.is_loop();
            let size = risk_set_size(pool.len(), case.is_directed(), loopless).unwrap_or(u128::MAX);
            if size > u128::from(policy.full_bound) {
                Err(SamplingError::TooLarge { size, bound: policy.full_bound })
            } else {
                Ok(enumerate_risk_set(pool, case.is_directed(), loopless).into_iter().filter(|h| h != case).collect())
            }
        }
        RiskSetKind::Unconstrained => sample_unconstrained(pool, case, policy.m, &mut rng),
        RiskSetKind::ConditionalSize => sample_conditional_size(pool, case, policy.m, &mut rng),
        RiskSetKind::Repeated => sample_repeated(snapshot, case, policy.m, &mut rng).map(|(c, u)| {
            underfilled = u;
            c
        }),
    };
    let controls: Vec<Hyperedge> = match drawn {
        Ok(c) if !c.is_empty() => c,
        Ok(_) => return Ok(Outcome::Dropped(SamplingError::Exhausted { needed: policy.m.max(1), available: 0 })),
        Err(e) => return Ok(Outcome::Dropped(e)),
    };
    if policy.kind == RiskSetKind::ConditionalSize {
        debug_assert!(controls.iter().all(|c| c.size_pair() == case.size_pair()));
    }
    let mut stats = StatMatrix::new(config.specs.len());
    for (row, h) in std::iter::once(case).chain(&controls).enumerate() {
        let values = evaluator.eval_row(config.specs, h).map_err(|(column, e)| StatError::Batch {
            row,
            column,
            spec: config.specs[column].label.clone(),
            source: Box::new(e),
        })?;
        stats.push_row(&values);
    }
    Ok(Outcome::Kept(Stratum {
        event_ordinal: ordinal,
        time: event.time,
        case: case.clone(),
        controls,
        stats,
        underfilled,
    }))
}
