//! Forward simulation of event streams from known parameters.
//!
//! At every step one hyperedge is drawn from a candidate set with
//! probability proportional to `exp(theta · s(h))`, statistics taken against
//! the running history. Times are the integers `1..=N`.

mod generators;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{binomial, subsets};
use crate::hyperstore::{Event, History, Hyperedge, NodeId, NodeSet, StoreError};
use crate::sampling::{enumerate_risk_set, DEFAULT_FULL_BOUND};
use crate::statistics::{Evaluator, StatError, StatisticSpec};

pub use generators::{make_coauthor_like, make_meeting_like, CoauthorConfig, MEETING_EVENTS, MEETING_NODES};

/// Largest roster for the `Full` candidate policy.
pub const MAX_FULL_NODES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("empty candidate set at step {step}")]
    EmptyCandidates { step: usize },
    #[error("non-finite linear predictor at step {step}; consider standardizing the statistics")]
    Overflow { step: usize },
    #[error(transparent)]
    Statistic(#[from] StatError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// Every non-empty hyperedge over the roster.
    Full,
    /// All hyperedges of size `sizes[i % len]` at step `i`.
    ConditionalSize { sizes: Vec<usize> },
    /// Distinct hyperedges with prior events; with probability `epsilon` (and
    /// whenever the history is empty) a fresh uniform hyperedge with size
    /// drawn from `sizes` is used instead.
    RepeatedPlusInnovation { epsilon: f64, sizes: Vec<usize> },
}

/// Linear-normal outcome: `y = b0 + Σ b_j s_j(h) + N(0, noise_sd)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub specs: Vec<StatisticSpec>,
    /// Intercept first.
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub node_count: usize,
    pub event_count: usize,
    pub directed: bool,
    pub specs: Vec<StatisticSpec>,
    pub theta: Vec<f64>,
    pub policy: CandidatePolicy,
    pub outcome: Option<OutcomeModel>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.theta.len() != self.specs.len() {
            return bad(format!("{} parameters for {} statistics", self.theta.len(), self.specs.len()));
        }
        if self.node_count == 0 {
            return bad("node_count must be positive".into());
        }
        if let Some(s) = self.specs.iter().find(|s| !s.kind.applies_to(self.directed)) {
            return bad(format!("`{}` does not apply to this network", s.label));
        }
        match &self.policy {
            CandidatePolicy::Full if self.node_count > MAX_FULL_NODES => {
                bad(format!("full candidate sets need at most {MAX_FULL_NODES} nodes"))
            }
            CandidatePolicy::ConditionalSize { sizes } | CandidatePolicy::RepeatedPlusInnovation { sizes, .. }
                if sizes.is_empty() || sizes.iter().any(|&k| k == 0 || k > self.node_count) =>
            {
                bad("sizes must be non-empty and within 1..=node_count".into())
            }
            CandidatePolicy::ConditionalSize { .. } if self.directed => {
                bad("conditional-size simulation is undirected only".into())
            }
            CandidatePolicy::ConditionalSize { sizes } => {
                match sizes.iter().map(|&k| binomial(self.node_count as u64, k as u64)).max().flatten() {
                    Some(c) if c <= u128::from(DEFAULT_FULL_BOUND) => Ok(()),
                    _ => bad("conditional-size candidate set too large to enumerate".into()),
                }
            }
            CandidatePolicy::RepeatedPlusInnovation { epsilon, .. } if !(0.0..=1.0).contains(epsilon) => {
                bad(format!("epsilon {epsilon} outside [0, 1]"))
            }
            _ => Ok(()),
        }?;
        if let Some(o) = &self.outcome {
            if o.coefficients.len() != o.specs.len() + 1 {
                return bad("outcome model needs an intercept plus one coefficient per statistic".into());
            }
            if o.noise_sd.is_nan() || o.noise_sd < 0.0 {
                return bad("outcome noise sd must be non-negative".into());
            }
        }
        Ok(())
    }
}

/// `softmax(theta · s(h))` over `candidates`.
pub fn selection_probabilities(
    evaluator: &Evaluator<'_>,
    specs: &[StatisticSpec],
    theta: &[f64],
    candidates: &[Hyperedge],
) -> Result<Option<Vec<f64>>, StatError> {
    let stats = evaluator.eval_batch(specs, candidates)?;
    let eta: Vec<f64> = stats.rows().map(|r| r.iter().zip(theta).map(|(s, t)| s * t).sum()).collect();
    if eta.iter().any(|e| !e.is_finite()) {
        return Ok(None);
    }
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = eta.iter().map(|e| (e - max).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(Some(w.into_iter().map(|x| x / z).collect()))
}

fn pick<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn fresh<R: Rng>(rng: &mut R, n: usize, k: usize, directed: bool) -> Hyperedge {
    let nodes: Vec<NodeId> = rand::seq::index::sample(rng, n, k).into_iter().map(|i| NodeId(i as u32)).collect();
    if directed && k >= 2 {
        let split = rng.random_range(1..k);
        Hyperedge::Directed {
            sources: NodeSet::new(nodes[..split].to_vec()),
            targets: NodeSet::new(nodes[split..].to_vec()),
        }
    } else if directed {
        let other = loop {
            let v = rng.random_range(0..n as u32);
            if n == 1 || v != nodes[0].0 {
                break NodeId(v);
            }
        };
        Hyperedge::Directed { sources: NodeSet::new(nodes), targets: NodeSet::new([other]) }
    } else {
        Hyperedge::Undirected(NodeSet::new(nodes))
    }
}

/// Simulates `event_count` events.
pub fn simulate(config: &SimConfig) -> Result<Vec<Event>, SimError> {
    config.validate()?;
    let n = config.node_count;
    let roster: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history =
        if config.outcome.is_some() { History::with_outcomes(config.directed) } else { History::new(config.directed) }
            .with_roster(n);
    let full = match config.policy {
        CandidatePolicy::Full => enumerate_risk_set(&roster, config.directed, true),
        _ => Vec::new(),
    };
    let by_size: Vec<Vec<Hyperedge>> = match &config.policy {
        CandidatePolicy::ConditionalSize { sizes } => {
            let max = sizes.iter().copied().max().unwrap_or(0);
            (0..=max)
                .map(|k| {
                    if sizes.contains(&k) {
                        subsets(&roster, k).into_iter().map(|s| Hyperedge::Undirected(NodeSet::new(s))).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect()
        }
        _ => Vec::new(),
    };
    let noise = match &config.outcome {
        Some(o) => Some(Normal::new(0.0, o.noise_sd).map_err(|e| SimError::InvalidConfig(e.to_string()))?),
        None => None,
    };

    let mut events = Vec::with_capacity(config.event_count);
    for step in 0..config.event_count {
        let snapshot = history.current();
        let evaluator = Evaluator::new(snapshot);
        let chosen = match &config.policy {
            CandidatePolicy::Full => choose(&evaluator, config, &full, step, &mut rng)?,
            CandidatePolicy::ConditionalSize { sizes } => {
                choose(&evaluator, config, &by_size[sizes[step % sizes.len()]], step, &mut rng)?
            }
            CandidatePolicy::RepeatedPlusInnovation { epsilon, sizes } => {
                let prior = snapshot.distinct_hyperedges();
                if prior.is_empty() || rng.random::<f64>() < *epsilon {
                    let k = sizes[rng.random_range(0..sizes.len())];
                    fresh(&mut rng, n, k, config.directed)
                } else {
                    choose(&evaluator, config, prior, step, &mut rng)?
                }
            }
        };
        let mut event = Event::new(chosen, (step + 1) as f64);
        if let (Some(model), Some(noise)) = (&config.outcome, &noise) {
            let s: Vec<f64> =
                model.specs.iter().map(|sp| evaluator.eval(sp, &event.hyperedge)).collect::<Result<_, _>>()?;
            let mean = model.coefficients[0] + s.iter().zip(&model.coefficients[1..]).map(|(a, b)| a * b).sum::<f64>();
            event = event.with_outcome(mean + noise.sample(&mut rng));
        }
        history.push_event(event.clone())?;
        events.push(event);
    }
    Ok(events)
}

fn choose<R: Rng>(
    evaluator: &Evaluator<'_>,
    config: &SimConfig,
    candidates: &[Hyperedge],
    step: usize,
    rng: &mut R,
) -> Result<Hyperedge, SimError> {
    if candidates.is_empty() {
        return Err(SimError::EmptyCandidates { step });
    }
    let probs = selection_probabilities(evaluator, &config.specs, &config.theta, candidates)?
        .ok_or(SimError::Overflow { step })?;
    Ok(candidates[pick(rng, &probs)].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(policy: CandidatePolicy, specs: Vec<StatisticSpec>, theta: Vec<f64>) -> SimConfig {
        SimConfig { node_count: 6, event_count: 50, directed: false, specs, theta, policy, outcome: None, seed: 3 }
    }

    #[test]
    fn rejects_bad_configs() {
        let c = config(CandidatePolicy::Full, vec![StatisticSpec::size()], vec![]);
        assert!(c.validate().is_err());
        let mut c = config(CandidatePolicy::Full, vec![], vec![]);
        c.node_count = 21;
        assert!(c.validate().is_err());
        let c = config(CandidatePolicy::RepeatedPlusInnovation { epsilon: 1.5, sizes: vec![2] }, vec![], vec![]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn streams_are_ordered_and_reproducible() {
        let c = config(
            CandidatePolicy::ConditionalSize { sizes: vec![2, 3] },
            vec![StatisticSpec::sub_repetition(1)],
            vec![0.3],
        );
        let a = simulate(&c).unwrap();
        assert_eq!(a.len(), 50);
        assert!(a.windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.iter().enumerate().all(|(i, e)| e.hyperedge.total_size() == [2, 3][i % 2]));
        assert_eq!(a, simulate(&c).unwrap());
    }

    #[test]
    fn innovation_policy_seeds_history() {
        let mut c = config(
            CandidatePolicy::RepeatedPlusInnovation { epsilon: 0.3, sizes: vec![1, 2, 3] },
            vec![StatisticSpec::repetition()],
            vec![1.0],
        );
        c.outcome =
            Some(OutcomeModel { specs: vec![StatisticSpec::size()], coefficients: vec![1.0, 0.5], noise_sd: 0.1 });
        let events = simulate(&c).unwrap();
        assert!(events.iter().all(|e| e.outcome.is_some()));
        let distinct: std::collections::HashSet<_> = events.iter().map(|e| &e.hyperedge).collect();
        assert!(distinct.len() < events.len());
    }

    #[test]
    fn directed_full_policy() {
        let c = SimConfig {
            node_count: 3,
            event_count: 20,
            directed: true,
            specs: vec!["reciprocation".parse().unwrap()],
            theta: vec![1.0],
            policy: CandidatePolicy::Full,
            outcome: None,
            seed: 1,
        };
        assert!(simulate(&c).unwrap().iter().all(|e| e.hyperedge.is_directed()));
    }
}
