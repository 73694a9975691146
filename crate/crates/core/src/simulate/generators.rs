use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::hyperstore::{Event, Hyperedge, NodeId, NodeSet};

pub const MEETING_NODES: usize = 23;
pub const MEETING_EVENTS: usize = 886;

fn set(nodes: impl IntoIterator<Item = u32>) -> Hyperedge {
    Hyperedge::Undirected(NodeSet::new(nodes.into_iter().map(NodeId)))
}

/// A cabinet-meeting-like stream over 23 nodes: mostly one-to-one meetings
/// with a few heavily used nodes, recurring full or near-full sessions,
/// standing committees with absences and occasional mid-size groups.
pub fn make_meeting_like(seed: u64) -> Vec<Event> {
    let n = MEETING_NODES as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(f64::from(n), 1.1).expect("valid zipf");
    let mut rank: Vec<u32> = (0..n).collect();
    for i in (1..rank.len()).rev() {
        rank.swap(i, rng.random_range(0..=i));
    }
    let committees: Vec<Vec<u32>> = (0..6)
        .map(|_| {
            let k = rng.random_range(2..=5);
            let mut c: Vec<u32> = index::sample(&mut rng, MEETING_NODES, k).into_iter().map(|i| i as u32).collect();
            c.sort_unstable();
            c
        })
        .collect();

    let mut hyperedges = Vec::with_capacity(MEETING_EVENTS);
    // introductory round: every node meets alone once, in random order
    let mut intro: Vec<u32> = (0..n).collect();
    for i in (1..intro.len()).rev() {
        intro.swap(i, rng.random_range(0..=i));
    }
    hyperedges.extend(intro.into_iter().map(|v| set([v])));

    while hyperedges.len() < MEETING_EVENTS {
        let u: f64 = rng.random();
        let h = if u < 0.55 {
            let r = zipf.sample(&mut rng) as usize - 1;
            set([rank[r]])
        } else if u < 0.72 {
            let absent = if rng.random_bool(0.4) { 0 } else { rng.random_range(1..=4) };
            let out: Vec<u32> = index::sample(&mut rng, MEETING_NODES, absent).into_iter().map(|i| i as u32).collect();
            set((0..n).filter(|v| !out.contains(v)))
        } else if u < 0.92 {
            let c = &committees[rng.random_range(0..committees.len())];
            let present: Vec<u32> = c.iter().copied().filter(|_| rng.random_bool(0.85)).collect();
            if present.len() < 2 {
                set(c.iter().copied())
            } else {
                set(present)
            }
        } else {
            let k = rng.random_range(6..=12);
            set(index::sample(&mut rng, MEETING_NODES, k).into_iter().map(|i| i as u32))
        };
        hyperedges.push(h);
    }
    hyperedges.into_iter().enumerate().map(|(i, h)| Event::new(h, (i + 1) as f64)).collect()
}

/// Shape of a co-authorship-like stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoauthorConfig {
    pub events: usize,
    pub nodes: usize,
    pub mean_size: f64,
    pub max_size: usize,
    /// Share of events that repeat an earlier author team.
    pub repeat_share: f64,
    /// Number of distinct time stamps ("years").
    pub periods: usize,
    pub seed: u64,
}

impl Default for CoauthorConfig {
    fn default() -> Self {
        CoauthorConfig {
            events: 100_000,
            nodes: 100_000,
            mean_size: 8.0,
            max_size: 100,
            repeat_share: 0.12,
            periods: 40,
            seed: 1,
        }
    }
}

/// Undirected stream with outcomes. Teams mix previously active authors with
/// newcomers; a share of events re-uses a team from an earlier period.
/// Outcomes depend on team size and on whether the team is repeated.
pub fn make_coauthor_like(config: &CoauthorConfig) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sizes = Poisson::new((config.mean_size - 1.0).max(1e-9)).expect("valid poisson");
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let per_period = config.events.div_ceil(config.periods.max(1));
    let n = config.nodes;

    let mut events: Vec<Event> = Vec::with_capacity(config.events);
    let mut closed = 0; // events from earlier periods
    let mut active: Vec<u32> = Vec::new();
    let mut seen = vec![false; n];
    for i in 0..config.events {
        let period = i / per_period;
        if i % per_period == 0 {
            closed = i;
        }
        let repeat = closed > 0 && rng.random::<f64>() < config.repeat_share;
        let (h, repeated) = if repeat {
            (events[rng.random_range(0..closed)].hyperedge.clone(), true)
        } else {
            let k = (1 + sizes.sample(&mut rng) as usize).min(config.max_size).min(n);
            let mut members: Vec<u32> = Vec::with_capacity(k);
            while members.len() < k {
                let v = if !active.is_empty() && rng.random_bool(0.5) {
                    active[rng.random_range(0..active.len())]
                } else {
                    rng.random_range(0..n as u32)
                };
                if !members.contains(&v) {
                    members.push(v);
                }
            }
            (set(members), false)
        };
        for v in h.nodes() {
            if !seen[v.index()] {
                seen[v.index()] = true;
                active.push(v.0);
            }
        }
        let k = h.total_size() as f64;
        let y = 1.0 + 0.3 * (1.0 + k).ln() + if repeated { 0.5 } else { 0.0 } + noise.sample(&mut rng);
        events.push(Event::new(h, (period + 1) as f64).with_outcome(y));
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meeting_stream_shape() {
        let events = make_meeting_like(7);
        assert_eq!(events.len(), MEETING_EVENTS);
        let singles = events.iter().filter(|e| e.hyperedge.total_size() == 1).count();
        assert!(singles as f64 >= 0.4 * events.len() as f64);
        let large = events.iter().filter(|e| e.hyperedge.total_size() >= 19).count();
        assert!(large > 50);
        assert!(events.iter().all(|e| e.hyperedge.nodes().all(|v| v.index() < MEETING_NODES)));
        assert_eq!(events, make_meeting_like(7));
        assert_ne!(events, make_meeting_like(8));
    }

    #[test]
    fn coauthor_stream_shape() {
        let cfg = CoauthorConfig { events: 5_000, nodes: 5_000, periods: 10, ..Default::default() };
        let events = make_coauthor_like(&cfg);
        assert_eq!(events.len(), 5_000);
        assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
        let mean = events.iter().map(|e| e.hyperedge.total_size()).sum::<usize>() as f64 / 5_000.0;
        assert!((mean - 8.0).abs() < 0.5, "{mean}");
        assert!(events.iter().all(|e| e.outcome.is_some()));
    }
}
