#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhem::hyperstore::{Event, History, Hyperedge};
use rhem::statistics::{CovariateTable, StatisticSpec};

/// A small random event stream together with a query hyperedge and time.
#[derive(Clone, Debug)]
pub struct Instance {
    pub directed: bool,
    pub nodes: usize,
    pub events: Vec<Event>,
    pub query: Hyperedge,
    pub time: f64,
    pub attribute: Vec<f64>,
}

impl Instance {
    pub fn history(&self) -> History {
        History::from_events(self.directed, true, &self.events).unwrap().with_roster(self.nodes)
    }

    pub fn covariates(&self) -> CovariateTable {
        CovariateTable::from_columns(vec![("x".into(), self.attribute.clone())]).unwrap()
    }
}

fn random_set(rng: &mut impl Rng, n: usize, max: usize) -> Vec<u32> {
    loop {
        let s: Vec<u32> = (0..n as u32).filter(|_| rng.random_bool(0.4)).take(max).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

pub fn random_hyperedge(rng: &mut impl Rng, n: usize, directed: bool, loopless: bool) -> Hyperedge {
    if !directed {
        return Hyperedge::of(&random_set(rng, n, n));
    }
    loop {
        let a = random_set(rng, n, n);
        let b = random_set(rng, n, n);
        if !loopless || a.iter().all(|v| !b.contains(v)) {
            return Hyperedge::of_directed(&a, &b);
        }
    }
}

/// Up to `max_nodes` nodes and `max_events` events with tied integer times.
pub fn instance(seed: u64, max_nodes: usize, max_events: usize, directed: Option<bool>) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directed = directed.unwrap_or_else(|| rng.random_bool(0.5));
    let nodes = rng.random_range(3..=max_nodes);
    let n_events = rng.random_range(0..=max_events);
    let mut times: Vec<u32> = (0..n_events).map(|_| rng.random_range(1..=8)).collect();
    times.sort_unstable();
    let events = times
        .into_iter()
        .map(|t| {
            // occasional directed loops in the history
            let loopless = rng.random_bool(0.8);
            let h = random_hyperedge(&mut rng, nodes, directed, loopless);
            Event::new(h, f64::from(t)).with_outcome(rng.random_range(-2.0..3.0))
        })
        .collect();
    let query = random_hyperedge(&mut rng, nodes, directed, true);
    let time = f64::from(rng.random_range(1..=9)) + if rng.random_bool(0.5) { 0.5 } else { 0.0 };
    let attribute = (0..nodes).map(|_| rng.random_range(-1.0..1.0)).collect();
    Instance { directed, nodes, events, query, time, attribute }
}

pub fn specs(items: &[&str]) -> Vec<StatisticSpec> {
    StatisticSpec::parse_list(items).unwrap()
}

/// The three-groups fixture: group 1 never collaborates, group 2 collaborates
/// pairwise, group 3 has one joint event. Nodes: A1 B1 C1 A2 B2 C2 A3 B3 C3.
pub fn three_groups() -> Vec<Event> {
    let (a1, b1, c1, a2, b2, c2, a3, b3, c3) = (0, 1, 2, 3, 4, 5, 6, 7, 8);
    let hs: Vec<Vec<u32>> = vec![
        vec![a1],
        vec![a1],
        vec![b1],
        vec![b1],
        vec![c1],
        vec![c1],
        vec![a2, b2],
        vec![a2, c2],
        vec![b2, c2],
        vec![a3, b3, c3],
        vec![a3],
        vec![b3],
        vec![c3],
    ];
    hs.iter().enumerate().map(|(i, h)| Event::new(Hyperedge::of(h), (i + 1) as f64)).collect()
}

pub const GROUP1: [u32; 3] = [0, 1, 2];
pub const GROUP2: [u32; 3] = [3, 4, 5];
pub const GROUP3: [u32; 3] = [6, 7, 8];

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

const AGGS: [&str; 5] = ["mean", "sum", "min", "max", "sd"];

pub fn undirected_battery() -> Vec<StatisticSpec> {
    let mut items: Vec<String> = ["size", "size2", "repetition", "success", "subsuccess(1)", "subsuccess(2)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for p in 1..=3 {
        items.push(format!("spe({p})"));
        for a in AGGS {
            items.push(format!("subrep({p}):{a}"));
        }
    }
    for a in AGGS {
        items.push(format!("covagg(x):{a}"));
    }
    for c in ["closure(1,1,1)", "closure(2,1,1)", "closure(1,2,1)", "closure(1,1,2)"] {
        items.push(c.into());
    }
    StatisticSpec::parse_list(&items).unwrap()
}

pub fn directed_battery() -> Vec<StatisticSpec> {
    let mut items: Vec<String> =
        ["nsources", "ntargets", "repetition", "reciprocation", "success", "switch(1)", "switch(2)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    for (p, q) in [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (1, 2), (0, 2)] {
        for a in AGGS {
            items.push(format!("subrep({p},{q}):{a}"));
            items.push(format!("subrecip({p},{q}):{a}"));
        }
    }
    for a in AGGS {
        items.push(format!("covagg(x):{a}"));
    }
    for v in ["transitive", "cyclic", "sreceivers", "ssenders"] {
        for o in ["(1,1,1)", "(2,1,1)", "(1,2,1)", "(1,1,2)"] {
            items.push(format!("{v}{o}"));
        }
    }
    StatisticSpec::parse_list(&items).unwrap()
}

pub fn battery(directed: bool) -> Vec<StatisticSpec> {
    if directed {
        directed_battery()
    } else {
        undirected_battery()
    }
}
