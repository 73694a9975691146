mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{instance, specs, three_groups};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rhem::hyperstore::{Event, History, Hyperedge, NodeId};
use rhem::sampling::{
    build_strata, enumerate_risk_set, sample_conditional_size, sample_repeated, sample_unconstrained, NodePool,
    RiskSetPolicy, SamplingError, Split, StrataConfig,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn pool(n: u32) -> Vec<NodeId> {
    (0..n).map(NodeId).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper-tail p-value of Pearson's statistic against equal expected counts.
fn chi_square_p(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn unconstrained_sizes_center_on_half_the_pool() {
    let p = pool(23);
    let case = Hyperedge::of(&[0]);
    let controls = sample_unconstrained(&p, &case, 10_000, &mut rng(1)).unwrap();
    let mean = controls.iter().map(Hyperedge::total_size).sum::<usize>() as f64 / 1e4;
    assert!((mean - 11.5).abs() < 0.2, "{mean}");
    assert!(sample_unconstrained(&[NodeId(0)], &case, 0, &mut rng(1)).unwrap().is_empty());
}

#[test]
fn three_node_enumeration() {
    assert_eq!(enumerate_risk_set(&pool(3), false, false).len(), 7);
    assert_eq!(enumerate_risk_set(&pool(3), true, true).len(), 12);
}

#[test]
fn unconstrained_exhaustion_boundary() {
    let case = Hyperedge::of(&[0, 1]);
    let all = sample_unconstrained(&pool(3), &case, 6, &mut rng(2)).unwrap();
    assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 6);
    assert!(!all.contains(&case));
    assert!(matches!(sample_unconstrained(&pool(3), &case, 7, &mut rng(2)), Err(SamplingError::Exhausted { .. })));
}

#[test]
fn unconstrained_marginals_match_exact_enumeration() {
    // exact marginal inclusion of each node under uniform choice among non-case subsets
    let p = pool(4);
    let case = Hyperedge::of(&[0, 1, 2]);
    let support: Vec<Hyperedge> = enumerate_risk_set(&p, false, false).into_iter().filter(|h| *h != case).collect();
    let exact: Vec<f64> = (0..4)
        .map(|v| support.iter().filter(|h| h.first().contains(NodeId(v))).count() as f64 / support.len() as f64)
        .collect();
    let draws = 20_000;
    let mut hits = [0usize; 4];
    let mut r = rng(3);
    for _ in 0..draws {
        let h = &sample_unconstrained(&p, &case, 1, &mut r).unwrap()[0];
        for v in h.first().iter() {
            hits[v.index()] += 1;
        }
    }
    for v in 0..4 {
        let q = exact[v];
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        let got = hits[v] as f64 / draws as f64;
        assert!((got - q).abs() < 4.0 * se, "node {v}: {got} vs {q}");
    }
}

#[test]
fn directed_controls_stay_loopless() {
    let case = Hyperedge::of_directed(&[0, 1], &[2]);
    let controls = sample_unconstrained(&pool(6), &case, 200, &mut rng(4)).unwrap();
    assert!(controls.iter().all(|h| h.is_directed() && !h.is_loop()));
    let same = sample_conditional_size(&pool(6), &case, 30, &mut rng(4)).unwrap();
    assert!(same.iter().all(|h| h.size_pair() == (2, 1) && !h.is_loop()));
}

#[test]
fn conditional_size_examples() {
    let p = pool(5);
    assert!(matches!(
        sample_conditional_size(&p, &Hyperedge::of(&[0, 1, 2, 3, 4]), 1, &mut rng(5)),
        Err(SamplingError::Exhausted { .. })
    ));
    let case = Hyperedge::of(&[1, 3]);
    let controls = sample_conditional_size(&p, &case, 9, &mut rng(5)).unwrap();
    let set: BTreeSet<_> = controls.iter().collect();
    assert_eq!(set.len(), 9);
    assert!(!set.contains(&case) && controls.iter().all(|h| h.total_size() == 2));
}

#[test]
fn conditional_size_is_uniform() {
    let p = pool(6);
    let case = Hyperedge::of(&[0, 1]);
    let mut counts: BTreeMap<Hyperedge, usize> = BTreeMap::new();
    let mut r = rng(6);
    for _ in 0..10_000 {
        *counts.entry(sample_conditional_size(&p, &case, 1, &mut r).unwrap()[0].clone()).or_default() += 1;
    }
    assert_eq!(counts.len(), 14);
    let pv = chi_square_p(&counts.values().copied().collect::<Vec<_>>());
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn repeated_examples() {
    let events = vec![Event::new(Hyperedge::of(&[0, 1]), 1.0), Event::new(Hyperedge::of(&[2]), 2.0)];
    let h = History::from_events(false, false, &events).unwrap();
    let (controls, under) = sample_repeated(h.current(), &Hyperedge::of(&[0, 1]), 1, &mut rng(7)).unwrap();
    assert_eq!(controls, vec![Hyperedge::of(&[2])]);
    assert!(!under);
    assert!(matches!(
        sample_repeated(h.current(), &Hyperedge::of(&[0]), 1, &mut rng(7)),
        Err(SamplingError::NotRepeated)
    ));

    let h = History::from_events(false, false, &three_groups()).unwrap();
    let s = h.current();
    assert_eq!(s.distinct_hyperedges().len(), 10);
    let case = Hyperedge::of(&[6, 7, 8]);
    let (controls, under) = sample_repeated(s, &case, 20, &mut rng(8)).unwrap();
    assert!(under);
    assert_eq!(controls.len(), 9);
    assert!(!controls.contains(&case));

    let mut counts: BTreeMap<Hyperedge, usize> = BTreeMap::new();
    let mut r = rng(9);
    for _ in 0..10_000 {
        *counts.entry(sample_repeated(s, &case, 1, &mut r).unwrap().0[0].clone()).or_default() += 1;
    }
    assert_eq!(counts.len(), 9);
    let pv = chi_square_p(&counts.values().copied().collect::<Vec<_>>());
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn full_policy_equals_exhaustive_enumeration() {
    let sp = specs(&["subrep(1)"]);
    for seed in 0..5 {
        let inst = instance(seed, 7, 15, Some(false));
        let cfg = StrataConfig::new(RiskSetPolicy::full(), &sp).node_count(inst.nodes);
        let set = build_strata(&inst.events, false, &cfg, 0).unwrap();
        let roster: Vec<u32> = (0..inst.nodes as u32).collect();
        let everything: BTreeSet<Hyperedge> = rhem_oracle::all_hyperedges(&roster).into_iter().collect();
        for st in &set.strata {
            let got: BTreeSet<Hyperedge> = st.controls.iter().cloned().collect();
            assert_eq!(got.len(), st.controls.len());
            let mut want = everything.clone();
            want.remove(&st.case);
            assert_eq!(got, want);
        }
    }
}

#[test]
fn strata_obey_policy_constraints() {
    let sp = specs(&["size"]);
    for seed in 0..10 {
        let inst = instance(seed, 8, 25, Some(false));
        let history_nodes = |t: f64| -> BTreeSet<u32> {
            inst.events.iter().filter(|e| e.time <= t).flat_map(|e| e.hyperedge.nodes().map(|v| v.0)).collect()
        };
        let cfg = StrataConfig::new(RiskSetPolicy::conditional_size(3), &sp).seed(seed);
        let set = build_strata(&inst.events, false, &cfg, 0).unwrap();
        let mut previous: BTreeSet<u32> = BTreeSet::new();
        for st in &set.strata {
            assert!(!st.controls.contains(&st.case));
            assert_eq!(st.controls.iter().collect::<BTreeSet<_>>().len(), st.controls.len());
            assert!(st.controls.iter().all(|h| h.total_size() == st.case.total_size()));
            // active pool: nodes seen at or before the event time, growing over events
            let active = history_nodes(st.time);
            assert!(st.controls.iter().flat_map(|h| h.nodes()).all(|v| active.contains(&v.0)));
            assert!(previous.is_subset(&active));
            previous = active;
            assert_eq!(st.stats.get(0, 0), st.case.total_size() as f64);
        }
    }
}

#[test]
fn repeated_policy_strata() {
    let sp = specs(&["repetition"]);
    let events = three_groups();
    let cfg = StrataConfig::new(RiskSetPolicy::repeated(2), &sp).split(Split::Repeated).seed(1);
    let set = build_strata(&events, false, &cfg, 0).unwrap();
    // the first repeat ({A1} again) has no other eligible hyperedge yet
    assert_eq!(set.strata.len(), 2);
    assert_eq!(set.dropped, 1);
    assert_eq!(set.excluded_by_split, 10);
    for st in &set.strata {
        let h = History::from_events(false, false, &events).unwrap();
        let snap = h.at(st.time);
        assert!(st.controls.iter().all(|c| snap.activity(c) > 0));
    }
}

#[test]
fn roster_pool_draws_from_every_node() {
    let sp = specs(&["size"]);
    let events: Vec<Event> = (0..20).map(|i| Event::new(Hyperedge::of(&[0, 1]), f64::from(i))).collect();
    let policy = RiskSetPolicy::unconstrained(5).with_pool(NodePool::Roster);
    let set = build_strata(&events, false, &StrataConfig::new(policy, &sp).node_count(6), 0).unwrap();
    let used: BTreeSet<u32> =
        set.strata.iter().flat_map(|s| &s.controls).flat_map(|h| h.nodes().map(|v| v.0)).collect();
    assert_eq!(used, (0..6).collect());
}
