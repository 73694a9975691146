mod common;

use common::{instance, three_groups, GROUP1, GROUP2, GROUP3};
use proptest::prelude::*;
use rhem::combinatorics::binomial;
use rhem::hyperstore::{Event, History, Hyperedge, NodeId};
use rhem_oracle::{subsets, Past};

fn fixture() -> History {
    History::from_events(false, false, &three_groups()).unwrap()
}

fn ids(h: &Hyperedge) -> (Vec<u32>, Vec<u32>) {
    (h.first().iter().map(|v| v.0).collect(), h.second().iter().map(|v| v.0).collect())
}

#[test]
fn fixture_activity_and_degree() {
    let h = fixture();
    let s = h.current();
    assert_eq!(s.activity(&Hyperedge::of(&GROUP3)), 1);
    assert_eq!(s.activity(&Hyperedge::of(&GROUP2)), 0);
    assert_eq!(s.degree(&Hyperedge::of(&[3, 4])), 1);
    assert_eq!(s.degree(&Hyperedge::of(&[0])), 2);
    assert_eq!(s.degree(&Hyperedge::of(&[0, 1])), 0);
    let profile = s.intersection_profile(&Hyperedge::of(&GROUP2));
    assert_eq!(profile.len(), 3);
    assert!(profile.iter().all(|e| e.shared == 2));
    assert!(s.intersection_profile(&Hyperedge::of(&GROUP1)).iter().all(|e| e.shared == 1));
}

#[test]
fn empty_history_answers_zero() {
    let h = History::new(false).with_roster(4);
    let s = h.current();
    assert_eq!(s.activity(&Hyperedge::of(&[1, 2])), 0);
    assert_eq!(s.degree(&Hyperedge::of(&[1])), 0);
    assert!(s.intersection_profile(&Hyperedge::of(&[0, 3])).is_empty());
}

#[test]
fn out_of_order_push_is_rejected() {
    let mut h = History::new(false);
    for t in [1.0, 1.0, 2.0] {
        h.push_event(Event::new(Hyperedge::of(&[0, 1]), t)).unwrap();
    }
    assert_eq!(h.len(), 3);
    assert!(h.push_event(Event::new(Hyperedge::of(&[0]), 1.5)).is_err());
}

#[test]
fn performance_sums() {
    let events = vec![
        Event::new(Hyperedge::of(&[0, 1]), 1.0).with_outcome(2.0),
        Event::new(Hyperedge::of(&[0, 1]), 2.0).with_outcome(-1.0),
        Event::new(Hyperedge::of(&[0, 1, 2]), 3.0).with_outcome(3.0),
    ];
    let h = History::from_events(false, true, &events).unwrap();
    let s = h.current();
    assert_eq!(s.hyperedge_performance(&Hyperedge::of(&[0, 1])).unwrap(), 1.0);
    assert_eq!(s.hyperedge_performance(&Hyperedge::of(&[1, 2])).unwrap(), 0.0);
    assert_eq!(s.sub_hyperedge_performance(&Hyperedge::of(&[1, 2])).unwrap(), 3.0);
    assert_eq!(h.at(1.0).hyperedge_performance(&Hyperedge::of(&[0, 1])).unwrap(), 0.0);

    assert!(History::from_events(false, false, &events).is_err());
    let bare: Vec<Event> = events.iter().map(|e| Event::new(e.hyperedge.clone(), e.time)).collect();
    let plain = History::from_events(false, false, &bare).unwrap();
    assert!(plain.current().hyperedge_performance(&Hyperedge::of(&[0, 1])).is_err());
}

#[test]
fn directed_degree_is_componentwise() {
    let events = vec![
        Event::new(Hyperedge::of_directed(&[0], &[1, 2]), 1.0),
        Event::new(Hyperedge::of_directed(&[1], &[0, 2]), 2.0),
    ];
    let h = History::from_events(true, false, &events).unwrap();
    let s = h.current();
    assert_eq!(s.degree(&Hyperedge::of_directed(&[0], &[2])), 1);
    assert_eq!(s.degree(&Hyperedge::of_directed(&[2], &[0])), 0);
    assert_eq!(s.count_containing(&[], &[NodeId(2)]), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn queries_match_a_direct_scan(seed in any::<u64>()) {
        let inst = instance(seed, 6, 20, None);
        let history = inst.history();
        let snap = history.at(inst.time);
        let past = Past::new(&inst.events, inst.time);
        let (a, b) = ids(&inst.query);
        prop_assert_eq!(snap.activity(&inst.query), past.activity(&a, &b));
        prop_assert_eq!(snap.degree(&inst.query), past.degree(&a, &b));
        prop_assert!(snap.activity(&inst.query) <= snap.degree(&inst.query));
        for v in 0..inst.nodes as u32 {
            let scan = inst.events.iter().filter(|e| e.time < inst.time && e.hyperedge.first().contains(NodeId(v))).count();
            prop_assert_eq!(snap.first_list(NodeId(v)).len(), scan);
        }
        let perf = past.performance(&a, &b);
        prop_assert!((snap.hyperedge_performance(&inst.query).unwrap() - perf).abs() < 1e-12);
        let sub = past.sub_performance(&a, &b);
        prop_assert!((snap.sub_hyperedge_performance(&inst.query).unwrap() - sub).abs() < 1e-12);
    }

    #[test]
    fn degree_is_anti_monotone(seed in any::<u64>()) {
        let inst = instance(seed, 6, 20, Some(false));
        let history = inst.history();
        let snap = history.at(inst.time);
        let (a, _) = ids(&inst.query);
        let d = snap.degree(&inst.query);
        for k in 1..a.len() {
            for s in subsets(&a, k) {
                prop_assert!(snap.degree(&Hyperedge::of(&s)) >= d);
            }
        }
    }

    #[test]
    fn subset_degree_identity(seed in any::<u64>(), p in 1usize..4) {
        let inst = instance(seed, 6, 20, Some(false));
        let history = inst.history();
        let snap = history.at(inst.time);
        let (a, _) = ids(&inst.query);
        let lhs: usize = subsets(&a, p).iter().map(|s| snap.degree(&Hyperedge::of(s))).sum();
        let rhs: u128 = snap
            .intersection_profile(&inst.query)
            .iter()
            .map(|e| binomial(e.shared.into(), p as u64).unwrap())
            .sum();
        prop_assert_eq!(lhs as u128, rhs);
    }

    #[test]
    fn tied_events_do_not_see_each_other(seed in any::<u64>(), rot in 0usize..5) {
        let inst = instance(seed, 6, 20, None);
        let mut shuffled = inst.events.clone();
        // rotate each block of equal times
        let mut start = 0;
        while start < shuffled.len() {
            let t = shuffled[start].time;
            let end = start + shuffled[start..].iter().take_while(|e| e.time == t).count();
            let len = end - start;
            shuffled[start..end].rotate_left(rot % len);
            start = end;
        }
        let h1 = inst.history();
        let h2 = History::from_events(inst.directed, true, &shuffled).unwrap().with_roster(inst.nodes);
        for t in [1.0, 2.0, 4.5, inst.time, 9.0] {
            let (s1, s2) = (h1.at(t), h2.at(t));
            prop_assert_eq!(s1.activity(&inst.query), s2.activity(&inst.query));
            prop_assert_eq!(s1.degree(&inst.query), s2.degree(&inst.query));
            let mut p1: Vec<_> = s1.intersection_profile(&inst.query).iter().map(|e| (e.shared, e.shared_targets)).collect();
            let mut p2: Vec<_> = s2.intersection_profile(&inst.query).iter().map(|e| (e.shared, e.shared_targets)).collect();
            p1.sort_unstable();
            p2.sort_unstable();
            prop_assert_eq!(p1, p2);
        }
    }
}
