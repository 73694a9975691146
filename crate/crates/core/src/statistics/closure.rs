use std::collections::HashMap;

use crate::combinatorics::{binomial_f64, for_each_subset, subsets};
use crate::hyperstore::{Hyperedge, NodeId, Snapshot};

use super::{ClosureVariant, Evaluator};

/// Third-party sets `V'` keyed to the number of events they share with a block.
type Reach = HashMap<Vec<NodeId>, u32>;

#[derive(Clone, Copy)]
enum Side {
    /// block ⊆ sources, `V'` drawn from targets
    Out,
    /// block ⊆ targets, `V'` drawn from sources
    In,
    /// undirected: block ⊆ members, `V'` from the other members
    Both,
}

/// For every past event containing `block` on the given side, counts each
/// `l`-subset of the opposite side minus `block`.
fn reach(snapshot: Snapshot<'_>, block: &[NodeId], side: Side, l: usize) -> Reach {
    let ordinals = match side {
        Side::Out | Side::Both => snapshot.events_containing(block, &[]),
        Side::In => snapshot.events_containing(&[], block),
    };
    let mut map = Reach::new();
    let mut rest = Vec::new();
    for o in ordinals {
        let e = &snapshot.event(o).hyperedge;
        let pool = match side {
            Side::Out => e.second(),
            Side::In | Side::Both => e.first().as_slice(),
        };
        rest.clear();
        rest.extend(pool.iter().copied().filter(|v| block.binary_search(v).is_err()));
        for_each_subset(&rest, l, |s| *map.entry(s.to_vec()).or_insert(0) += 1);
    }
    map
}

/// `Σ_{V'} min(x[V'], y[V'])`; absent keys are zero so only common keys count.
fn overlap(x: &Reach, y: &Reach) -> u64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    small.iter().filter_map(|(k, &a)| large.get(k).map(|&b| u64::from(a.min(b)))).sum()
}

impl Evaluator<'_> {
    pub(super) fn closure(&self, variant: ClosureVariant, h: &Hyperedge, p: usize, q: usize, l: usize) -> f64 {
        let snapshot = self.snapshot();
        let v = self.universe_size();
        if v < p + q + l {
            return 0.0;
        }
        let third = binomial_f64((v - p - q) as u64, l as u64);

        if variant == ClosureVariant::Undirected {
            let members = h.first().as_slice();
            let n = members.len();
            if p + q > n {
                return 0.0;
            }
            let blocks_p = subsets(members, p);
            let reach_p: Vec<Reach> = blocks_p.iter().map(|b| reach(snapshot, b, Side::Both, l)).collect();
            let (blocks_q, reach_q) = if q == p {
                (blocks_p.clone(), reach_p.clone())
            } else {
                let bq = subsets(members, q);
                let rq = bq.iter().map(|b| reach(snapshot, b, Side::Both, l)).collect();
                (bq, rq)
            };
            let mut sum = 0u64;
            for (h1, r1) in blocks_p.iter().zip(&reach_p) {
                if r1.is_empty() {
                    continue;
                }
                for (h2, r2) in blocks_q.iter().zip(&reach_q) {
                    if h2.iter().any(|x| h1.binary_search(x).is_ok()) {
                        continue;
                    }
                    sum += overlap(r1, r2);
                }
            }
            let norm = binomial_f64(n as u64, p as u64) * binomial_f64((n - p) as u64, q as u64) * third;
            return sum as f64 / norm;
        }

        let a = h.first().as_slice();
        let b = h.second();
        if p > a.len() || q > b.len() {
            return 0.0;
        }
        let (side_a, side_b) = match variant {
            ClosureVariant::Transitive => (Side::Out, Side::In),
            ClosureVariant::Cyclic => (Side::In, Side::Out),
            ClosureVariant::SharedReceivers => (Side::Out, Side::Out),
            ClosureVariant::SharedSenders => (Side::In, Side::In),
            ClosureVariant::Undirected => unreachable!(),
        };
        let reach_a: Vec<Reach> = subsets(a, p).iter().map(|s| reach(snapshot, s, side_a, l)).collect();
        let reach_b: Vec<Reach> = subsets(b, q).iter().map(|s| reach(snapshot, s, side_b, l)).collect();
        let mut sum = 0u64;
        for ra in reach_a.iter().filter(|r| !r.is_empty()) {
            for rb in &reach_b {
                sum += overlap(ra, rb);
            }
        }
        let norm = binomial_f64(a.len() as u64, p as u64) * binomial_f64(b.len() as u64, q as u64) * third;
        sum as f64 / norm
    }
}

#[cfg(test)]
mod tests {
    use crate::hyperstore::{Event, History, Hyperedge};
    use crate::statistics::{eval, Evaluator, NodeUniverse, StatisticSpec};

    fn spec(s: &str) -> StatisticSpec {
        s.parse().unwrap()
    }

    #[test]
    fn undirected_common_third_party() {
        let mut h = History::new(false);
        h.push_event(Event::new(Hyperedge::of(&[0, 2]), 0.0)).unwrap();
        h.push_event(Event::new(Hyperedge::of(&[1, 2]), 0.0)).unwrap();
        assert_eq!(eval(&spec("closure(1,1,1)"), &h, &Hyperedge::of(&[0, 1]), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn transitive_path() {
        let mut h = History::new(true);
        h.push_event(Event::new(Hyperedge::of_directed(&[0], &[2]), 0.0)).unwrap();
        h.push_event(Event::new(Hyperedge::of_directed(&[2], &[1]), 0.0)).unwrap();
        let e = Hyperedge::of_directed(&[0], &[1]);
        assert_eq!(eval(&spec("transitive(1,1,1)"), &h, &e, 1.0).unwrap(), 1.0);
        assert_eq!(eval(&spec("cyclic(1,1,1)"), &h, &e, 1.0).unwrap(), 0.0);
        assert_eq!(eval(&spec("sreceivers(1,1,1)"), &h, &e, 1.0).unwrap(), 0.0);
        assert_eq!(eval(&spec("ssenders(1,1,1)"), &h, &e, 1.0).unwrap(), 0.0);
        // reversed path b -> c -> a closes a cycle with a -> b
        assert_eq!(eval(&spec("cyclic(1,1,1)"), &h, &e.reversed(), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn empty_history_is_zero() {
        let h = History::new(false).with_roster(6);
        for s in ["closure(1,1,1)", "closure(2,1,1)", "closure(1,1,2)"] {
            assert_eq!(eval(&spec(s), &h, &Hyperedge::of(&[0, 1, 2]), 0.0).unwrap(), 0.0);
        }
        let d = History::new(true).with_roster(6);
        for s in ["transitive(1,1,1)", "cyclic(1,1,1)", "sreceivers(1,1,1)", "ssenders(1,1,1)"] {
            assert_eq!(eval(&spec(s), &d, &Hyperedge::of_directed(&[0], &[1, 2]), 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn active_universe_shrinks_normalizer() {
        let mut h = History::new(false).with_roster(10);
        h.push_event(Event::new(Hyperedge::of(&[0, 2]), 0.0)).unwrap();
        h.push_event(Event::new(Hyperedge::of(&[1, 2]), 0.0)).unwrap();
        let e = Hyperedge::of(&[0, 1]);
        let s = spec("closure(1,1,1)");
        let roster = Evaluator::new(h.at(1.0)).eval(&s, &e).unwrap();
        let active = Evaluator::new(h.at(1.0)).with_universe(NodeUniverse::Active).eval(&s, &e).unwrap();
        assert_eq!(roster, 2.0 / (2.0 * 8.0));
        assert_eq!(active, 1.0);
    }
}
