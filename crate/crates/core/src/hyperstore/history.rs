use std::collections::HashMap;

use super::{Event, Hyperedge, NodeId, StoreError};

/// Append-only event log with per-node inverted lists.
///
/// Undirected histories keep one list per node (events the node takes part
/// in). Directed histories keep two: events where the node is a source and
/// events where it is a target. Lists hold event ordinals and are sorted
/// because events are pushed in time order.
#[derive(Clone, Debug)]
pub struct History {
    directed: bool,
    outcomes: bool,
    events: Vec<Event>,
    node_count: usize,
    first_lists: Vec<Vec<u32>>,
    second_lists: Vec<Vec<u32>>,
    slots: HashMap<Hyperedge, u32>,
    edge_records: Vec<EdgeRecord>,
    distinct: Vec<Hyperedge>,
    distinct_first: Vec<u32>,
    activation: Vec<(NodeId, u32)>,
    seen: Vec<bool>,
}

#[derive(Clone, Debug, Default)]
struct EdgeRecord {
    ordinals: Vec<u32>,
    // running sum of outcomes, aligned with `ordinals`
    cumulative: Vec<f64>,
}

/// One past event overlapping a focal hyperedge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileEntry {
    pub ordinal: u32,
    /// |h ∩ h_e| (undirected) or |a ∩ a_e| (directed).
    pub shared: u32,
    /// |b ∩ b_e| for directed hyperedges, 0 otherwise.
    pub shared_targets: u32,
    pub outcome: Option<f64>,
}

impl History {
    pub fn new(directed: bool) -> Self {
        History {
            directed,
            outcomes: false,
            events: Vec::new(),
            node_count: 0,
            first_lists: Vec::new(),
            second_lists: Vec::new(),
            slots: HashMap::new(),
            edge_records: Vec::new(),
            distinct: Vec::new(),
            distinct_first: Vec::new(),
            activation: Vec::new(),
            seen: Vec::new(),
        }
    }

    /// History whose events all carry a relational outcome.
    pub fn with_outcomes(directed: bool) -> Self {
        History { outcomes: true, ..Self::new(directed) }
    }

    /// Declares a roster of `n` nodes up front (ids `0..n`).
    pub fn with_roster(mut self, n: usize) -> Self {
        self.ensure_nodes(n);
        self
    }

    /// Builds a history by pushing every event in order.
    pub fn from_events(directed: bool, outcomes: bool, events: &[Event]) -> Result<Self, StoreError> {
        let mut h = if outcomes { Self::with_outcomes(directed) } else { Self::new(directed) };
        for e in events {
            h.push_event(e.clone())?;
        }
        Ok(h)
    }

    fn ensure_nodes(&mut self, n: usize) {
        if n > self.node_count {
            self.node_count = n;
            self.first_lists.resize_with(n, Vec::new);
            if self.directed {
                self.second_lists.resize_with(n, Vec::new);
            }
            self.seen.resize(n, false);
        }
    }

    pub fn push_event(&mut self, event: Event) -> Result<(), StoreError> {
        let ordinal = self.events.len();
        if !event.time.is_finite() {
            return Err(StoreError::NonFiniteTime { ordinal, time: event.time });
        }
        if let Some(last) = self.events.last() {
            if event.time < last.time {
                return Err(StoreError::OutOfOrder { ordinal, time: event.time, previous: last.time });
            }
        }
        if event.hyperedge.is_directed() != self.directed {
            return Err(StoreError::VariantMismatch {
                ordinal,
                expected: if self.directed { "directed" } else { "undirected" },
                found: event.hyperedge.variant_name(),
            });
        }
        if event.outcome.is_some() != self.outcomes {
            return Err(StoreError::OutcomeMismatch { ordinal, declared: self.outcomes });
        }
        let max_id = event.hyperedge.nodes().map(|v| v.index()).max().unwrap_or(0);
        self.ensure_nodes(max_id + 1);

        let o = ordinal as u32;
        for v in event.hyperedge.first().iter() {
            self.first_lists[v.index()].push(o);
        }
        for &v in event.hyperedge.second() {
            self.second_lists[v.index()].push(o);
        }
        for v in event.hyperedge.nodes() {
            if !self.seen[v.index()] {
                self.seen[v.index()] = true;
                self.activation.push((v, o));
            }
        }
        let slot = match self.slots.get(&event.hyperedge) {
            Some(&s) => s as usize,
            None => {
                let s = self.distinct.len();
                self.slots.insert(event.hyperedge.clone(), s as u32);
                self.distinct.push(event.hyperedge.clone());
                self.distinct_first.push(o);
                self.edge_records.push(EdgeRecord::default());
                s
            }
        };
        let rec = &mut self.edge_records[slot];
        let prev = rec.cumulative.last().copied().unwrap_or(0.0);
        rec.ordinals.push(o);
        rec.cumulative.push(prev + event.outcome.unwrap_or(0.0));
        self.events.push(event);
        Ok(())
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_outcomes(&self) -> bool {
        self.outcomes
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Size of the node roster (declared or seen).
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn last_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.time)
    }

    /// View of the network of past events strictly before `t`.
    pub fn at(&self, t: f64) -> Snapshot<'_> {
        let cutoff = self.events.partition_point(|e| e.time < t);
        Snapshot { history: self, cutoff, time: t }
    }

    /// View containing every pushed event.
    pub fn current(&self) -> Snapshot<'_> {
        Snapshot { history: self, cutoff: self.events.len(), time: f64::INFINITY }
    }

    pub fn activity(&self, h: &Hyperedge, t: f64) -> usize {
        self.at(t).activity(h)
    }

    pub fn degree(&self, h: &Hyperedge, t: f64) -> usize {
        self.at(t).degree(h)
    }

    pub fn intersection_profile(&self, h: &Hyperedge, t: f64) -> Vec<ProfileEntry> {
        self.at(t).intersection_profile(h)
    }

    pub fn hyperedge_performance(&self, h: &Hyperedge, t: f64) -> Result<f64, StoreError> {
        self.at(t).hyperedge_performance(h)
    }

    pub fn sub_hyperedge_performance(&self, h: &Hyperedge, t: f64) -> Result<f64, StoreError> {
        self.at(t).sub_hyperedge_performance(h)
    }
}

/// Read-only view of a [`History`] restricted to events with `t_e < t`.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    history: &'a History,
    cutoff: usize,
    time: f64,
}

impl<'a> Snapshot<'a> {
    pub fn history(&self) -> &'a History {
        self.history
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of visible events; ordinals `0..cutoff`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn node_count(&self) -> usize {
        self.history.node_count
    }

    pub fn is_directed(&self) -> bool {
        self.history.directed
    }

    pub fn event(&self, ordinal: u32) -> &'a Event {
        debug_assert!((ordinal as usize) < self.cutoff);
        &self.history.events[ordinal as usize]
    }

    fn restrict(&self, list: &'a [u32]) -> &'a [u32] {
        let end = list.partition_point(|&o| (o as usize) < self.cutoff);
        &list[..end]
    }

    /// Visible events in which `v` takes part (as a source, if directed).
    pub fn first_list(&self, v: NodeId) -> &'a [u32] {
        match self.history.first_lists.get(v.index()) {
            Some(l) => self.restrict(l),
            None => &[],
        }
    }

    /// Visible events in which `v` is a target (directed histories only).
    pub fn second_list(&self, v: NodeId) -> &'a [u32] {
        match self.history.second_lists.get(v.index()) {
            Some(l) => self.restrict(l),
            None => &[],
        }
    }

    /// Number of past events on exactly `h`.
    pub fn activity(&self, h: &Hyperedge) -> usize {
        match self.history.slots.get(h) {
            Some(&s) => self.restrict(&self.history.edge_records[s as usize].ordinals).len(),
            None => 0,
        }
    }

    /// Σ y_e over past events on exactly `h`.
    pub fn hyperedge_performance(&self, h: &Hyperedge) -> Result<f64, StoreError> {
        if !self.history.outcomes {
            return Err(StoreError::OutcomesUnavailable);
        }
        Ok(match self.history.slots.get(h) {
            Some(&s) => {
                let rec = &self.history.edge_records[s as usize];
                let n = self.restrict(&rec.ordinals).len();
                if n == 0 {
                    0.0
                } else {
                    rec.cumulative[n - 1]
                }
            }
            None => 0.0,
        })
    }

    /// Number of past events whose hyperedge contains `h` (componentwise when
    /// directed).
    pub fn degree(&self, h: &Hyperedge) -> usize {
        self.count_containing(h.first().as_slice(), h.second())
    }

    /// Σ y_e over past events whose hyperedge contains `h`.
    pub fn sub_hyperedge_performance(&self, h: &Hyperedge) -> Result<f64, StoreError> {
        if !self.history.outcomes {
            return Err(StoreError::OutcomesUnavailable);
        }
        Ok(self
            .events_containing(h.first().as_slice(), h.second())
            .into_iter()
            .map(|o| self.history.events[o as usize].outcome.unwrap_or(0.0))
            .sum())
    }

    fn gather_lists(&self, first: &[NodeId], second: &[NodeId]) -> Vec<&'a [u32]> {
        let mut lists: Vec<&[u32]> =
            first.iter().map(|&v| self.first_list(v)).chain(second.iter().map(|&v| self.second_list(v))).collect();
        lists.sort_by_key(|l| l.len());
        lists
    }

    /// Count of visible events containing every node of `first` (on the
    /// source side, when directed) and of `second` (target side).
    ///
    /// Either slice may be empty; with both empty every visible event counts.
    pub fn count_containing(&self, first: &[NodeId], second: &[NodeId]) -> usize {
        let lists = self.gather_lists(first, second);
        match lists.len() {
            0 => self.cutoff,
            1 => lists[0].len(),
            _ => {
                let mut n = 0;
                intersect(&lists, |_| n += 1);
                n
            }
        }
    }

    /// Ordinals of visible events containing `first` and `second`, ascending.
    pub fn events_containing(&self, first: &[NodeId], second: &[NodeId]) -> Vec<u32> {
        let lists = self.gather_lists(first, second);
        match lists.len() {
            0 => (0..self.cutoff as u32).collect(),
            1 => lists[0].to_vec(),
            _ => {
                let mut out = Vec::with_capacity(lists[0].len());
                intersect(&lists, |o| out.push(o));
                out
            }
        }
    }

    /// Every past event sharing at least one node with `h` (for directed
    /// hyperedges: a source with `a` or a target with `b`), with overlap sizes.
    pub fn intersection_profile(&self, h: &Hyperedge) -> Vec<ProfileEntry> {
        let mut tagged: Vec<(u32, bool)> = Vec::new();
        for v in h.first().iter() {
            tagged.extend(self.first_list(v).iter().map(|&o| (o, false)));
        }
        for &v in h.second() {
            tagged.extend(self.second_list(v).iter().map(|&o| (o, true)));
        }
        tagged.sort_unstable();
        let mut out: Vec<ProfileEntry> = Vec::new();
        for (o, is_target) in tagged {
            let entry = match out.last_mut() {
                Some(e) if e.ordinal == o => e,
                _ => {
                    out.push(ProfileEntry {
                        ordinal: o,
                        shared: 0,
                        shared_targets: 0,
                        outcome: self.history.events[o as usize].outcome,
                    });
                    out.last_mut().unwrap()
                }
            };
            if is_target {
                entry.shared_targets += 1;
            } else {
                entry.shared += 1;
            }
        }
        out
    }

    /// Distinct hyperedges with at least one visible event, in order of first
    /// occurrence.
    pub fn distinct_hyperedges(&self) -> &'a [Hyperedge] {
        let n = self.history.distinct_first.partition_point(|&o| (o as usize) < self.cutoff);
        &self.history.distinct[..n]
    }

    /// Position of `h` in [`Self::distinct_hyperedges`], if it is active.
    pub fn distinct_slot(&self, h: &Hyperedge) -> Option<usize> {
        let s = *self.history.slots.get(h)? as usize;
        let first = self.history.distinct_first[s] as usize;
        (first < self.cutoff).then_some(s)
    }

    /// Nodes that took part in a visible event, in order of first appearance.
    pub fn active_nodes(&self) -> impl Iterator<Item = NodeId> + 'a {
        let cutoff = self.cutoff;
        self.history.activation.iter().take_while(move |&&(_, o)| (o as usize) < cutoff).map(|&(v, _)| v)
    }

    pub fn active_node_count(&self) -> usize {
        self.history.activation.partition_point(|&(_, o)| (o as usize) < self.cutoff)
    }
}

// Walks the smallest list and gallops through the others.
fn intersect(lists: &[&[u32]], mut emit: impl FnMut(u32)) {
    let (head, rest) = lists.split_first().expect("at least one list");
    let mut cursors = vec![0usize; rest.len()];
    'outer: for &o in head.iter() {
        for (list, pos) in rest.iter().zip(cursors.iter_mut()) {
            *pos = gallop(list, *pos, o);
            if *pos >= list.len() {
                return;
            }
            if list[*pos] != o {
                continue 'outer;
            }
        }
        emit(o);
    }
}

// First index >= `from` whose value is >= `target`.
fn gallop(list: &[u32], from: usize, target: u32) -> usize {
    let mut lo = from;
    let mut step = 1;
    let mut hi = from;
    while hi < list.len() && list[hi] < target {
        lo = hi + 1;
        hi += step;
        step *= 2;
    }
    let hi = hi.min(list.len());
    lo + list[lo..hi].partition_point(|&x| x < target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(members: &[u32], t: f64) -> Event {
        Event::new(Hyperedge::of(members), t)
    }

    #[test]
    fn push_rejects_out_of_order() {
        let mut h = History::new(false);
        h.push_event(ev(&[0], 1.0)).unwrap();
        h.push_event(ev(&[1], 1.0)).unwrap();
        h.push_event(ev(&[0, 1], 2.0)).unwrap();
        let err = h.push_event(ev(&[2], 1.5)).unwrap_err();
        assert_eq!(err, StoreError::OutOfOrder { ordinal: 3, time: 1.5, previous: 2.0 });
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn push_into_empty_history() {
        let mut h = History::new(false);
        h.push_event(ev(&[4, 2], 0.0)).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.node_count(), 5);
    }

    #[test]
    fn variant_and_outcome_contracts() {
        let mut h = History::new(false);
        assert!(matches!(
            h.push_event(Event::new(Hyperedge::of_directed(&[0], &[1]), 0.0)),
            Err(StoreError::VariantMismatch { .. })
        ));
        assert!(matches!(h.push_event(ev(&[0], 0.0).with_outcome(1.0)), Err(StoreError::OutcomeMismatch { .. })));
        assert!(matches!(h.push_event(ev(&[0], f64::NAN)), Err(StoreError::NonFiniteTime { .. })));
        assert_eq!(h.hyperedge_performance(&Hyperedge::of(&[0]), 1.0), Err(StoreError::OutcomesUnavailable));
    }

    #[test]
    fn strictly_before_semantics() {
        let mut h = History::new(false);
        h.push_event(ev(&[0, 1], 1.0)).unwrap();
        h.push_event(ev(&[0, 1], 2.0)).unwrap();
        let e = Hyperedge::of(&[0, 1]);
        assert_eq!(h.activity(&e, 1.0), 0);
        assert_eq!(h.activity(&e, 1.5), 1);
        assert_eq!(h.activity(&e, 2.0), 1);
        assert_eq!(h.activity(&e, f64::INFINITY), 2);
        assert_eq!(h.degree(&Hyperedge::of(&[0]), 2.5), 2);
    }

    #[test]
    fn empty_history_queries() {
        let h = History::new(false);
        let e = Hyperedge::of(&[0, 1]);
        assert_eq!(h.activity(&e, 10.0), 0);
        assert_eq!(h.degree(&e, 10.0), 0);
        assert!(h.intersection_profile(&e, 10.0).is_empty());
    }

    #[test]
    fn directed_degree_is_componentwise() {
        let mut h = History::new(true);
        h.push_event(Event::new(Hyperedge::of_directed(&[0, 1], &[2, 3]), 1.0)).unwrap();
        h.push_event(Event::new(Hyperedge::of_directed(&[2], &[0]), 2.0)).unwrap();
        let s = h.current();
        assert_eq!(s.degree(&Hyperedge::of_directed(&[0], &[3])), 1);
        assert_eq!(s.degree(&Hyperedge::of_directed(&[2], &[3])), 0);
        assert_eq!(s.count_containing(&[], &[NodeId(0)]), 1);
        assert_eq!(s.count_containing(&[], &[]), 2);
        let profile = s.intersection_profile(&Hyperedge::of_directed(&[0], &[2]));
        assert_eq!(profile.len(), 1);
        assert_eq!((profile[0].shared, profile[0].shared_targets), (1, 1));
    }

    #[test]
    fn distinct_and_active_prefixes() {
        let mut h = History::new(false);
        h.push_event(ev(&[0], 1.0)).unwrap();
        h.push_event(ev(&[1, 2], 2.0)).unwrap();
        h.push_event(ev(&[0], 3.0)).unwrap();
        let s = h.at(2.5);
        assert_eq!(s.distinct_hyperedges().len(), 2);
        assert_eq!(s.active_node_count(), 3);
        assert_eq!(h.at(1.5).active_nodes().collect::<Vec<_>>(), vec![NodeId(0)]);
        assert_eq!(h.at(1.0).distinct_hyperedges().len(), 0);
        assert_eq!(s.distinct_slot(&Hyperedge::of(&[1, 2])), Some(1));
        assert_eq!(h.at(1.5).distinct_slot(&Hyperedge::of(&[1, 2])), None);
    }

    #[test]
    fn gallop_finds_lower_bound() {
        let l = [1, 3, 5, 7, 9, 11, 13];
        for from in 0..l.len() {
            for t in 0..15 {
                let expect = from + l[from..].partition_point(|&x| x < t);
                assert_eq!(gallop(&l, from, t), expect);
            }
        }
    }
}
