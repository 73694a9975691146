use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::StoreError;

/// Dense node identifier assigned at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between string labels and contiguous [`NodeId`]s.
#[derive(Clone, Debug, Default)]
pub struct NodeRegistry {
    labels: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl NodeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with labels `prefix0 .. prefix{n-1}`.
    pub fn numbered(prefix: &str, n: usize) -> Self {
        let mut r = Self::new();
        for i in 0..n {
            r.intern(&format!("{prefix}{i}"));
        }
        r
    }

    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len() as u32);
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<NodeId> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Sorted, duplicate-free set of nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut v: Vec<NodeId> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    /// Wraps a vector that is already sorted and duplicate-free.
    pub(crate) fn from_sorted(v: Vec<NodeId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        NodeSet(v)
    }

    #[inline]
    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        sorted_intersection_len(&self.0, &other.0) == self.0.len()
    }

    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        sorted_intersection_len(&self.0, &other.0)
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.intersection_len(other) > 0
    }
}

pub(crate) fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// An undirected node set, or a directed pair (sources, targets).
///
/// Both variants hold canonical sorted sets, so derived equality and hashing
/// are set equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hyperedge {
    Undirected(NodeSet),
    Directed { sources: NodeSet, targets: NodeSet },
}

impl Hyperedge {
    pub fn undirected(members: impl IntoIterator<Item = NodeId>) -> Result<Self, StoreError> {
        let set = NodeSet::new(members);
        if set.is_empty() {
            return Err(StoreError::EmptyHyperedge(""));
        }
        Ok(Hyperedge::Undirected(set))
    }

    pub fn directed(
        sources: impl IntoIterator<Item = NodeId>,
        targets: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, StoreError> {
        let sources = NodeSet::new(sources);
        let targets = NodeSet::new(targets);
        if sources.is_empty() {
            return Err(StoreError::EmptyHyperedge(" among the sources"));
        }
        if targets.is_empty() {
            return Err(StoreError::EmptyHyperedge(" among the targets"));
        }
        Ok(Hyperedge::Directed { sources, targets })
    }

    /// Shorthand for tests and fixtures.
    pub fn of(members: &[u32]) -> Self {
        Self::undirected(members.iter().map(|&v| NodeId(v))).expect("non-empty hyperedge")
    }

    /// Shorthand for tests and fixtures.
    pub fn of_directed(sources: &[u32], targets: &[u32]) -> Self {
        Self::directed(sources.iter().map(|&v| NodeId(v)), targets.iter().map(|&v| NodeId(v)))
            .expect("non-empty hyperedge")
    }

    pub fn is_directed(&self) -> bool {
        matches!(self, Hyperedge::Directed { .. })
    }

    pub fn variant_name(&self) -> &'static str {
        if self.is_directed() {
            "directed"
        } else {
            "undirected"
        }
    }

    /// Members of an undirected hyperedge, or sources of a directed one.
    pub fn first(&self) -> &NodeSet {
        match self {
            Hyperedge::Undirected(m) => m,
            Hyperedge::Directed { sources, .. } => sources,
        }
    }

    /// Targets of a directed hyperedge; empty for undirected ones.
    pub fn second(&self) -> &[NodeId] {
        match self {
            Hyperedge::Undirected(_) => &[],
            Hyperedge::Directed { targets, .. } => targets.as_slice(),
        }
    }

    /// Undirected size |h|, or |a| + |b| for directed hyperedges.
    pub fn total_size(&self) -> usize {
        match self {
            Hyperedge::Undirected(m) => m.len(),
            Hyperedge::Directed { sources, targets } => sources.len() + targets.len(),
        }
    }

    /// Undirected: (|h|, 0); directed: (|a|, |b|).
    pub fn size_pair(&self) -> (usize, usize) {
        match self {
            Hyperedge::Undirected(m) => (m.len(), 0),
            Hyperedge::Directed { sources, targets } => (sources.len(), targets.len()),
        }
    }

    /// Sources and targets share at least one node.
    pub fn is_loop(&self) -> bool {
        match self {
            Hyperedge::Undirected(_) => false,
            Hyperedge::Directed { sources, targets } => sources.intersects(targets),
        }
    }

    /// The reverse hyperedge (b, a); undirected hyperedges are returned as is.
    pub fn reversed(&self) -> Hyperedge {
        match self {
            Hyperedge::Undirected(_) => self.clone(),
            Hyperedge::Directed { sources, targets } => {
                Hyperedge::Directed { sources: targets.clone(), targets: sources.clone() }
            }
        }
    }

    /// Containment: `self ⊆ other` (componentwise for directed).
    pub fn is_subset_of(&self, other: &Hyperedge) -> bool {
        match (self, other) {
            (Hyperedge::Undirected(a), Hyperedge::Undirected(b)) => a.is_subset(b),
            (Hyperedge::Directed { sources: a, targets: b }, Hyperedge::Directed { sources: c, targets: d }) => {
                a.is_subset(c) && b.is_subset(d)
            }
            _ => false,
        }
    }

    /// Every node taking part, sources before targets (may repeat for loops).
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.first().iter().chain(self.second().iter().copied())
    }

    pub fn display<'a>(&'a self, registry: &'a NodeRegistry) -> impl fmt::Display + 'a {
        HyperedgeDisplay { h: self, registry }
    }
}

struct HyperedgeDisplay<'a> {
    h: &'a Hyperedge,
    registry: &'a NodeRegistry,
}

impl fmt::Display for HyperedgeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[NodeId]| s.iter().map(|&v| self.registry.label(v)).collect::<Vec<_>>().join(",");
        match self.h {
            Hyperedge::Undirected(m) => write!(f, "{{{}}}", join(m.as_slice())),
            Hyperedge::Directed { sources, targets } => {
                write!(f, "({{{}}} -> {{{}}})", join(sources.as_slice()), join(targets.as_slice()))
            }
        }
    }
}

/// A hyperevent `(h, t, x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub hyperedge: Hyperedge,
    pub time: f64,
    pub event_type: Option<String>,
    pub weight: Option<f64>,
    pub outcome: Option<f64>,
}

impl Event {
    pub fn new(hyperedge: Hyperedge, time: f64) -> Self {
        Event { hyperedge, time, event_type: None, weight: None, outcome: None }
    }

    pub fn with_outcome(mut self, y: f64) -> Self {
        self.outcome = Some(y);
        self
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        self.weight = Some(w);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperedge_equality_is_set_equality() {
        assert_eq!(Hyperedge::of(&[3, 1, 2]), Hyperedge::of(&[1, 2, 3, 3]));
        assert_eq!(Hyperedge::of_directed(&[2, 1], &[5]), Hyperedge::of_directed(&[1, 2], &[5]));
        assert_ne!(Hyperedge::of_directed(&[1], &[2]), Hyperedge::of_directed(&[2], &[1]));
    }

    #[test]
    fn empty_sides_are_rejected() {
        assert!(Hyperedge::undirected([]).is_err());
        assert!(Hyperedge::directed([NodeId(0)], []).is_err());
        assert!(Hyperedge::directed([], [NodeId(0)]).is_err());
    }

    #[test]
    fn loops_and_reversal() {
        let h = Hyperedge::of_directed(&[1, 2], &[2, 3]);
        assert!(h.is_loop());
        assert!(!Hyperedge::of_directed(&[1], &[2]).is_loop());
        assert_eq!(h.reversed(), Hyperedge::of_directed(&[2, 3], &[1, 2]));
        assert_eq!(h.size_pair(), (2, 2));
    }

    #[test]
    fn registry_is_a_bijection() {
        let mut r = NodeRegistry::new();
        let a = r.intern("alice");
        let b = r.intern("bob");
        assert_eq!(r.intern("alice"), a);
        assert_eq!((a, b), (NodeId(0), NodeId(1)));
        assert_eq!(r.label(b), "bob");
        assert_eq!(r.get("carol"), None);
        assert_eq!(format!("{}", Hyperedge::of(&[1, 0]).display(&r)), "{alice,bob}");
    }
}
