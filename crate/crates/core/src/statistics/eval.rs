use std::cell::OnceCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_f64, for_each_subset};
use crate::hyperstore::{History, Hyperedge, NodeId, ProfileEntry, Snapshot};
use crate::par;

use super::{Aggregator, CovariateTable, StatError, StatKind, StatisticSpec};

/// Node set `V` used in closure normalizers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeUniverse {
    /// Every node of the roster.
    #[default]
    Roster,
    /// Nodes that took part in an event strictly before `t`.
    Active,
}

/// Row-major matrix of statistic values, one row per hyperedge.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl StatMatrix {
    pub fn new(ncols: usize) -> Self {
        StatMatrix { nrows: 0, ncols, data: Vec::new() }
    }

    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut m = StatMatrix::new(ncols);
        for r in rows {
            m.push_row(&r);
        }
        m
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.ncols, "row width");
        self.data.extend_from_slice(row);
        self.nrows += 1;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.nrows).map(|i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Evaluates statistics against one history snapshot.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    snapshot: Snapshot<'a>,
    covariates: Option<&'a CovariateTable>,
    universe: NodeUniverse,
}

/// Lazily computed per-hyperedge data shared across statistics.
struct Focal<'h> {
    h: &'h Hyperedge,
    profile: OnceCell<Vec<ProfileEntry>>,
    reverse: OnceCell<(Hyperedge, Vec<ProfileEntry>)>,
}

impl<'h> Focal<'h> {
    fn new(h: &'h Hyperedge) -> Self {
        Focal { h, profile: OnceCell::new(), reverse: OnceCell::new() }
    }
}

/// Evaluates one statistic at time `t` with default settings (roster
/// universe, no covariates).
pub fn eval(spec: &StatisticSpec, history: &History, h: &Hyperedge, t: f64) -> Result<f64, StatError> {
    Evaluator::new(history.at(t)).eval(spec, h)
}

/// `|hs| × |specs|` matrix of statistic values at time `t`.
pub fn eval_batch(
    specs: &[StatisticSpec],
    history: &History,
    hs: &[Hyperedge],
    t: f64,
) -> Result<StatMatrix, StatError> {
    Evaluator::new(history.at(t)).eval_batch(specs, hs)
}

impl<'a> Evaluator<'a> {
    pub fn new(snapshot: Snapshot<'a>) -> Self {
        Evaluator { snapshot, covariates: None, universe: NodeUniverse::Roster }
    }

    pub fn with_covariates(mut self, covariates: Option<&'a CovariateTable>) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn with_universe(mut self, universe: NodeUniverse) -> Self {
        self.universe = universe;
        self
    }

    pub fn snapshot(&self) -> Snapshot<'a> {
        self.snapshot
    }

    pub(super) fn universe_size(&self) -> usize {
        match self.universe {
            NodeUniverse::Roster => self.snapshot.node_count(),
            NodeUniverse::Active => self.snapshot.active_node_count(),
        }
    }

    /// Checks that `spec` is defined for `h` and that its inputs exist.
    pub fn check(&self, spec: &StatisticSpec, h: &Hyperedge) -> Result<(), StatError> {
        if !spec.kind.applies_to(h.is_directed()) {
            return Err(StatError::VariantMismatch { spec: spec.label.clone(), variant: h.variant_name() });
        }
        match &spec.kind {
            StatKind::SwitchReciprocation(_) | StatKind::Closure { .. } if h.is_loop() => {
                return Err(StatError::LoopRequired { spec: spec.label.clone() })
            }
            StatKind::CovariateAggregate(attr) => {
                let table = self.covariates.ok_or_else(|| StatError::MissingCovariates { spec: spec.label.clone() })?;
                table.attribute(attr).ok_or_else(|| StatError::UnknownAttribute(attr.clone()))?;
            }
            k if k.needs_outcomes() && !self.snapshot.history().has_outcomes() => {
                return Err(StatError::OutcomesUnavailable { spec: spec.label.clone() })
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, spec: &StatisticSpec, h: &Hyperedge) -> Result<f64, StatError> {
        self.eval_focal(spec, &Focal::new(h))
    }

    /// Values of every spec on one hyperedge; errors carry the column index.
    pub fn eval_row(&self, specs: &[StatisticSpec], h: &Hyperedge) -> Result<Vec<f64>, (usize, StatError)> {
        let focal = Focal::new(h);
        specs.iter().enumerate().map(|(j, s)| self.eval_focal(s, &focal).map_err(|e| (j, e))).collect()
    }

    pub fn eval_batch(&self, specs: &[StatisticSpec], hs: &[Hyperedge]) -> Result<StatMatrix, StatError> {
        let rows = par::map(hs, |h| self.eval_row(specs, h));
        let mut m = StatMatrix::new(specs.len());
        for (i, r) in rows.into_iter().enumerate() {
            match r {
                Ok(row) => m.push_row(&row),
                Err((j, e)) => {
                    return Err(StatError::Batch {
                        row: i,
                        column: j,
                        spec: specs[j].label.clone(),
                        source: Box::new(e),
                    })
                }
            }
        }
        Ok(m)
    }

    fn profile<'f>(&self, focal: &'f Focal<'_>) -> &'f [ProfileEntry] {
        focal.profile.get_or_init(|| self.snapshot.intersection_profile(focal.h))
    }

    fn reverse<'f>(&self, focal: &'f Focal<'_>) -> &'f (Hyperedge, Vec<ProfileEntry>) {
        focal.reverse.get_or_init(|| {
            let r = focal.h.reversed();
            let p = self.snapshot.intersection_profile(&r);
            (r, p)
        })
    }

    fn eval_focal(&self, spec: &StatisticSpec, focal: &Focal<'_>) -> Result<f64, StatError> {
        self.check(spec, focal.h)?;
        let h = focal.h;
        let s = self.snapshot;
        let agg = spec.aggregator;
        Ok(match &spec.kind {
            StatKind::Size => h.first().len() as f64,
            StatKind::SizeSquared => (h.first().len() as f64).powi(2),
            StatKind::NumSources => h.first().len() as f64,
            StatKind::NumTargets => h.second().len() as f64,
            StatKind::Repetition => s.activity(h) as f64,
            StatKind::Reciprocation => s.activity(&h.reversed()) as f64,
            &StatKind::SubRepetition(p) => self.sub_degree(h, p, 0, agg, || self.profile(focal)),
            &StatKind::SubRepetitionDirected(p, q) => self.sub_degree(h, p, q, agg, || self.profile(focal)),
            &StatKind::SubReciprocation(p, q) => {
                let (rev, _) = self.reverse(focal);
                self.sub_degree(rev, p, q, agg, || &self.reverse(focal).1)
            }
            &StatKind::SharedPriorEvents(p) => self.profile(focal).iter().filter(|e| e.shared >= p).count() as f64,
            &StatKind::SwitchReciprocation(l) => self.switch_reciprocation(h, l as usize),
            &StatKind::Closure { variant, p, q, l } => self.closure(variant, h, p as usize, q as usize, l as usize),
            StatKind::CovariateAggregate(attr) => {
                let column = self.covariates.and_then(|c| c.attribute(attr)).expect("checked");
                let mut nodes: Vec<NodeId> = h.nodes().collect();
                nodes.sort_unstable();
                nodes.dedup();
                let values: Vec<f64> = nodes.iter().map(|v| column[v.index()]).collect();
                aggregate(&values, 0.0, agg)
            }
            StatKind::PriorHyperedgeSuccess => {
                let n = s.activity(h);
                if n == 0 {
                    0.0
                } else {
                    s.hyperedge_performance(h).expect("checked") / n as f64
                }
            }
            &StatKind::PriorSubHyperedgeSuccess(p) => {
                let (mut num, mut den) = (0.0, 0u128);
                for e in self.profile(focal) {
                    let c = binomial(e.shared.into(), p.into()).expect("small binomial");
                    if c > 0 {
                        num += e.outcome.unwrap_or(0.0) * c as f64;
                        den += c;
                    }
                }
                if den == 0 {
                    0.0
                } else {
                    num / den as f64
                }
            }
        })
    }

    /// Aggregate of `degree((a', b'))` over all `p`-subsets `a'` of the first
    /// side and `q`-subsets `b'` of the second side of `h`.
    fn sub_degree<'f>(
        &self,
        h: &Hyperedge,
        p: u32,
        q: u32,
        agg: Aggregator,
        profile: impl FnOnce() -> &'f [ProfileEntry],
    ) -> f64 {
        let first = h.first().as_slice();
        let second = h.second();
        let (p, q) = (p as usize, q as usize);
        if p > first.len() || q > second.len() {
            return 0.0;
        }
        let total = binomial_f64(first.len() as u64, p as u64) * binomial_f64(second.len() as u64, q as u64);

        // single-node sub-hyperedges: degrees are list lengths
        if (p, q) == (1, 0) || (p, q) == (0, 1) {
            let values: Vec<f64> = if p == 1 {
                first.iter().map(|&v| self.snapshot.first_list(v).len() as f64).collect()
            } else {
                second.iter().map(|&v| self.snapshot.second_list(v).len() as f64).collect()
            };
            return aggregate(&values, 0.0, agg);
        }

        let profile = profile();
        if matches!(agg, Aggregator::Mean | Aggregator::Sum) {
            // each past event contributes C(|a∩a_e|, p)·C(|b∩b_e|, q) sub-hyperedges
            let mut acc: u128 = 0;
            for e in profile {
                let c1 = binomial(e.shared.into(), p as u64).expect("small binomial");
                let c2 = binomial(e.shared_targets.into(), q as u64).expect("small binomial");
                acc += c1 * c2;
            }
            let sum = acc as f64;
            return if agg == Aggregator::Sum { sum } else { sum / total };
        }

        let mut counts: BTreeMap<(Vec<u16>, Vec<u16>), u32> = BTreeMap::new();
        for e in profile {
            if (e.shared as usize) < p || (e.shared_targets as usize) < q {
                continue;
            }
            let ev = &self.snapshot.event(e.ordinal).hyperedge;
            let pos1 = positions(first, ev.first().as_slice());
            let pos2 = positions(second, ev.second());
            for_each_subset(&pos1, p, |s1| {
                for_each_subset(&pos2, q, |s2| {
                    *counts.entry((s1.to_vec(), s2.to_vec())).or_insert(0) += 1;
                });
            });
        }
        let values: Vec<f64> = counts.values().map(|&c| c as f64).collect();
        aggregate(&values, total - values.len() as f64, agg)
    }

    fn switch_reciprocation(&self, h: &Hyperedge, l: usize) -> f64 {
        let a = h.first().as_slice();
        let b = h.second();
        if l > a.len() || l > b.len() {
            return 0.0;
        }
        let mut sum: u64 = 0;
        for_each_subset(a, l, |a_out| {
            for_each_subset(b, l, |b_out| {
                // a' = a \ a'' ∪ b'', b' = b \ b'' ∪ a''
                let mut sources: Vec<NodeId> = a.iter().copied().filter(|v| !a_out.contains(v)).collect();
                sources.extend_from_slice(b_out);
                sources.sort_unstable();
                let mut targets: Vec<NodeId> = b.iter().copied().filter(|v| !b_out.contains(v)).collect();
                targets.extend_from_slice(a_out);
                targets.sort_unstable();
                sum += self.snapshot.count_containing(&sources, &targets) as u64;
            });
        });
        sum as f64 / (binomial_f64(a.len() as u64, l as u64) * binomial_f64(b.len() as u64, l as u64))
    }
}

/// Positions within `focal` of the nodes it shares with `other` (both sorted).
fn positions(focal: &[NodeId], other: &[NodeId]) -> Vec<u16> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < focal.len() && j < other.len() {
        match focal[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(i as u16);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Aggregates `values` plus `zeros` implicit zero entries.
///
/// An empty collection aggregates to 0; the standard deviation is the
/// population one, so a single value gives 0.
pub(crate) fn aggregate(values: &[f64], zeros: f64, agg: Aggregator) -> f64 {
    let n = values.len() as f64 + zeros;
    if n == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().sum();
    match agg {
        Aggregator::Sum => sum,
        Aggregator::Mean => sum / n,
        Aggregator::Min => {
            let m = values.iter().copied().fold(f64::INFINITY, f64::min);
            if zeros > 0.0 {
                m.min(0.0)
            } else {
                m
            }
        }
        Aggregator::Max => {
            let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if zeros > 0.0 {
                m.max(0.0)
            } else {
                m
            }
        }
        Aggregator::Sd => {
            let mean = sum / n;
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() + zeros * mean * mean;
            (ss / n).sqrt()
        }
    }
}
