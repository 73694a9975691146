//! Slow reference implementations written directly from the definitions.
//!
//! Nothing here uses the indexes, profiles or optimizers of `rhem`; every
//! quantity is obtained by scanning the raw event list, enumerating subsets
//! with bitmasks, or by derivative-free search. Only the data types are
//! shared.
#![allow(clippy::needless_range_loop, clippy::needless_late_init)]

use rhem::hyperstore::{Event, Hyperedge, NodeId};
use rhem::statistics::{Aggregator, ClosureVariant, StatKind, StatisticSpec};

type Set = Vec<u32>;

fn ids(s: &[NodeId]) -> Set {
    s.iter().map(|v| v.0).collect()
}

fn sides(h: &Hyperedge) -> (Set, Set) {
    (ids(h.first().as_slice()), ids(h.second()))
}

/// All `k`-element subsets of `items` (at most 25 items).
pub fn subsets(items: &[u32], k: usize) -> Vec<Set> {
    let n = items.len();
    assert!(n <= 25, "oracle enumerates at most 25 items");
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| items[i]).collect())
        .collect()
}

fn contains_all(big: &[u32], small: &[u32]) -> bool {
    small.iter().all(|v| big.contains(v))
}

fn union(a: &[u32], b: &[u32]) -> Set {
    let mut u = a.to_vec();
    u.extend(b.iter().filter(|v| !a.contains(v)));
    u
}

fn minus(a: &[u32], b: &[u32]) -> Set {
    a.iter().copied().filter(|v| !b.contains(v)).collect()
}

pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Events strictly before `t` as (first side, second side, outcome).
pub struct Past {
    events: Vec<(Set, Set, Option<f64>)>,
}

impl Past {
    pub fn new(events: &[Event], t: f64) -> Self {
        Past {
            events: events
                .iter()
                .filter(|e| e.time < t)
                .map(|e| {
                    let (a, b) = sides(&e.hyperedge);
                    (a, b, e.outcome)
                })
                .collect(),
        }
    }

    /// Events with `first ⊆ first_e` and `second ⊆ second_e`.
    pub fn degree(&self, first: &[u32], second: &[u32]) -> usize {
        self.events.iter().filter(|(a, b, _)| contains_all(a, first) && contains_all(b, second)).count()
    }

    fn same(x: &[u32], y: &[u32]) -> bool {
        x.len() == y.len() && contains_all(x, y)
    }

    pub fn activity(&self, first: &[u32], second: &[u32]) -> usize {
        self.events.iter().filter(|(a, b, _)| Self::same(a, first) && Self::same(b, second)).count()
    }

    pub fn performance(&self, first: &[u32], second: &[u32]) -> f64 {
        self.events
            .iter()
            .filter(|(a, b, _)| Self::same(a, first) && Self::same(b, second))
            .map(|(_, _, y)| y.unwrap_or(0.0))
            .sum()
    }

    pub fn sub_performance(&self, first: &[u32], second: &[u32]) -> f64 {
        self.events
            .iter()
            .filter(|(a, b, _)| contains_all(a, first) && contains_all(b, second))
            .map(|(_, _, y)| y.unwrap_or(0.0))
            .sum()
    }

    /// Events sharing at least `p` nodes with `members`.
    pub fn shared_at_least(&self, members: &[u32], p: usize) -> usize {
        self.events.iter().filter(|(a, _, _)| a.iter().filter(|v| members.contains(v)).count() >= p).count()
    }
}

pub fn aggregate(values: &[f64], agg: Aggregator) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let sum: f64 = values.iter().sum();
    match agg {
        Aggregator::Mean => sum / n,
        Aggregator::Sum => sum,
        Aggregator::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregator::Sd => {
            let m = sum / n;
            (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt()
        }
    }
}

/// Node set `V` and node attributes for the statistics that need them.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub universe: Vec<u32>,
    pub covariates: Vec<(String, Vec<f64>)>,
}

/// Value of `spec` on `h` at time `t`, by direct enumeration.
pub fn statistic(spec: &StatisticSpec, events: &[Event], h: &Hyperedge, t: f64, ctx: &Context) -> f64 {
    let past = Past::new(events, t);
    let (a, b) = sides(h);
    let agg = spec.aggregator;
    match &spec.kind {
        StatKind::Size => a.len() as f64,
        StatKind::SizeSquared => (a.len() * a.len()) as f64,
        StatKind::NumSources => a.len() as f64,
        StatKind::NumTargets => b.len() as f64,
        StatKind::Repetition => past.activity(&a, &b) as f64,
        StatKind::Reciprocation => past.activity(&b, &a) as f64,
        &StatKind::SubRepetition(p) => {
            let v: Vec<f64> = subsets(&a, p as usize).iter().map(|s| past.degree(s, &[]) as f64).collect();
            aggregate(&v, agg)
        }
        &StatKind::SubRepetitionDirected(p, q) => {
            let mut v = Vec::new();
            for x in subsets(&a, p as usize) {
                for y in subsets(&b, q as usize) {
                    v.push(past.degree(&x, &y) as f64);
                }
            }
            aggregate(&v, agg)
        }
        &StatKind::SubReciprocation(p, q) => {
            let mut v = Vec::new();
            for x in subsets(&b, p as usize) {
                for y in subsets(&a, q as usize) {
                    v.push(past.degree(&x, &y) as f64);
                }
            }
            aggregate(&v, agg)
        }
        &StatKind::SharedPriorEvents(p) => past.shared_at_least(&a, p as usize) as f64,
        &StatKind::SwitchReciprocation(l) => {
            let l = l as usize;
            let (xs, ys) = (subsets(&a, l), subsets(&b, l));
            if xs.is_empty() || ys.is_empty() {
                return 0.0;
            }
            let mut sum = 0usize;
            for x in &xs {
                for y in &ys {
                    let sources = union(&minus(&a, x), y);
                    let targets = union(&minus(&b, y), x);
                    sum += past.degree(&sources, &targets);
                }
            }
            sum as f64 / (xs.len() * ys.len()) as f64
        }
        &StatKind::Closure { variant, p, q, l } => {
            closure(&past, variant, &a, &b, p as usize, q as usize, l as usize, ctx)
        }
        StatKind::CovariateAggregate(name) => {
            let column = &ctx.covariates.iter().find(|(n, _)| n == name).expect("attribute").1;
            let nodes = union(&a, &b);
            let v: Vec<f64> = nodes.iter().map(|&x| column[x as usize]).collect();
            aggregate(&v, agg)
        }
        StatKind::PriorHyperedgeSuccess => {
            let n = past.activity(&a, &b);
            if n == 0 {
                0.0
            } else {
                past.performance(&a, &b) / n as f64
            }
        }
        &StatKind::PriorSubHyperedgeSuccess(p) => {
            let (mut num, mut den) = (0.0, 0usize);
            for s in subsets(&a, p as usize) {
                num += past.sub_performance(&s, &[]);
                den += past.degree(&s, &[]);
            }
            if den == 0 {
                0.0
            } else {
                num / den as f64
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn closure(
    past: &Past,
    variant: ClosureVariant,
    a: &[u32],
    b: &[u32],
    p: usize,
    q: usize,
    l: usize,
    ctx: &Context,
) -> f64 {
    let v = ctx.universe.len();
    let mut sum = 0usize;
    let norm;
    if variant == ClosureVariant::Undirected {
        for h1 in subsets(a, p) {
            for h2 in subsets(a, q) {
                if h2.iter().any(|x| h1.contains(x)) {
                    continue;
                }
                let rest = minus(&minus(&ctx.universe, &h1), &h2);
                for w in subsets(&rest, l) {
                    sum += past.degree(&union(&h1, &w), &[]).min(past.degree(&union(&h2, &w), &[]));
                }
            }
        }
        norm = choose(a.len(), p) * choose(a.len().saturating_sub(p), q) * choose(v.saturating_sub(p + q), l);
    } else {
        for x in subsets(a, p) {
            for y in subsets(b, q) {
                let rest = minus(&minus(&ctx.universe, &x), &y);
                for w in subsets(&rest, l) {
                    let (d1, d2) = match variant {
                        ClosureVariant::Transitive => (past.degree(&x, &w), past.degree(&w, &y)),
                        ClosureVariant::Cyclic => (past.degree(&w, &x), past.degree(&y, &w)),
                        ClosureVariant::SharedReceivers => (past.degree(&x, &w), past.degree(&y, &w)),
                        ClosureVariant::SharedSenders => (past.degree(&w, &x), past.degree(&w, &y)),
                        ClosureVariant::Undirected => unreachable!(),
                    };
                    sum += d1.min(d2);
                }
            }
        }
        norm = choose(a.len(), p) * choose(b.len(), q) * choose(v.saturating_sub(p + q), l);
    }
    if norm == 0.0 {
        0.0
    } else {
        sum as f64 / norm
    }
}

/// Every non-empty hyperedge over `nodes` (undirected).
pub fn all_hyperedges(nodes: &[u32]) -> Vec<Hyperedge> {
    (1..=nodes.len()).flat_map(|k| subsets(nodes, k)).map(|s| Hyperedge::of(&s)).collect()
}

/// Sampled log partial likelihood: Σ_s [x_case·θ − ln Σ_rows exp(x·θ)].
/// Row 0 of each stratum is the case.
pub fn log_likelihood(strata: &[Vec<Vec<f64>>], theta: &[f64]) -> f64 {
    let dot = |x: &[f64]| x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
    strata
        .iter()
        .map(|rows| {
            let etas: Vec<f64> = rows.iter().map(|r| dot(r)).collect();
            let max = etas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            etas[0] - max - etas.iter().map(|e| (e - max).exp()).sum::<f64>().ln()
        })
        .sum()
}

const GOLDEN: f64 = 0.618_033_988_749_895;

/// Maximizes `f(x + s d)` over `s` by bracketing and golden-section search.
fn line_max(f: &impl Fn(&[f64]) -> f64, x: &[f64], d: &[f64], tol: f64) -> f64 {
    let at = |s: f64| {
        let y: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + s * di).collect();
        f(&y)
    };
    let h = 1e-2;
    let f0 = at(0.0);
    let (mut lo, mut hi) = if at(h) > f0 {
        (0.0, h)
    } else if at(-h) > f0 {
        (0.0, -h)
    } else {
        (-h, h)
    };
    if lo == 0.0 {
        // expand with doubling steps until the value drops
        let (mut prev, mut cur, mut fcur) = (0.0, hi, at(hi));
        for _ in 0..80 {
            let next = cur + 2.0 * (cur - prev);
            let fnext = at(next);
            if fnext < fcur {
                lo = prev;
                hi = next;
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
    }
    let (mut c, mut e) = (hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo));
    let (mut fc, mut fe) = (at(c), at(e));
    while hi - lo > tol {
        if fc > fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = at(c);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + GOLDEN * (hi - lo);
            fe = at(e);
        }
    }
    (lo + hi) / 2.0
}

/// Derivative-free maximizer: cyclic golden-section line searches along the
/// coordinates, each sweep followed by a search along the sweep's net move.
pub fn maximize(f: impl Fn(&[f64]) -> f64, start: &[f64], tol: f64, max_sweeps: usize) -> Vec<f64> {
    let k = start.len();
    let mut x = start.to_vec();
    for _ in 0..max_sweeps {
        let before = x.clone();
        for j in 0..k {
            let mut d = vec![0.0; k];
            d[j] = 1.0;
            let s = line_max(&f, &x, &d, tol * 1e-2);
            x[j] += s;
        }
        let moved: Vec<f64> = x.iter().zip(&before).map(|(a, b)| a - b).collect();
        let size = moved.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if size < tol {
            break;
        }
        let s = line_max(&f, &x, &moved, tol * 1e-2);
        for (xi, di) in x.iter_mut().zip(&moved) {
            *xi += s * di;
        }
    }
    x
}

/// Least squares with intercept through the normal equations, solved by
/// Gaussian elimination with partial pivoting. Returns intercept first.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = x.first().map_or(0, Vec::len) + 1;
    let row = |i: usize| std::iter::once(1.0).chain(x[i].iter().copied()).collect::<Vec<f64>>();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..y.len() {
        let r = row(i);
        for p in 0..k {
            for q in 0..k {
                a[p][q] += r[p] * r[q];
            }
            a[p][k] += r[p] * y[i];
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_by_bitmask() {
        assert_eq!(subsets(&[4, 5, 6], 2).len(), 3);
        assert_eq!(subsets(&[4, 5, 6], 0), vec![Vec::<u32>::new()]);
        assert_eq!(all_hyperedges(&[0, 1, 2]).len(), 7);
    }

    #[test]
    fn golden_section_finds_quadratic_peak() {
        let f = |x: &[f64]| -(x[0] - 1.5).powi(2) - 3.0 * (x[1] + 0.25).powi(2) - x[0] * x[1];
        let x = maximize(f, &[0.0, 0.0], 1e-10, 500);
        let g0 = -2.0 * (x[0] - 1.5) - x[1];
        let g1 = -6.0 * (x[1] + 0.25) - x[0];
        // comparison-based search resolves x to about sqrt(machine epsilon)
        assert!(g0.abs() < 1e-6 && g1.abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn normal_equations_line() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let b = ols(&x, &[1.0, 3.0, 5.0]);
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
    }
}
