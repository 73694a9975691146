use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, RngCore};

use crate::combinatorics::{binomial, subsets};
use crate::hyperstore::{Hyperedge, NodeId, NodeSet, Snapshot};

use super::{SamplingError, DEFAULT_FULL_BOUND};

const REJECTION_FACTOR: usize = 100;

/// `|R|` for hyperedges over a pool of `n` nodes, empty sides excluded.
/// `None` on overflow.
pub fn risk_set_size(n: usize, directed: bool, loopless: bool) -> Option<u128> {
    if n >= 80 {
        return None;
    }
    let all = (1u128 << n) - 1;
    Some(match (directed, loopless) {
        (false, _) => all,
        (true, false) => all.checked_mul(all)?,
        // each node is in a, in b, or in neither; remove empty a or empty b
        (true, true) => 3u128.checked_pow(n as u32)? + 1 - 2 * (1u128 << n),
    })
}

/// Every hyperedge over `pool`, in a fixed canonical order.
pub fn enumerate_risk_set(pool: &[NodeId], directed: bool, loopless: bool) -> Vec<Hyperedge> {
    let n = pool.len();
    let pick = |mask: u64| NodeSet::from_sorted((0..n).filter(|i| mask >> i & 1 == 1).map(|i| pool[i]).collect());
    let full = 1u64 << n;
    if !directed {
        return (1..full).map(|m| Hyperedge::Undirected(pick(m))).collect();
    }
    let mut out = Vec::new();
    if loopless {
        let total = 3u64.pow(n as u32);
        for code in 0..total {
            let (mut a, mut b, mut c) = (0u64, 0u64, code);
            for i in 0..n {
                match c % 3 {
                    1 => a |= 1 << i,
                    2 => b |= 1 << i,
                    _ => {}
                }
                c /= 3;
            }
            if a != 0 && b != 0 {
                out.push(Hyperedge::Directed { sources: pick(a), targets: pick(b) });
            }
        }
    } else {
        for a in 1..full {
            for b in 1..full {
                out.push(Hyperedge::Directed { sources: pick(a), targets: pick(b) });
            }
        }
    }
    out
}

/// Draws `m` distinct controls different from `case`.
///
/// `available` is `|R|` including the case. When more than half of the risk
/// set is requested and it can be enumerated, indices are drawn from the
/// enumeration and returned in canonical order; otherwise `draw` proposals are
/// rejection-sampled in draw order.
fn fill<R: RngCore>(
    rng: &mut R,
    case: &Hyperedge,
    m: usize,
    available: Option<u128>,
    enumerate: impl FnOnce() -> Vec<Hyperedge>,
    mut draw: impl FnMut(&mut R) -> Option<Hyperedge>,
) -> Result<Vec<Hyperedge>, SamplingError> {
    if let Some(n) = available {
        let others = n.saturating_sub(1);
        if m as u128 > others {
            return Err(SamplingError::Exhausted { needed: m, available: others });
        }
        if n <= u128::from(DEFAULT_FULL_BOUND) && 2 * m as u128 > n {
            let others: Vec<Hyperedge> = enumerate().into_iter().filter(|h| h != case).collect();
            let mut picked = index::sample(rng, others.len(), m).into_vec();
            picked.sort_unstable();
            return Ok(picked.into_iter().map(|i| others[i].clone()).collect());
        }
    }
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    let cap = REJECTION_FACTOR * m.max(1);
    let mut attempts = 0;
    while out.len() < m {
        if attempts == cap {
            return Err(SamplingError::TooManyRejections { attempts });
        }
        attempts += 1;
        if let Some(h) = draw(rng) {
            if &h != case && seen.insert(h.clone()) {
                out.push(h);
            }
        }
    }
    Ok(out)
}

fn random_subset<R: RngCore>(rng: &mut R, pool: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    for chunk in pool.chunks(64) {
        let bits = rng.next_u64();
        out.extend(chunk.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &v)| v));
    }
    out
}

/// Uniform draws from all non-empty hyperedges over `pool`, excluding `case`.
///
/// Undirected: each node enters independently with probability 1/2.
/// Directed: sources and targets are independent such subsets; when the case
/// is loopless every node joins the sources, the targets or neither with
/// probability 1/3 each, so controls are loopless too. Empty sides are
/// redrawn.
pub fn sample_unconstrained<R: RngCore>(
    pool: &[NodeId],
    case: &Hyperedge,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Hyperedge>, SamplingError> {
    if pool.is_empty() {
        return Err(SamplingError::EmptyPool);
    }
    let directed = case.is_directed();
    let loopless = directed && !case.is_loop();
    let available = risk_set_size(pool.len(), directed, loopless);
    fill(
        rng,
        case,
        m,
        available,
        || enumerate_risk_set(pool, directed, loopless),
        |rng| {
            if !directed {
                let s = random_subset(rng, pool);
                return (!s.is_empty()).then(|| Hyperedge::Undirected(NodeSet::from_sorted(s)));
            }
            let (a, b) = if loopless {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for &v in pool {
                    match rng.random_range(0..3u8) {
                        0 => a.push(v),
                        1 => b.push(v),
                        _ => {}
                    }
                }
                (a, b)
            } else {
                (random_subset(rng, pool), random_subset(rng, pool))
            };
            (!a.is_empty() && !b.is_empty())
                .then(|| Hyperedge::Directed { sources: NodeSet::from_sorted(a), targets: NodeSet::from_sorted(b) })
        },
    )
}

fn random_k_subset<R: RngCore>(rng: &mut R, pool: &[NodeId], k: usize) -> NodeSet {
    NodeSet::new(index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]))
}

/// Uniform draws of hyperedges with the same size as `case` (componentwise
/// for directed hyperedges), excluding `case`.
pub fn sample_conditional_size<R: RngCore>(
    pool: &[NodeId],
    case: &Hyperedge,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Hyperedge>, SamplingError> {
    if pool.is_empty() {
        return Err(SamplingError::EmptyPool);
    }
    let n = pool.len() as u64;
    match case {
        Hyperedge::Undirected(members) => {
            let k = members.len();
            if k > pool.len() {
                return Err(SamplingError::Exhausted { needed: m, available: 0 });
            }
            fill(
                rng,
                case,
                m,
                binomial(n, k as u64),
                || subsets(pool, k).into_iter().map(|s| Hyperedge::Undirected(NodeSet::from_sorted(s))).collect(),
                |rng| Some(Hyperedge::Undirected(random_k_subset(rng, pool, k))),
            )
        }
        Hyperedge::Directed { sources, targets } => {
            let (ka, kb) = (sources.len(), targets.len());
            let loopless = !case.is_loop();
            let b_pool = if loopless { n.saturating_sub(ka as u64) } else { n };
            if ka > pool.len() || kb as u64 > b_pool {
                return Err(SamplingError::Exhausted { needed: m, available: 0 });
            }
            let available = binomial(n, ka as u64).zip(binomial(b_pool, kb as u64)).and_then(|(x, y)| x.checked_mul(y));
            fill(
                rng,
                case,
                m,
                available,
                || {
                    let mut out = Vec::new();
                    for a in subsets(pool, ka) {
                        let rest: Vec<NodeId> = if loopless {
                            pool.iter().copied().filter(|v| !a.contains(v)).collect()
                        } else {
                            pool.to_vec()
                        };
                        for b in subsets(&rest, kb) {
                            out.push(Hyperedge::Directed {
                                sources: NodeSet::from_sorted(a.clone()),
                                targets: NodeSet::from_sorted(b),
                            });
                        }
                    }
                    out
                },
                |rng| {
                    let a = random_k_subset(rng, pool, ka);
                    let b = if loopless {
                        let rest: Vec<NodeId> = pool.iter().copied().filter(|v| !a.contains(*v)).collect();
                        random_k_subset(rng, &rest, kb)
                    } else {
                        random_k_subset(rng, pool, kb)
                    };
                    Some(Hyperedge::Directed { sources: a, targets: b })
                },
            )
        }
    }
}

/// Uniform draws without replacement from the distinct hyperedges with prior
/// activity, excluding `case`. Returns all eligible hyperedges and `true` when
/// fewer than `m` exist.
pub fn sample_repeated<R: RngCore>(
    snapshot: Snapshot<'_>,
    case: &Hyperedge,
    m: usize,
    rng: &mut R,
) -> Result<(Vec<Hyperedge>, bool), SamplingError> {
    let slot = snapshot.distinct_slot(case).ok_or(SamplingError::NotRepeated)?;
    let distinct = snapshot.distinct_hyperedges();
    let eligible = distinct.len() - 1;
    let skip = |i: usize| if i >= slot { i + 1 } else { i };
    if eligible <= m {
        let all = (0..eligible).map(|i| distinct[skip(i)].clone()).collect();
        return Ok((all, eligible < m));
    }
    let picked = index::sample(rng, eligible, m);
    Ok((picked.into_iter().map(|i| distinct[skip(i)].clone()).collect(), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperstore::{Event, History};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool(n: u32) -> Vec<NodeId> {
        (0..n).map(NodeId).collect()
    }

    #[test]
    fn risk_set_sizes_match_enumeration() {
        for n in 1..=5 {
            for (d, l) in [(false, false), (true, false), (true, true)] {
                let e = enumerate_risk_set(&pool(n), d, l);
                assert_eq!(risk_set_size(n as usize, d, l), Some(e.len() as u128));
                let set: HashSet<_> = e.iter().collect();
                assert_eq!(set.len(), e.len());
                if l {
                    assert!(e.iter().all(|h| !h.is_loop()));
                }
            }
        }
        assert_eq!(enumerate_risk_set(&pool(3), false, false).len(), 7);
    }

    #[test]
    fn zero_controls_from_singleton_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let got = sample_unconstrained(&pool(1), &Hyperedge::of(&[0]), 0, &mut rng).unwrap();
        assert!(got.is_empty());
        assert!(matches!(
            sample_unconstrained(&pool(1), &Hyperedge::of(&[0]), 1, &mut rng),
            Err(SamplingError::Exhausted { .. })
        ));
    }

    #[test]
    fn unconstrained_controls_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let case = Hyperedge::of(&[0, 1]);
        for m in [1, 3, 6] {
            let got = sample_unconstrained(&pool(3), &case, m, &mut rng).unwrap();
            assert_eq!(got.len(), m);
            assert!(!got.contains(&case));
            assert_eq!(got.iter().collect::<HashSet<_>>().len(), m);
        }
        assert!(sample_unconstrained(&pool(3), &case, 7, &mut rng).is_err());
    }

    #[test]
    fn unconstrained_mean_size_is_half_the_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = pool(23);
        let case = Hyperedge::of(&[0]);
        let mut total = 0usize;
        for _ in 0..10_000 {
            total += sample_unconstrained(&p, &case, 1, &mut rng).unwrap()[0].total_size();
        }
        let mean = total as f64 / 1e4;
        assert!((mean - 11.5).abs() < 0.2, "{mean}");
    }

    #[test]
    fn directed_loopless_case_gets_loopless_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let case = Hyperedge::of_directed(&[0], &[1]);
        let got = sample_unconstrained(&pool(6), &case, 50, &mut rng).unwrap();
        assert!(got.iter().all(|h| h.is_directed() && !h.is_loop()));
    }

    #[test]
    fn conditional_size_exhaustion_and_cover() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let case = Hyperedge::of(&[0, 1, 2, 3, 4]);
        assert!(matches!(
            sample_conditional_size(&pool(5), &case, 1, &mut rng),
            Err(SamplingError::Exhausted { needed: 1, available: 0 })
        ));
        let case = Hyperedge::of(&[0, 1]);
        let got = sample_conditional_size(&pool(5), &case, 9, &mut rng).unwrap();
        let set: HashSet<_> = got.iter().cloned().collect();
        assert_eq!(set.len(), 9);
        assert!(!set.contains(&case));
        assert!(got.iter().all(|h| h.total_size() == 2));
    }

    #[test]
    fn conditional_size_directed_keeps_both_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let case = Hyperedge::of_directed(&[0, 1], &[2]);
        let got = sample_conditional_size(&pool(8), &case, 20, &mut rng).unwrap();
        assert!(got.iter().all(|h| h.size_pair() == (2, 1) && !h.is_loop()));
    }

    #[test]
    fn repeated_draws_other_prior_hyperedges() {
        let mut h = History::new(false);
        h.push_event(Event::new(Hyperedge::of(&[0, 1]), 0.0)).unwrap();
        h.push_event(Event::new(Hyperedge::of(&[2]), 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (got, under) = sample_repeated(h.at(5.0), &Hyperedge::of(&[0, 1]), 1, &mut rng).unwrap();
        assert_eq!(got, vec![Hyperedge::of(&[2])]);
        assert!(!under);
        let (got, under) = sample_repeated(h.at(5.0), &Hyperedge::of(&[0, 1]), 3, &mut rng).unwrap();
        assert_eq!(got.len(), 1);
        assert!(under);
        assert_eq!(
            sample_repeated(h.at(5.0), &Hyperedge::of(&[7]), 1, &mut rng).unwrap_err(),
            SamplingError::NotRepeated
        );
    }
}
