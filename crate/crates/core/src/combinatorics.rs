//! Binomial coefficients and k-subset enumeration.

/// Exact binomial coefficient, `None` on overflow of `u128`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Binomial coefficient as `f64`.
///
/// Exact integer arithmetic is used while it fits in `u128`; beyond that the
/// value is computed through log-gamma, which is only reached for normalizers
/// far outside the statistic orders used in practice.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    match binomial(n, k) {
        Some(v) => v as f64,
        None => {
            let (n, k) = (n as f64, k as f64);
            (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)).exp()
        }
    }
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Calls `f` with every k-element subset of `items`, in lexicographic order of
/// positions. `k == 0` yields the empty subset once.
pub fn for_each_subset<T: Copy>(items: &[T], k: usize, mut f: impl FnMut(&[T])) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        // advance the rightmost index that still has room
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let i = i - 1;
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = items[idx[j]];
        }
    }
}

/// Collects every k-element subset of `items`.
pub fn subsets<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for_each_subset(items, k, |s| out.push(s.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(5, 5), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
        assert_eq!(binomial(100, 3), Some(161_700));
        assert_eq!(binomial_f64(23, 11), 1_352_078.0);
    }

    #[test]
    fn huge_binomial_falls_back_to_log_gamma() {
        assert!(binomial(500_000, 100).is_none());
        let v = binomial_f64(500_000, 100);
        assert!(v.is_finite() || v.is_infinite());
        let exact = binomial_f64(200, 30);
        let via_gamma = (ln_gamma(201.0) - ln_gamma(31.0) - ln_gamma(171.0)).exp();
        assert!((exact - via_gamma).abs() / exact < 1e-9);
    }

    #[test]
    fn subset_enumeration_counts() {
        let items = [1, 2, 3, 4, 5];
        for k in 0..=6 {
            let n = subsets(&items, k).len() as u128;
            assert_eq!(n, binomial(5, k as u64).unwrap());
        }
        assert_eq!(subsets(&items, 2)[0], vec![1, 2]);
        assert_eq!(subsets(&items, 2)[9], vec![4, 5]);
        assert_eq!(subsets::<u8>(&[], 0), vec![Vec::<u8>::new()]);
    }
}
