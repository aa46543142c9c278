//! Exact integer foundations: k-th power tables, representation counts of
//! n = x_1^k + ... + x_s^k over positive integers (ordered tuples), and
//! smooth-number sieving.
//!
//! Counts are exact 128-bit integers throughout. Any parameter set whose
//! counts could exceed 128 bits is rejected up front; nothing ever wraps.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::par;
use crate::Budget;

/// x^k as u128, None on overflow. k = 0 gives 1.
pub fn checked_pow(x: u64, k: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(x as u128)?;
    }
    Some(acc)
}

/// floor(n^(1/k)), exact. k >= 1.
pub fn integer_kth_root(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "k-th root needs k >= 1");
    if k == 1 || n <= 1 {
        return n;
    }
    // float guess, then correct; powf is within 1 ulp so +-1 suffices,
    // widen the net to +-2 to be safe.
    let guess = crate::fmath::powf(n as f64, 1.0 / k as f64) as u64;
    let mut r = guess.saturating_sub(2);
    while let Some(p) = checked_pow(r + 1, k) {
        if p > n as u128 {
            break;
        }
        r += 1;
    }
    r
}

/// Exact table of x^k for 1 <= x <= p.
///
/// Rejects parameters whose top entry p^k does not fit the 128-bit
/// representation; the table is never silently truncated or wrapped.
pub fn kth_power_table(p: u64, k: u32) -> Result<Vec<u128>> {
    if p < 1 {
        return Err(Error::Domain("power table needs p >= 1"));
    }
    if k < 2 {
        return Err(Error::Domain("power table needs k >= 2"));
    }
    checked_pow(p, k).ok_or(Error::Capacity {
        what: "kth_power_table",
    })?;
    Ok((1..=p).map(|x| checked_pow(x, k).unwrap()).collect())
}

/// Number of ordered s-tuples of positive integers with
/// x_1^k + ... + x_s^k = n, by plain nested enumeration.
///
/// This is the brute-force oracle: no memoisation, no sharing with the
/// convolution path, deterministic. Intended for n up to ~10^5.
pub fn rep_count_direct(n: u64, s: u32, k: u32) -> u128 {
    assert!(s >= 1 && k >= 2 && n >= 1);
    if s == 1 {
        let r = integer_kth_root(n, k);
        return u128::from(checked_pow(r, k) == Some(n as u128));
    }
    let mut total: u128 = 0;
    let mut x = 1u64;
    // each remaining summand is at least 1
    while let Some(p) = checked_pow(x, k) {
        if p + u128::from(s) - 1 > n as u128 {
            break;
        }
        total += rep_count_direct(n - p as u64, s - 1, k);
        x += 1;
    }
    total
}

/// Parameters of a representation-count run: s summands, k-th powers,
/// range limit N and its integer k-th root P.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepParams {
    pub s: u32,
    pub k: u32,
    pub limit: u64,
    pub root: u64,
}

impl RepParams {
    pub fn new(s: u32, k: u32, limit: u64) -> Result<Self> {
        if s < 1 {
            return Err(Error::Domain("s must be positive"));
        }
        if k < 2 {
            return Err(Error::Domain("k must be at least 2"));
        }
        if limit < 1 {
            return Err(Error::Domain("limit must be positive"));
        }
        let root = integer_kth_root(limit, k);
        debug_assert!(checked_pow(root, k).is_some_and(|p| p <= limit as u128));
        Ok(RepParams { s, k, limit, root })
    }
}

/// Exact representation counts for every n in [1, N].
#[derive(Debug, Clone)]
pub struct RepTable {
    pub params: RepParams,
    counts: Vec<u128>,
}

impl RepTable {
    /// counts\[n\] for 1 <= n <= N.
    #[inline]
    pub fn count(&self, n: u64) -> u128 {
        self.counts[n as usize]
    }

    pub fn counts(&self) -> &[u128] {
        &self.counts[..]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn from_raw(params: RepParams, counts: Vec<u128>) -> Result<Self> {
        if counts.len() != params.limit as usize + 1 {
            return Err(Error::Domain("count vector length must be limit + 1"));
        }
        Ok(RepTable { params, counts })
    }
}

/// Builds the full count table by s-1 successive exact convolutions of the
/// k-th power indicator, truncating at N after each stage.
///
/// Capacity is proved up front: every intermediate count is bounded by P^s,
/// so if P^s fits in 128 bits no addition below can overflow.
pub fn rep_count_all(params: &RepParams, threads: usize, budget: &Budget) -> Result<RepTable> {
    let n = params.limit as usize;
    budget.check_bytes("rep_count_all", 16 * (n as u128 + 1))?;
    // Every count at every stage is bounded by the number of tuples, P^s;
    // once that fits in 128 bits the unchecked adds below cannot overflow.
    checked_pow(params.root, params.s).ok_or(Error::Capacity {
        what: "rep_count_all",
    })?;

    let powers: Vec<u64> = (1..=params.root)
        .filter_map(|x| {
            let p = checked_pow(x, params.k).unwrap();
            (p <= params.limit as u128).then_some(p as u64)
        })
        .collect();

    // stage 1: indicator of single k-th powers
    let mut cur = vec![0u128; n + 1];
    for &p in &powers {
        cur[p as usize] = 1;
    }

    let mut next = vec![0u128; n + 1];
    for _stage in 2..=params.s {
        par::fill_chunks(&mut next[..], threads, |off, slice| {
            for v in slice.iter_mut() {
                *v = 0;
            }
            for &p in &powers {
                let p = p as usize;
                // target indices j = m + p with m >= 1
                let lo = (p + 1).max(off);
                let hi = (off + slice.len()).min(n + 1);
                for j in lo..hi {
                    slice[j - off] += cur[j - p];
                }
            }
        });
        core::mem::swap(&mut cur, &mut next);
    }
    RepTable::from_raw(*params, cur)
}

/// Exact convolution of two count vectors (index = sum), truncated to the
/// length of `a`. Used to cross-check convolution associativity.
pub fn convolve_counts(a: &[u128], b: &[u128]) -> Result<Vec<u128>> {
    let n = a.len();
    let mut out = vec![0u128; n];
    for (j, &bv) in b.iter().enumerate().skip(1) {
        if bv == 0 {
            continue;
        }
        for i in 1..n.saturating_sub(j) {
            if a[i] == 0 {
                continue;
            }
            let term = a[i].checked_mul(bv).ok_or(Error::Capacity {
                what: "convolve_counts",
            })?;
            out[i + j] = out[i + j].checked_add(term).ok_or(Error::Capacity {
                what: "convolve_counts",
            })?;
        }
    }
    Ok(out)
}

/// The set of R-smooth integers in [1, P]: every prime divisor is <= R.
/// 1 is always a member.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSet {
    pub limit: u64,
    pub bound: f64,
    members: Vec<u64>,
}

impl SmoothSet {
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// log R / log P, the smoothness exponent eta actually realised; the
    /// bound R is a direct parameter and eta is reported, never chosen.
    pub fn realised_eta(&self) -> f64 {
        if self.limit <= 1 {
            return 0.0;
        }
        crate::fmath::ln(self.bound.max(1.0)) / crate::fmath::ln(self.limit as f64)
    }
}

/// Largest-prime-factor sieve over [1, P], then keep n with lpf <= floor(R).
pub fn smooth_set(p: u64, r: f64) -> SmoothSet {
    assert!(p >= 1 && r >= 1.0, "smooth_set needs P >= 1, R >= 1");
    assert!(p <= u32::MAX as u64, "sieve limited to 32-bit P");
    let n = p as usize;
    let mut gpf = vec![0u32; n + 1];
    for q in 2..=n {
        if gpf[q] == 0 {
            // q prime: mark as greatest prime factor of all multiples;
            // ascending q means the last write wins, i.e. the largest prime.
            let mut m = q;
            while m <= n {
                gpf[m] = q as u32;
                m += q;
            }
        }
    }
    let bound = crate::fmath::floor(r).min(u32::MAX as f64) as u32;
    let members = (1..=n)
        .filter(|&m| m == 1 || gpf[m] <= bound)
        .map(|m| m as u64)
        .collect();
    SmoothSet {
        limit: p,
        bound: r,
        members,
    }
}

/// The dyadic block of smooth numbers in (Q/2, Q].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    pub limit: u64,
    pub bound: f64,
    members: Vec<u64>,
}

impl BlockSet {
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Smooth numbers in (Q/2, Q], i.e. the set difference of the smooth sets at
/// Q and Q/2. Membership test 2n > Q stays in integers.
pub fn block_set(q: u64, r: f64) -> BlockSet {
    let smooth = smooth_set(q, r);
    let members = smooth
        .members()
        .iter()
        .copied()
        .filter(|&m| 2 * m > q)
        .collect();
    BlockSet {
        limit: q,
        bound: r,
        members,
    }
}

/// Depth of the dyadic block dissection: L = floor(log2(P) / 2).
pub fn block_depth(p: u64) -> u32 {
    assert!(p >= 1);
    p.ilog2() / 2
}

/// Splits the smooth numbers up to P into dyadic blocks B(P/2^l, R) for
/// 0 <= l <= L plus the residual smooth set below P/2^(L+1). The pieces are
/// pairwise disjoint and their union is the full smooth set.
pub fn block_partition(p: u64, r: f64) -> (Vec<BlockSet>, SmoothSet) {
    let depth = block_depth(p);
    let mut blocks = Vec::with_capacity(depth as usize + 1);
    let mut q = p;
    for _ in 0..=depth {
        blocks.push(block_set(q, r));
        q /= 2;
    }
    (blocks, smooth_set(q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_smooth(p: u64, r: f64) -> Vec<u64> {
        (1..=p)
            .filter(|&n| {
                let mut m = n;
                let mut q = 2;
                while q * q <= m {
                    while m % q == 0 {
                        if q as f64 > r {
                            return false;
                        }
                        m /= q;
                    }
                    q += 1;
                }
                m == 1 || m as f64 <= r
            })
            .collect()
    }

    /// ordered s-tuples of positive integers with power-sum <= limit
    fn count_tuples_up_to(s: u32, k: u32, limit: u64) -> u128 {
        if s == 0 {
            return 1;
        }
        let mut total = 0u128;
        let mut x = 1u64;
        while checked_pow(x, k).unwrap() + u128::from(s) - 1 <= limit as u128 {
            total += count_tuples_up_to(s - 1, k, limit - checked_pow(x, k).unwrap() as u64);
            x += 1;
        }
        total
    }

    #[test]
    fn power_table_identity_case() {
        assert_eq!(kth_power_table(1, 5).unwrap(), vec![1]);
    }

    #[test]
    fn power_table_cubes() {
        assert_eq!(kth_power_table(4, 3).unwrap(), vec![1, 8, 27, 64]);
    }

    #[test]
    fn power_table_large_spot_checks() {
        let t = kth_power_table(1_000_000, 3).unwrap();
        assert_eq!(*t.last().unwrap(), 1_000_000_000_000_000_000u128);
        for x in [2u64, 999, 123_456, 999_999] {
            assert_eq!(t[x as usize - 1], (x as u128).pow(3));
        }
    }

    #[test]
    fn power_table_rejects_overflow() {
        let err = kth_power_table(u64::MAX, 8).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn integer_root_exact_on_boundaries() {
        for k in 2..=8u32 {
            for x in 1..=60u64 {
                let p = checked_pow(x, k).unwrap();
                if p <= u64::MAX as u128 {
                    let p = p as u64;
                    assert_eq!(integer_kth_root(p, k), x);
                    assert_eq!(integer_kth_root(p - 1, k), x - 1);
                    if p < u64::MAX {
                        assert_eq!(integer_kth_root(p + 1, k), x);
                    }
                }
            }
        }
        assert_eq!(integer_kth_root(u64::MAX, 2), (1u64 << 32) - 1);
    }

    #[test]
    fn direct_count_examples() {
        assert_eq!(rep_count_direct(5, 5, 3), 1); // 1+1+1+1+1
        assert_eq!(rep_count_direct(9, 2, 3), 2); // (1,2),(2,1)
        assert_eq!(rep_count_direct(10, 2, 3), 0);
    }

    #[test]
    fn table_matches_spec_values() {
        let params = RepParams::new(2, 3, 100).unwrap();
        let t = rep_count_all(&params, 1, &Budget::default()).unwrap();
        assert_eq!(t.count(2), 1);
        assert_eq!(t.count(9), 2);
        assert_eq!(t.count(16), 1);
        assert_eq!(t.count(28), 2);
        for n in 1..=100 {
            assert_eq!(t.count(n), rep_count_direct(n, 2, 3), "n={n}");
        }
    }

    #[test]
    fn table_minimal_tuple() {
        let params = RepParams::new(7, 3, 7).unwrap();
        let t = rep_count_all(&params, 1, &Budget::default()).unwrap();
        assert_eq!(t.count(7), 1);
        for n in 1..7 {
            assert_eq!(t.count(n), 0);
        }
    }

    #[test]
    fn table_total_equals_tuple_enumeration() {
        let params = RepParams::new(5, 3, 10_000).unwrap();
        let t = rep_count_all(&params, 2, &Budget::default()).unwrap();
        assert_eq!(t.total(), count_tuples_up_to(5, 3, 10_000));
    }

    #[test]
    fn table_independent_of_thread_count() {
        let params = RepParams::new(4, 3, 5_000).unwrap();
        let a = rep_count_all(&params, 1, &Budget::default()).unwrap();
        let b = rep_count_all(&params, 8, &Budget::default()).unwrap();
        assert_eq!(a.counts(), b.counts());
    }

    #[test]
    fn convolution_associativity() {
        let budget = Budget::default();
        let n = 2_000;
        let t1 = rep_count_all(&RepParams::new(1, 3, n).unwrap(), 1, &budget).unwrap();
        let t2 = rep_count_all(&RepParams::new(2, 3, n).unwrap(), 1, &budget).unwrap();
        let t3 = rep_count_all(&RepParams::new(3, 3, n).unwrap(), 1, &budget).unwrap();
        let t4 = rep_count_all(&RepParams::new(4, 3, n).unwrap(), 1, &budget).unwrap();
        let via_22 = convolve_counts(t2.counts(), t2.counts()).unwrap();
        let via_31 = convolve_counts(t3.counts(), t1.counts()).unwrap();
        assert_eq!(via_22, via_31);
        assert_eq!(&via_22[..], t4.counts());
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(smooth_set(10, 3.0).members(), &[1, 2, 3, 4, 6, 8, 9]);
        assert_eq!(smooth_set(10, 1.0).members(), &[1]);
        assert_eq!(smooth_set(100, 100.0).len(), 100);
    }

    #[test]
    fn smooth_matches_brute_force() {
        for (p, r) in [(50u64, 2.0), (200, 7.0), (200, 13.5), (137, 137.0)] {
            assert_eq!(smooth_set(p, r).members(), &brute_smooth(p, r)[..], "P={p} R={r}");
        }
    }

    #[test]
    fn smooth_monotone_and_prime_floor() {
        let base = smooth_set(300, 11.0);
        let wider = smooth_set(300, 16.9);
        let mut i = 0;
        for &m in base.members() {
            while wider.members()[i] < m {
                i += 1;
            }
            assert_eq!(wider.members()[i], m);
        }
        // R between consecutive primes pins the same set as the prime below
        assert_eq!(smooth_set(300, 16.9).members(), smooth_set(300, 13.0).members());
    }

    #[test]
    fn block_examples() {
        assert_eq!(block_set(10, 3.0).members(), &[6, 8, 9]);
        assert_eq!(block_set(2, 2.0).members(), &[2]);
        assert!(block_set(10, 1.0).is_empty());
    }

    #[test]
    fn block_partition_is_exact() {
        for (p, r) in [(100u64, 5.0), (64, 8.0), (97, 97.0)] {
            let whole = smooth_set(p, r);
            let (blocks, tail) = block_partition(p, r);
            assert_eq!(blocks.len() as u32, block_depth(p) + 1);
            let mut rebuilt: Vec<u64> = tail.members().to_vec();
            for b in &blocks {
                rebuilt.extend_from_slice(b.members());
            }
            let total: usize = blocks.iter().map(|b| b.len()).sum::<usize>() + tail.len();
            assert_eq!(total, rebuilt.len(), "disjointness");
            rebuilt.sort_unstable();
            rebuilt.dedup();
            assert_eq!(rebuilt, whole.members(), "coverage P={p} R={r}");
        }
    }
}
