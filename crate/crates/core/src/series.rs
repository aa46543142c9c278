//! Complete exponential sums S(q,a), the multiplicative coefficients A(q,n),
//! truncated singular series with a per-q term ledger, p-adic local densities
//! (the independent counting oracle), and the main-term assembly.
//!
//! Phases are always reduced rationals a*m mod q in exact integer arithmetic
//! before any trigonometry, and every nominally real quantity is checked for
//! an imaginary residue before the imaginary part is discarded.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit;
use crate::fmath;
use crate::kahan::{Kahan, KahanComplex};
use crate::par;
use crate::Budget;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Terms smaller than this are stored as exact zeros; S(q,a) genuinely
/// vanishes for many (q,k) and the ledger stays compressible.
const ZERO_SNAP: f64 = 1e-14;

/// Imaginary residue above this signals an arithmetic bug, not rounding.
const IMAG_LIMIT: f64 = 1e-9;

/// e(j/q) for j in [0, q).
fn roots_of_unity(q: u64) -> Vec<Complex64> {
    let step = TWO_PI / q as f64;
    (0..q)
        .map(|j| {
            let t = step * j as f64;
            Complex64::new(fmath::cos(t), fmath::sin(t))
        })
        .collect()
}

/// Multiplicity of each value of r^k mod q for r in [1, q], as (value, count)
/// pairs sorted by value.
fn power_residue_support(q: u64, k: u32) -> Vec<(u64, u32)> {
    let mut hist = vec![0u32; q as usize];
    for r in 0..q {
        let mut acc = 1u64 % q;
        for _ in 0..k {
            acc = acc * r % q; // q < 2^32 keeps the product in range
        }
        hist[acc as usize] += 1;
    }
    hist.into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(v, c)| (v as u64, c))
        .collect()
}

/// S(q,a) = sum_{r=1}^{q} e(a r^k / q), with r^k reduced mod q exactly.
pub fn complete_exp_sum(q: u64, a: i64, k: u32) -> Complex64 {
    assert!(q >= 1 && q <= u32::MAX as u64, "modulus out of range");
    let a = a.rem_euclid(q as i64) as u64;
    let roots = roots_of_unity(q);
    let mut sum = KahanComplex::new();
    for &(m, c) in &power_residue_support(q, k) {
        sum.add(roots[(a * m % q) as usize] * c as f64);
    }
    sum.value()
}

/// S(q,a) for all a in [0, q). Values at a and q-a are exact conjugates by
/// construction, so downstream pairings cancel imaginary parts exactly.
pub fn exp_sums_all(q: u64, k: u32) -> Vec<Complex64> {
    assert!(q >= 1 && q <= u32::MAX as u64, "modulus out of range");
    let support = power_residue_support(q, k);
    let mut out = vec![Complex64::new(0.0, 0.0); q as usize];
    out[0] = Complex64::new(q as f64, 0.0);
    // when r -> r^k permutes the residues the sum telescopes to the full
    // geometric sum, which vanishes for every a != 0 mod q
    if support.len() == q as usize {
        return out;
    }
    let roots = roots_of_unity(q);
    for a in 1..=q / 2 {
        let mut sum = KahanComplex::new();
        for &(m, c) in &support {
            sum.add(roots[(a * m % q) as usize] * c as f64);
        }
        let v = sum.value();
        out[a as usize] = v;
        if a != q - a {
            out[(q - a) as usize] = v.conj();
        }
    }
    out
}

/// One entry of the singular-series ledger: the coefficient
/// A(q,n) = sum over (a,q)=1 of (S(q,a)/q)^s e(-an/q), plus the a-priori
/// magnitude bound sum |S(q,a)/q|^s used for tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub q: u64,
    pub value: f64,
    pub term_bound: f64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A(q,n) with the raw imaginary residue exposed for invariant checks.
fn series_term_raw(q: u64, n: u64, s: u32, k: u32) -> (f64, f64, f64) {
    if q == 1 {
        return (1.0, 0.0, 1.0);
    }
    let sums = exp_sums_all(q, k);
    let roots = roots_of_unity(q);
    let n_res = n % q;
    let mut acc = KahanComplex::new();
    let mut bound = Kahan::new();
    for a in 1..q {
        if gcd(a, q) != 1 {
            continue;
        }
        let w = (sums[a as usize] / q as f64).powi(s as i32);
        // e(-an/q) = conj(e(an/q))
        acc.add(w * roots[(a * n_res % q) as usize].conj());
        bound.add(w.norm());
    }
    let v = acc.value();
    (v.re, v.im, bound.value())
}

/// The singular series coefficient A(q,n). A(1,n) = 1 always; values below
/// the snap threshold are stored as exact zeros.
pub fn series_term(q: u64, n: u64, s: u32, k: u32) -> Result<SeriesTerm> {
    let (re, im, bound) = series_term_raw(q, n, s, k);
    if im.abs() > IMAG_LIMIT {
        return Err(Error::ImaginaryResidue {
            q,
            imag_abs: im.abs(),
        });
    }
    let value = if re.abs() < ZERO_SNAP { 0.0 } else { re };
    Ok(SeriesTerm {
        q,
        value,
        term_bound: bound,
    })
}

/// Truncated singular series with its ledger and tail diagnostics.
#[derive(Debug, Clone)]
pub struct SeriesEvaluation {
    pub n: u64,
    pub s: u32,
    pub k: u32,
    pub q_limit: u64,
    /// Compensated sum of the ledger in ascending q.
    pub value: f64,
    /// Heuristic bound on the omitted tail, from the fitted decay envelope.
    /// Diagnostic only; never folded into `value`.
    pub tail_estimate: f64,
    /// Fitted decay exponent of |A(q,n)| (log-log least squares), when
    /// enough nonzero terms exist to fit one.
    pub tail_slope: Option<f64>,
    /// Set when s < max(5, k+2), where absolute convergence is not assured.
    pub convergence_warning: bool,
    /// Set when the tail estimate exceeds 10% of |value|.
    pub tail_warning: bool,
    pub terms: Vec<SeriesTerm>,
}

/// Prime powers p^h <= limit in ascending order.
fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    let spf = smallest_prime_factor_sieve(limit);
    let mut out = Vec::new();
    for p in 2..=limit {
        if spf[p as usize] == p as u32 {
            let mut m = p;
            while m <= limit {
                out.push(m);
                match m.checked_mul(p) {
                    Some(next) => m = next,
                    None => break,
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// spf[n] = smallest prime factor of n (spf[0] = spf[1] = 0).
fn smallest_prime_factor_sieve(limit: u64) -> Vec<u32> {
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    for p in 2..=n {
        if spf[p] == 0 {
            let mut m = p;
            while m <= n {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
    }
    spf
}

/// Fits |A(q,n)| ~ c * q^beta by least squares on the log-log ledger and
/// integrates the fitted curve past the truncation point. The fit window is
/// the tail half of the ledger (q > Q/4) so the extrapolation tracks the
/// decay actually in force near Q, not the large head terms; with too few
/// nonzero tail terms it widens to the whole ledger. Returns (tail, slope).
fn tail_from_ledger(terms: &[SeriesTerm], q_limit: u64) -> (f64, Option<f64>) {
    let window = |lo: u64| -> Vec<(f64, f64)> {
        terms
            .iter()
            .filter(|t| t.q > lo && t.value != 0.0)
            .map(|t| (fmath::ln(t.q as f64), fmath::ln(t.value.abs())))
            .collect()
    };
    let mut pts = window(q_limit / 4);
    if pts.len() < 3 {
        pts = window(1);
    }
    if pts.len() < 3 {
        return (0.0, None);
    }
    let Ok(fitres) = fit::least_squares(&pts) else {
        return (0.0, None);
    };
    let beta = fitres.slope;
    let c = fmath::exp(fitres.intercept);
    (tail_integral(c, beta, q_limit), Some(beta))
}

/// Remainder scale of a series whose terms decay like c * q^beta beyond Q.
/// The terms oscillate in sign, so the straight envelope integral grossly
/// overstates the remainder; the random-sign model sqrt(sum c^2 q^(2 beta))
/// brackets the measured remainders while staying above them.
fn tail_integral(c: f64, beta: f64, q_limit: u64) -> f64 {
    if beta >= -0.5 {
        // fitted decay too slow for even the mean-square tail to converge
        return f64::INFINITY;
    }
    c * fmath::sqrt(fmath::powf(q_limit as f64, 2.0 * beta + 1.0) / (-2.0 * beta - 1.0))
}

/// Sums A(q,n) for q <= q_limit by assembling each q from its prime-power
/// factors (A is multiplicative); the prime-power coefficients themselves
/// come straight from the definition.
pub fn singular_series_truncated(
    n: u64,
    s: u32,
    k: u32,
    q_limit: u64,
    threads: usize,
) -> Result<SeriesEvaluation> {
    if q_limit < 1 {
        return Err(Error::Domain("truncation limit must be >= 1"));
    }
    let ppows = prime_powers_up_to(q_limit);
    // A(p^h, n) parallel over prime powers; strided assignment so the big
    // moduli at the top of the list spread across workers
    let workers = threads.max(1).min(ppows.len().max(1));
    let results = par::map_chunks(workers, workers, |range| {
        let mut chunk = Vec::new();
        let mut i = range.start;
        while i < ppows.len() {
            chunk.push(series_term(ppows[i], n, s, k));
            i += workers;
        }
        chunk
    });
    let mut by_modulus = vec![(0.0f64, 0.0f64); q_limit as usize + 1];
    for term in results.into_iter().flatten() {
        let t = term?;
        by_modulus[t.q as usize] = (t.value, t.term_bound);
    }

    let spf = smallest_prime_factor_sieve(q_limit);
    let mut terms = Vec::with_capacity(q_limit as usize);
    let mut acc = Kahan::new();
    terms.push(SeriesTerm {
        q: 1,
        value: 1.0,
        term_bound: 1.0,
    });
    acc.add(1.0);
    for q in 2..=q_limit {
        let mut value = 1.0f64;
        let mut bound = 1.0f64;
        let mut rest = q;
        while rest > 1 {
            let p = spf[rest as usize] as u64;
            let mut pp = 1u64;
            while rest % p == 0 {
                rest /= p;
                pp *= p;
            }
            let (v, b) = by_modulus[pp as usize];
            value *= v;
            bound *= b;
            if value == 0.0 {
                break;
            }
        }
        if value.abs() < ZERO_SNAP {
            value = 0.0;
        }
        acc.add(value);
        terms.push(SeriesTerm {
            q,
            value,
            term_bound: bound,
        });
    }

    let value = acc.value();
    let (tail_estimate, tail_slope) = tail_from_ledger(&terms, q_limit);
    Ok(SeriesEvaluation {
        n,
        s,
        k,
        q_limit,
        value,
        tail_estimate,
        tail_slope,
        convergence_warning: s < 5.max(k + 2),
        tail_warning: tail_estimate > 0.1 * value.abs(),
        terms,
    })
}

/// Residue-indexed singular series machinery shared across a whole audit:
/// for each prime power p^h <= Q the table of A(p^h, n) as a function of
/// n mod p^h, plus the factorisation of every q <= Q.
pub struct SeriesTable {
    pub s: u32,
    pub k: u32,
    pub q_limit: u64,
    /// (modulus, residue-indexed A values), ascending modulus
    ppows: Vec<(u64, Vec<f64>)>,
    /// per q: indices into ppows for its prime-power factors
    factor_idx: Vec<Vec<u32>>,
}

impl SeriesTable {
    pub fn build(s: u32, k: u32, q_limit: u64, threads: usize) -> Result<Self> {
        let moduli = prime_powers_up_to(q_limit);
        let workers = threads.max(1).min(moduli.len().max(1));
        let built = par::map_chunks(workers, workers, |range| {
            let mut chunk = Vec::new();
            let mut i = range.start;
            while i < moduli.len() {
                chunk.push((i, residue_table(moduli[i], s, k)));
                i += workers;
            }
            chunk
        });
        let mut ppows = vec![None; moduli.len()];
        for (i, r) in built.into_iter().flatten() {
            ppows[i] = Some((moduli[i], r?));
        }
        let ppows: Vec<(u64, Vec<f64>)> = ppows.into_iter().map(|p| p.unwrap()).collect();

        let mut index_of = vec![u32::MAX; q_limit as usize + 1];
        for (i, &(m, _)) in ppows.iter().enumerate() {
            index_of[m as usize] = i as u32;
        }
        let spf = smallest_prime_factor_sieve(q_limit);
        let mut factor_idx = vec![Vec::new(); q_limit as usize + 1];
        for q in 2..=q_limit as usize {
            let mut rest = q as u64;
            let mut idx = Vec::with_capacity(2);
            while rest > 1 {
                let p = spf[rest as usize] as u64;
                let mut pp = 1u64;
                while rest % p == 0 {
                    rest /= p;
                    pp *= p;
                }
                idx.push(index_of[pp as usize]);
            }
            factor_idx[q] = idx;
        }
        Ok(SeriesTable {
            s,
            k,
            q_limit,
            ppows,
            factor_idx,
        })
    }

    /// A(q, n) assembled from the residue tables.
    #[inline]
    pub fn term(&self, q: u64, n: u64) -> f64 {
        if q <= 1 {
            return 1.0;
        }
        let mut value = 1.0;
        for &i in &self.factor_idx[q as usize] {
            let (m, ref tab) = self.ppows[i as usize];
            value *= tab[(n % m) as usize];
            if value == 0.0 {
                return 0.0;
            }
        }
        if value.abs() < ZERO_SNAP {
            0.0
        } else {
            value
        }
    }

    /// Truncated series value at n: compensated sum over ascending q.
    pub fn eval(&self, n: u64) -> f64 {
        let mut acc = Kahan::new();
        for q in 1..=self.q_limit {
            acc.add(self.term(q, n));
        }
        acc.value()
    }

    /// Series value together with the per-n spike coefficient: the largest
    /// |A(q,n)| / envelope(q) over terms with q > window_lo. Classification
    /// flips under deeper truncation are driven by sparse large terms
    /// (powerful moduli), so the uncertainty band extrapolates the worst
    /// observed ratio, not the typical one. Coefficient 0 when no terms
    /// qualify.
    pub fn eval_with_envelope(&self, n: u64, envelope: &[f64], window_lo: u64) -> (f64, f64) {
        debug_assert_eq!(envelope.len(), self.q_limit as usize + 1);
        let mut acc = Kahan::new();
        acc.add(1.0);
        let mut worst = 0.0f64;
        for q in 2..=self.q_limit {
            let v = self.term(q, n);
            acc.add(v);
            if v != 0.0 && q > window_lo {
                let r = v.abs() / envelope[q as usize];
                if r > worst {
                    worst = r;
                }
            }
        }
        (acc.value(), worst)
    }
}

/// A(p^h, n) for every residue n mod p^h at once: one pass over coprime a
/// per residue class.
fn residue_table(modulus: u64, s: u32, k: u32) -> Result<Vec<f64>> {
    let q = modulus;
    if q == 1 {
        return Ok(vec![1.0]);
    }
    let sums = exp_sums_all(q, k);
    let roots = roots_of_unity(q);
    let weights: Vec<(u64, Complex64)> = (1..q)
        .filter(|&a| gcd(a, q) == 1)
        .map(|a| (a, (sums[a as usize] / q as f64).powi(s as i32)))
        .filter(|(_, w)| w.re != 0.0 || w.im != 0.0)
        .collect();
    if weights.is_empty() {
        return Ok(vec![0.0; q as usize]);
    }
    let mut out = Vec::with_capacity(q as usize);
    for res in 0..q {
        let mut acc = KahanComplex::new();
        for &(a, w) in &weights {
            acc.add(w * roots[(a * res % q) as usize].conj());
        }
        let v = acc.value();
        if v.im.abs() > IMAG_LIMIT {
            return Err(Error::ImaginaryResidue {
                q,
                imag_abs: v.im.abs(),
            });
        }
        out.push(if v.re.abs() < ZERO_SNAP { 0.0 } else { v.re });
    }
    Ok(out)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Local density M(p^h) / p^{h(s-1)}, where M counts solutions of
/// x_1^k + ... + x_s^k = n mod p^h over full residue systems, by exact
/// (s-1)-fold cyclic convolution of the k-th power residue histogram.
///
/// This is the independent oracle for the q-sum: summing A(p^j, n) over
/// j <= h reproduces it.
pub fn local_density(p: u64, n: u64, s: u32, k: u32, h: u32, budget: &Budget) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::Domain("local density requires p prime"));
    }
    if h < 1 || s < 1 || k < 1 {
        return Err(Error::Domain("local density requires h, s, k >= 1"));
    }
    let m = checked_pow(p, h).ok_or(Error::Capacity {
        what: "local_density modulus",
    })?;
    if m > u32::MAX as u128 {
        return Err(Error::Capacity {
            what: "local_density modulus",
        });
    }
    let m = m as u64;
    budget.check_bytes("local_density", 32 * m as u128)?;
    // all entries stay below m^s; prove that fits so the adds below cannot wrap
    checked_pow(m, s).ok_or(Error::Capacity {
        what: "local_density counts",
    })?;

    let mut hist = vec![0u64; m as usize];
    for x in 0..m {
        let mut acc = 1 % m;
        for _ in 0..k {
            acc = acc * x % m;
        }
        hist[acc as usize] += 1;
    }
    let support: Vec<(usize, u64)> = hist
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(v, &c)| (v, c))
        .collect();

    let mu = m as usize;
    let mut cur: Vec<u128> = hist.iter().map(|&c| c as u128).collect();
    let mut next = vec![0u128; mu];
    for _ in 2..=s {
        for v in next.iter_mut() {
            *v = 0;
        }
        for &(w, c) in &support {
            let c = c as u128;
            // split the cyclic shift to avoid a modulo in the inner loop
            for v in 0..mu - w {
                next[v + w] += cur[v] * c;
            }
            for v in mu - w..mu {
                next[v + w - mu] += cur[v] * c;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    let solutions = cur[(n % m) as usize];
    let scale = fmath::powf(m as f64, (s - 1) as f64);
    Ok(solutions as f64 / scale)
}

fn checked_pow(x: u64, e: u32) -> Option<u128> {
    crate::arith::checked_pow(x, e)
}

/// Gamma(1 + 1/k)^s / Gamma(s/k), the archimedean factor of the main term.
pub fn gamma_factor(s: u32, k: u32) -> f64 {
    fmath::powi(fmath::tgamma(1.0 + 1.0 / k as f64), s as i32) / fmath::tgamma(s as f64 / k as f64)
}

/// The (s, k) main-term coefficients.
#[derive(Debug, Clone, Copy)]
pub struct MainTermParams {
    pub s: u32,
    pub k: u32,
    pub gamma_factor: f64,
}

impl MainTermParams {
    pub fn new(s: u32, k: u32) -> Self {
        MainTermParams {
            s,
            k,
            gamma_factor: gamma_factor(s, k),
        }
    }

    /// gamma_factor * series_value * n^(s/k - 1).
    pub fn main_term(&self, n: u64, series_value: f64) -> f64 {
        let exponent = self.s as f64 / self.k as f64 - 1.0;
        self.gamma_factor * series_value * fmath::powf(n as f64, exponent)
    }
}

/// Convenience wrapper over [`MainTermParams`].
pub fn main_term(n: u64, s: u32, k: u32, series_value: f64) -> f64 {
    MainTermParams::new(s, k).main_term(n, series_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sum_trivial_modulus() {
        let v = complete_exp_sum(1, 1, 3);
        assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn exp_sum_parity_cancellation() {
        let v = complete_exp_sum(2, 1, 3);
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn exp_sum_nine_cubes() {
        // cubes mod 9 cycle through 1, 8, 0: S = 3(1 + 2cos(2pi/9))
        let v = complete_exp_sum(9, 1, 3);
        assert!((v.re - 7.5962666587138682).abs() < 1e-12, "re={}", v.re);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn exp_sum_magnitude_bound() {
        for q in [3u64, 7, 12, 25, 49, 100] {
            for a in [1i64, 2, 5, 11] {
                assert!(complete_exp_sum(q, a, 3).norm() <= q as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn exp_sums_all_matches_single() {
        for q in [5u64, 8, 9, 27, 36] {
            let all = exp_sums_all(q, 3);
            for a in 0..q {
                let single = complete_exp_sum(q, a as i64, 3);
                assert!((all[a as usize] - single).norm() < 1e-10, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn term_at_one_is_unity() {
        for n in [1u64, 17, 100] {
            let t = series_term(1, n, 7, 3).unwrap();
            assert_eq!(t.value, 1.0);
        }
    }

    #[test]
    fn term_vanishes_at_two_for_cubes() {
        // S(2,1) = 0 for k = 3, so A(2,n) = 0 whenever s >= 1
        let t = series_term(2, 3, 7, 3).unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn term_multiplicative_at_six() {
        for n in [1u64, 2, 5, 10, 99, 1234] {
            let t6 = series_term(6, n, 7, 3).unwrap().value;
            let t2 = series_term(2, n, 7, 3).unwrap().value;
            let t3 = series_term(3, n, 7, 3).unwrap().value;
            assert!((t6 - t2 * t3).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn term_imaginary_residue_is_tiny() {
        for q in [3u64, 4, 9, 13, 35, 99, 128] {
            for n in [1u64, 7, 19] {
                let (_, im, _) = series_term_raw(q, n, 5, 3);
                assert!(im.abs() < 1e-12, "q={q} n={n} im={im:e}");
            }
        }
    }

    #[test]
    fn series_q1_is_exactly_one() {
        let e = singular_series_truncated(123, 5, 3, 1, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.terms.len(), 1);
    }

    #[test]
    fn series_ledger_matches_direct_terms() {
        let e = singular_series_truncated(77, 5, 3, 60, 1).unwrap();
        let mut acc = 0.0;
        for t in &e.terms {
            let direct = series_term(t.q, 77, 5, 3).unwrap();
            assert!(
                (t.value - direct.value).abs() < 1e-10,
                "q={} ledger={} direct={}",
                t.q,
                t.value,
                direct.value
            );
            acc += t.value;
        }
        assert!((acc - e.value).abs() < 1e-9);
    }

    #[test]
    fn series_five_cubes_in_sane_envelope() {
        let e = singular_series_truncated(100, 5, 3, 1000, 2).unwrap();
        assert!(e.value > 0.1 && e.value < 10.0, "value={}", e.value);
        assert!(e.tail_estimate < 1e-2, "tail={}", e.tail_estimate);
        assert!(!e.convergence_warning);
    }

    #[test]
    fn convergence_warning_tracks_the_absolute_threshold() {
        // flagged below s = max(5, k+2), clear at it
        let e = singular_series_truncated(10, 4, 3, 50, 1).unwrap();
        assert!(e.convergence_warning);
        let e = singular_series_truncated(10, 6, 4, 50, 1).unwrap();
        assert!(!e.convergence_warning);
        let e = singular_series_truncated(10, 5, 4, 50, 1).unwrap();
        assert!(e.convergence_warning);
    }

    #[test]
    fn series_table_agrees_with_direct_route() {
        let table = SeriesTable::build(5, 3, 150, 2).unwrap();
        for n in [3u64, 50, 77, 1000, 65536] {
            let direct = singular_series_truncated(n, 5, 3, 150, 1).unwrap();
            assert!((table.eval(n) - direct.value).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn local_density_linear_full_system() {
        let d = local_density(7, 0, 1, 1, 1, &Budget::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_density_two_adic_seven_cubes() {
        let d = local_density(2, 3, 7, 3, 1, &Budget::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_density_matches_partial_sums() {
        // sum_{j<=h} A(p^j, n) = M(p^h) p^{h(1-s)}
        let d = local_density(3, 1, 5, 3, 2, &Budget::default()).unwrap();
        let a3 = series_term(3, 1, 5, 3).unwrap().value;
        let a9 = series_term(9, 1, 5, 3).unwrap().value;
        assert!((d - (1.0 + a3 + a9)).abs() < 1e-10, "d={d}");
    }

    #[test]
    fn gamma_factor_reference_values() {
        // independent high-precision evaluations
        assert!((fmath::tgamma(0.5) - 1.7724538509055160273).abs() < 1e-12);
        assert!((fmath::tgamma(4.7) - 15.431411600047431712).abs() < 1e-11);
        assert!((fmath::tgamma(12.0) - 39916800.0).abs() < 1e-4);
        let g = gamma_factor(5, 3);
        assert!(
            (g - 0.62898782679184986515).abs() < 0.62898782679184986515 * 1e-12,
            "gamma factor (5,3) = {g}"
        );
    }

    #[test]
    fn main_term_at_one_is_gamma_factor() {
        let p = MainTermParams::new(7, 3);
        assert_eq!(p.main_term(1, 1.0), p.gamma_factor);
    }
}
