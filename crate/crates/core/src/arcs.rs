//! Weyl sums over the four index families, major/minor arc classification
//! for both arc systems, and a diagnostic major-arc quadrature.
//!
//! Phase evaluation never forms alpha * x^k in floating point: the fractional
//! part is extracted from the exact binary expansion of alpha against the
//! exact integer power, so phases are correct to one rounding of the final
//! scaled remainder even when x^k is near 2^63.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::arith::{checked_pow, integer_kth_root, BlockSet, SmoothSet};
use crate::error::{Error, Result};
use crate::fmath;
use crate::kahan::KahanComplex;
use crate::Budget;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Comparisons against arc thresholds carry this guard band; a distance
/// within the band of the threshold raises the ambiguity flag.
pub const GUARD_BAND: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumFamily {
    /// all integers in [1, P]
    Full,
    /// the dyadic range (P/2, P], cubes
    Dyadic,
    /// R-smooth integers up to P, cubes
    Smooth,
    /// smooth dyadic block (Q/2, Q], cubes
    Block,
}

/// An exponential-sum specification with its index set and exact k-th
/// powers cached.
#[derive(Debug, Clone)]
pub struct SumSpec {
    pub family: SumFamily,
    pub k: u32,
    indices: Vec<u64>,
    powers: Vec<u128>,
}

impl SumSpec {
    fn build(family: SumFamily, k: u32, indices: Vec<u64>) -> Result<Self> {
        let mut powers = Vec::with_capacity(indices.len());
        for &x in &indices {
            let p = checked_pow(x, k).ok_or(Error::Capacity {
                what: "sum spec powers",
            })?;
            if p >= (1u128 << 75) {
                return Err(Error::Capacity {
                    what: "sum spec powers (phase reduction bound)",
                });
            }
            powers.push(p);
        }
        Ok(SumSpec {
            family,
            k,
            indices,
            powers,
        })
    }

    /// f_k: indices 1..P, general k.
    pub fn full(p: u64, k: u32) -> Result<Self> {
        if p < 1 || k < 2 {
            return Err(Error::Domain("full family needs P >= 1, k >= 2"));
        }
        Self::build(SumFamily::Full, k, (1..=p).collect())
    }

    /// g: the dyadic cube range (P/2, P].
    pub fn dyadic(p: u64) -> Result<Self> {
        if p < 1 {
            return Err(Error::Domain("dyadic family needs P >= 1"));
        }
        Self::build(SumFamily::Dyadic, 3, (p / 2 + 1..=p).collect())
    }

    /// F over a caller-supplied subset of the dyadic range (P/2, P].
    pub fn dyadic_subset(p: u64, members: &[u64]) -> Result<Self> {
        if members.iter().any(|&x| 2 * x <= p || x > p) {
            return Err(Error::Domain("subset members must lie in (P/2, P]"));
        }
        Self::build(SumFamily::Dyadic, 3, members.to_vec())
    }

    /// h: smooth cubes.
    pub fn smooth(set: &SmoothSet) -> Result<Self> {
        Self::build(SumFamily::Smooth, 3, set.members().to_vec())
    }

    /// H: smooth dyadic block cubes.
    pub fn block(set: &BlockSet) -> Result<Self> {
        Self::build(SumFamily::Block, 3, set.members().to_vec())
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn powers(&self) -> &[u128] {
        &self.powers
    }
}

/// frac(alpha * x) for alpha in [0, 1) and integer x < 2^75, computed from
/// the exact binary expansion of alpha: alpha = m * 2^-E exactly, so
/// frac(alpha x) = (m x mod 2^E) / 2^E up to one final rounding.
pub fn frac_mul(alpha: f64, x: u128) -> f64 {
    debug_assert!((0.0..1.0).contains(&alpha));
    debug_assert!(x < (1u128 << 75));
    if alpha == 0.0 || x == 0 {
        return 0.0;
    }
    let bits = alpha.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac_field = bits & ((1u64 << 52) - 1);
    let (m, e2) = if exp_field == 0 {
        (frac_field, -1074i64)
    } else {
        (frac_field | (1u64 << 52), exp_field - 1075)
    };
    debug_assert!(e2 < 0);
    let e = -e2 as u32;
    let prod = m as u128 * x;
    let mut frac = if e >= 128 {
        // alpha * x < 2^(128 - e) <= 1; no wraparound to strip
        fmath::ldexp(prod as f64, -(e as i32))
    } else {
        let rem = prod & ((1u128 << e) - 1);
        fmath::ldexp(rem as f64, -(e as i32))
    };
    if frac >= 1.0 {
        frac -= 1.0;
    }
    frac
}

#[inline]
fn unit_phase(frac: f64) -> Complex64 {
    let t = TWO_PI * frac;
    Complex64::new(fmath::cos(t), fmath::sin(t))
}

/// alpha mod 1 in [0, 1); rem_euclid of a tiny negative rounds to 1.0,
/// which has to fold back to 0.
#[inline]
fn wrap_unit(alpha: f64) -> f64 {
    let a = fmath::rem_euclid(alpha, 1.0);
    if a >= 1.0 {
        0.0
    } else {
        a
    }
}

/// The Weyl sum over the spec's index set at alpha (taken mod 1).
pub fn weyl_sum(spec: &SumSpec, alpha: f64) -> Complex64 {
    let alpha = wrap_unit(alpha);
    let mut acc = KahanComplex::new();
    for &p in spec.powers() {
        acc.add(unit_phase(frac_mul(alpha, p)));
    }
    acc.value()
}

/// Major/minor arc classification systems.
#[derive(Debug, Clone, Copy)]
pub enum ArcSystem {
    /// Arcs |q alpha - a| <= P/(2kN) with q <= P/(2k), for the k-th power
    /// problem at height N (P = floor(N^{1/k})).
    Waring { k: u32, limit: u64, root: u64 },
    /// alpha is minor iff every q with ||q alpha|| <= P^(-9/4) has
    /// q > P^(3/4); the major arcs are the complement.
    CubicFive { p: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcDecision {
    pub major: bool,
    /// coprime witness (q, a) with a in [0, q), present iff major
    pub witness: Option<(u64, u64)>,
    /// set when the decisive distance sits inside the guard band of the
    /// threshold; the caller decides how to treat boundary cases
    pub ambiguous: bool,
}

impl ArcSystem {
    pub fn waring(k: u32, limit: u64) -> Result<Self> {
        if k < 2 || limit < 2 {
            return Err(Error::Domain("waring arcs need k >= 2, N >= 2"));
        }
        let root = integer_kth_root(limit, k);
        if root < 1 {
            return Err(Error::Domain("waring arcs need P >= 1"));
        }
        Ok(ArcSystem::Waring { k, limit, root })
    }

    pub fn cubic_five(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain("cubic arcs need P >= 2"));
        }
        if checked_pow(p, 3).map_or(true, |c| c > u64::MAX as u128) {
            return Err(Error::Capacity {
                what: "cubic arc bound P^3",
            });
        }
        Ok(ArcSystem::CubicFive { p })
    }

    /// Largest admissible arc denominator, exactly.
    pub fn q_max(&self) -> u64 {
        match *self {
            ArcSystem::Waring { k, root, .. } => root / (2 * k as u64),
            // q <= P^(3/4) iff q^4 <= P^3
            ArcSystem::CubicFive { p } => {
                let cube = checked_pow(p, 3).unwrap() as u64;
                let mut q = integer_kth_root(cube, 4);
                while checked_pow(q + 1, 4).is_some_and(|v| v <= cube as u128) {
                    q += 1;
                }
                q
            }
        }
    }

    /// Half-width threshold on |q alpha - a| (float approximation; rational
    /// classification compares exactly).
    pub fn delta(&self) -> f64 {
        match *self {
            ArcSystem::Waring { k, limit, root } => {
                root as f64 / (2.0 * k as f64 * limit as f64)
            }
            ArcSystem::CubicFive { p } => fmath::powf(p as f64, -9.0 / 4.0),
        }
    }

    pub fn power(&self) -> u64 {
        match *self {
            ArcSystem::Waring { root, .. } => root,
            ArcSystem::CubicFive { p } => p,
        }
    }

    pub fn k(&self) -> u32 {
        match *self {
            ArcSystem::Waring { k, .. } => k,
            ArcSystem::CubicFive { .. } => 3,
        }
    }

    /// Classifies a binary64 alpha via its continued-fraction convergents.
    ///
    /// Any coprime pair satisfying the arc inequality is necessarily a
    /// convergent: the system parameters guarantee q_max * delta * q < 1/(2q),
    /// so Legendre's criterion applies. Distances within GUARD_BAND of the
    /// threshold set the ambiguity flag.
    pub fn classify(&self, alpha: f64) -> ArcDecision {
        let alpha = wrap_unit(alpha);
        let delta = self.delta();
        let q_max = self.q_max();
        let mut ambiguous = false;
        for (q, a) in convergents(alpha, q_max) {
            let dist = (q as f64 * alpha - a as f64).abs();
            if (dist - delta).abs() <= GUARD_BAND {
                ambiguous = true;
            }
            if dist <= delta {
                return ArcDecision {
                    major: true,
                    witness: Some((q, a % q)),
                    ambiguous,
                };
            }
        }
        ArcDecision {
            major: false,
            witness: None,
            ambiguous,
        }
    }

    /// Exact classification of a rational alpha = num/den in [0, 1).
    pub fn classify_rational(&self, num: u64, den: u64) -> Result<ArcDecision> {
        if den == 0 || num >= den {
            return Err(Error::Domain("rational alpha must satisfy 0 <= num/den < 1"));
        }
        let g = gcd(num.max(1), den);
        let (num, den) = if num == 0 { (0, 1) } else { (num / g, den / g) };
        let q_max = self.q_max();
        for (q, a) in rational_convergents(num, den, q_max) {
            // dist = |q*num/den - a| = |q*num - a*den| / den, exact
            let qa = q as u128 * num as u128;
            let ad = a as u128 * den as u128;
            let diff = qa.abs_diff(ad);
            let holds = match *self {
                ArcSystem::Waring { k, limit, root } => {
                    // diff/den <= P/(2kN)  <=>  diff * 2kN <= P * den
                    let lhs = diff
                        .checked_mul(2 * k as u128 * limit as u128)
                        .ok_or(Error::Capacity {
                            what: "rational arc comparison",
                        })?;
                    lhs <= root as u128 * den as u128
                }
                ArcSystem::CubicFive { p } => {
                    // diff/den <= P^(-9/4)  <=>  diff^4 * P^9 <= den^4
                    let p9 = checked_pow(p, 9).ok_or(Error::Capacity {
                        what: "rational arc comparison P^9",
                    })?;
                    le_pow4_scaled(diff, p9, den as u128)
                }
            };
            if holds {
                return Ok(ArcDecision {
                    major: true,
                    witness: Some((q, a % q)),
                    ambiguous: false,
                });
            }
        }
        Ok(ArcDecision {
            major: false,
            witness: None,
            ambiguous: false,
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Convergents (q, a) of alpha with q <= q_max, by the standard recurrence
/// on the float. Reliable for the denominator ranges the arc systems use
/// (q_max far below 2^26).
fn convergents(alpha: f64, q_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut h0, mut k0, mut h1, mut k1) = (1u64, 0u64, 0u64, 1u64);
    // (h1, k1) starts at a0/1 with a0 = floor(alpha) = 0
    out.push((1, 0));
    let mut x = alpha;
    loop {
        let fr = x - fmath::floor(x);
        if fr <= f64::EPSILON {
            break;
        }
        x = 1.0 / fr;
        let a = fmath::floor(x) as u64;
        let h2 = match a.checked_mul(h1).and_then(|v| v.checked_add(h0)) {
            Some(v) => v,
            None => break,
        };
        let k2 = match a.checked_mul(k1).and_then(|v| v.checked_add(k0)) {
            Some(v) => v,
            None => break,
        };
        if k2 > q_max {
            break;
        }
        out.push((k2, h2));
        (h0, k0, h1, k1) = (h1, k1, h2, k2);
    }
    out
}

/// Convergents of num/den by the Euclidean algorithm, exact.
fn rational_convergents(num: u64, den: u64, q_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    out.push((1u64, 0u64));
    let (mut h0, mut k0, mut h1, mut k1) = (1u64, 0u64, 0u64, 1u64);
    let (mut p, mut q) = (num, den);
    while p != 0 {
        let a = q / p;
        let r = q % p;
        let h2 = match a.checked_mul(h1).and_then(|v| v.checked_add(h0)) {
            Some(v) => v,
            None => break,
        };
        let k2 = match a.checked_mul(k1).and_then(|v| v.checked_add(k0)) {
            Some(v) => v,
            None => break,
        };
        if k2 > q_max {
            break;
        }
        out.push((k2, h2));
        (h0, k0, h1, k1) = (h1, k1, h2, k2);
        (p, q) = (r, p);
    }
    out
}

// 256-bit helpers for the exact quartic comparison diff^4 * p9 <= den^4.

fn umul128(a: u128, b: u128) -> (u128, u128) {
    let (a_hi, a_lo) = (a >> 64, a & u64::MAX as u128);
    let (b_hi, b_lo) = (b >> 64, b & u64::MAX as u128);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & u64::MAX as u128) + (hl & u64::MAX as u128);
    let lo = (mid << 64) | (ll & u64::MAX as u128);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (hi, lo)
}

/// diff^4 * scale <= den^4 with diff, den < 2^63 and scale < 2^127, exact.
fn le_pow4_scaled(diff: u128, scale: u128, den: u128) -> bool {
    debug_assert!(diff < (1 << 63) && den < (1 << 63));
    let d2 = diff * diff;
    let n2 = den * den;
    let (lh, ll) = umul128(d2, d2); // diff^4, 256 bits
    let (rh, rl) = umul128(n2, n2); // den^4, 256 bits
    // lhs = diff^4 * scale as three 128-bit limbs
    let (m1, l0) = umul128(ll, scale);
    let (h1, m0) = umul128(lh, scale);
    let (mid, carry) = m0.overflowing_add(m1);
    let hi = h1 + u128::from(carry);
    // rhs = (0, rh, rl)
    (hi, mid, l0) <= (0, rh, rl)
}

/// Major-arc quadrature of f_k(alpha; P)^s e(-n alpha) over the system's
/// arcs, by per-arc trapezoid rules at the requested mesh and at half mesh.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// the half-mesh evaluation
    pub value: Complex64,
    /// half the distance between the two mesh levels
    pub error_estimate: f64,
    pub evaluations: u64,
}

pub fn major_arc_quadrature(
    system: &ArcSystem,
    n: u64,
    s: u32,
    mesh: f64,
    threads: usize,
    budget: &Budget,
) -> Result<Quadrature> {
    if !(mesh > 0.0) {
        return Err(Error::Domain("mesh must be positive"));
    }
    let p = system.power();
    let k = system.k();
    let spec = SumSpec::full(p, k)?;
    let delta = system.delta();
    let q_max = system.q_max();

    // the integrand is a trig polynomial with frequencies in [-n, s P^k - n];
    // resolve the faster of that and the arc-local rate q P^(k-1)
    let local_rate = fmath::powf(p as f64, (k - 1) as f64);
    let frequency = (s as f64) * fmath::powf(p as f64, k as f64) + n as f64;
    let mut arcs: Vec<(u64, u64, usize)> = Vec::new();
    let mut evals: u128 = 0;
    for q in 1..=q_max {
        let width = 2.0 * delta / q as f64;
        let step = mesh / (q as f64 * local_rate).max(frequency);
        let intervals = ((width / step) as usize).clamp(8, 1 << 20);
        let a_hi = if q == 1 { 0 } else { q - 1 };
        for a in 0..=a_hi {
            if q == 1 || gcd(a, q) == 1 {
                arcs.push((q, a, intervals));
                evals += 3 * (intervals as u128 + 1);
            }
        }
    }
    budget.check_evals("major_arc_quadrature", evals * spec.len() as u128)?;

    let integrand = |alpha: f64| -> Complex64 {
        let alpha = wrap_unit(alpha);
        let f = weyl_sum(&spec, alpha);
        let minus_n = unit_phase(frac_mul(alpha, n as u128)).conj();
        f.powi(s as i32) * minus_n
    };

    // arcs evaluate independently; the reduction runs in (q, a) order so the
    // result is bytewise independent of the worker count
    let per_arc = crate::par::map_chunks(arcs.len(), threads, |range| {
        let mut out = Vec::with_capacity(range.len());
        for &(q, a, intervals) in &arcs[range] {
            let center = a as f64 / q as f64;
            let w = delta / q as f64;
            let mut pair = [Complex64::new(0.0, 0.0); 2];
            let mut done = 0u64;
            for (slot, m) in [(0usize, intervals), (1, 2 * intervals)] {
                let step = 2.0 * w / m as f64;
                let mut arc_sum = KahanComplex::new();
                for i in 0..=m {
                    let x = center - w + step * i as f64;
                    let weight = if i == 0 || i == m { 0.5 } else { 1.0 };
                    arc_sum.add(integrand(x) * weight);
                    done += 1;
                }
                pair[slot] = arc_sum.value() * step;
            }
            out.push((pair, done));
        }
        out
    });
    let mut coarse = KahanComplex::new();
    let mut fine = KahanComplex::new();
    let mut done: u64 = 0;
    for (pair, evals) in per_arc.into_iter().flatten() {
        coarse.add(pair[0]);
        fine.add(pair[1]);
        done += evals;
    }
    let value = fine.value();
    Ok(Quadrature {
        value,
        error_estimate: (coarse.value() - value).norm() / 2.0,
        evaluations: done,
    })
}
