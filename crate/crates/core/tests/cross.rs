//! Cross-module oracle checks: the counting, series, arc, and moment paths
//! must reproduce each other where their domains overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use waring_core::arcs::{major_arc_quadrature, weyl_sum, ArcSystem, SumSpec};
use waring_core::arith::smooth_set;
use waring_core::moments::{even_moment_exact, MomentSpec};
use waring_core::series::{local_density, main_term, series_term, singular_series_truncated};
use waring_core::Budget;

#[test]
fn local_global_identity_small_grid() {
    // sum_{j<=h} A(p^j, n) = M(p^h) p^(h(1-s)); the full grid runs in the
    // acceptance suite, this keeps a fast cross-check close to the code
    let budget = Budget::default();
    for &k in &[3u32, 4] {
        for &p in &[2u64, 3, 5, 7] {
            for h in 1..=3u32 {
                for &s in &[3u32, 5, 7] {
                    for &n in &[1u64, 17, 100] {
                        let density = local_density(p, n, s, k, h, &budget).unwrap();
                        let mut partial = 1.0;
                        let mut q = 1u64;
                        for _ in 0..h {
                            q *= p;
                            partial += series_term(q, n, s, k).unwrap().value;
                        }
                        assert!(
                            (density - partial).abs() < 1e-8,
                            "p={p} h={h} s={s} k={k} n={n}: {density} vs {partial}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn multiplicativity_spot_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..25 {
        let q1 = rng.gen_range(2u64..=40);
        let q2 = rng.gen_range(2u64..=40);
        if gcd(q1, q2) != 1 {
            continue;
        }
        let n = rng.gen_range(1u64..=10_000);
        let k = *[3u32, 4, 5].get(rng.gen_range(0..3)).unwrap();
        let s = rng.gen_range(5u32..=8);
        let a1 = series_term(q1, n, s, k).unwrap().value;
        let a2 = series_term(q2, n, s, k).unwrap().value;
        let a12 = series_term(q1 * q2, n, s, k).unwrap().value;
        assert!(
            (a12 - a1 * a2).abs() < 1e-9,
            "q1={q1} q2={q2} n={n} s={s} k={k}"
        );
    }
}

#[test]
fn series_against_local_density_product() {
    // the q-sum at a deep truncation against the product of local densities
    // over p <= 100, three significant digits
    let budget = Budget::default();
    let eval = singular_series_truncated(100, 7, 3, 10_000, 8).unwrap();
    let mut product = 1.0;
    for p in [
        2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
        83, 89, 97,
    ] {
        let h = match p {
            2 | 3 => 4,
            _ if p <= 13 => 2,
            _ => 1,
        };
        product *= local_density(p, 100, 7, 3, h, &budget).unwrap();
    }
    let rel = (eval.value - product).abs() / product.abs();
    assert!(
        rel < 5e-4,
        "series {} vs local product {} (rel {rel:.2e})",
        eval.value,
        product
    );
}

#[test]
fn quadrature_tracks_main_term_for_five_cubes() {
    let n = 10_000u64;
    let p = 22u64; // ceil(n^(1/3))
    let sys = ArcSystem::cubic_five(p).unwrap();
    let series = singular_series_truncated(n, 5, 3, 2_000, 4).unwrap();
    let expected = main_term(n, 5, 3, series.value);
    let quad = major_arc_quadrature(&sys, n, 5, 0.2, 2, &Budget::default()).unwrap();
    let rel = (quad.value.re - expected).abs() / expected;
    assert!(
        rel < 0.15,
        "quadrature {} vs main term {expected} (rel {rel:.3})",
        quad.value.re
    );
    assert!(
        quad.value.im.abs() <= quad.error_estimate.max(1e-6 * expected),
        "imag {} err {}",
        quad.value.im,
        quad.error_estimate
    );
}

#[test]
fn quadrature_mesh_halving_stays_within_error() {
    let sys = ArcSystem::cubic_five(12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let n = rng.gen_range(100u64..=5 * 12u64.pow(3));
        let coarse = major_arc_quadrature(&sys, n, 5, 0.4, 1, &Budget::default()).unwrap();
        let fine = major_arc_quadrature(&sys, n, 5, 0.2, 2, &Budget::default()).unwrap();
        let drift = (coarse.value - fine.value).norm();
        assert!(
            drift <= coarse.error_estimate.max(1e-9) * 4.0,
            "n={n} drift={drift} err={}",
            coarse.error_estimate
        );
    }
}

#[test]
fn waring_major_arc_measure_matches_monte_carlo() {
    let sys = ArcSystem::waring(3, 1_000_000).unwrap();
    let (q_max, delta) = match sys {
        ArcSystem::Waring { k, limit, root } => {
            (root / (2 * k as u64), root as f64 / (2.0 * k as f64 * limit as f64))
        }
        _ => unreachable!(),
    };
    // total arc length: sum over q <= q_max of phi(q) * 2 delta / q
    let mut expected = 0.0;
    for q in 1..=q_max {
        let phi = (1..=q).filter(|&a| gcd(a, q) == 1).count() as f64;
        expected += phi * 2.0 * delta / q as f64;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 1_000_000u64;
    let mut hits = 0u64;
    for _ in 0..trials {
        let alpha: f64 = rng.gen();
        if sys.classify(alpha).major {
            hits += 1;
        }
    }
    let freq = hits as f64 / trials as f64;
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    assert!(
        (freq - expected).abs() <= 3.0 * sigma,
        "freq={freq:.6e} expected={expected:.6e} sigma={sigma:.2e}"
    );
}

#[test]
fn moment_orthogonality_against_riemann_sum() {
    // the exact count equals the defining integral; a uniform Riemann sum
    // over 10^6 nodes is exact for trig polynomials of lower degree
    let budget = Budget::default();
    let cases: Vec<(MomentSpec, &str)> = vec![
        (
            MomentSpec::new(vec![(SumSpec::full(10, 3).unwrap(), 2)]).unwrap(),
            "|f3(10)|^2",
        ),
        (
            MomentSpec::new(vec![(SumSpec::full(8, 3).unwrap(), 4)]).unwrap(),
            "|f3(8)|^4",
        ),
        (
            MomentSpec::new(vec![
                (SumSpec::dyadic(8).unwrap(), 2),
                (SumSpec::smooth(&smooth_set(8, 4.0)).unwrap(), 2),
            ])
            .unwrap(),
            "|g(8)^2 h(8,4)^2|",
        ),
    ];
    for (spec, label) in cases {
        let exact = even_moment_exact(&spec, 1, 1, &budget).unwrap() as f64;
        let nodes = 1_000_000u32;
        let mut sum = 0.0;
        for i in 0..nodes {
            let alpha = i as f64 / nodes as f64;
            let mut prod = 1.0;
            for (s, e) in spec.factors() {
                let v = weyl_sum(s, alpha).norm_sqr();
                prod *= v.powi((*e / 2) as i32);
            }
            sum += prod;
        }
        sum /= nodes as f64;
        let rel = (sum - exact).abs() / exact;
        assert!(rel < 1e-3, "{label}: quadrature {sum} vs exact {exact}");
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
