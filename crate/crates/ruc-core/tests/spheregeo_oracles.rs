//! Monte Carlo oracles for the sphere geometry: cap measure against direct
//! sampling, height inversion against an empirical inverse, net quality, the
//! covering guarantee, and the arc-shattering exhaustive oracle.

mod common;

use common::mean_and_stderr;
use rayon::prelude::*;
use ruc_core::linalg::PureState;
use ruc_core::randgen::{derive_stream, random_pure_state, SeededStream};
use ruc_core::spheregeo::{
    build_covering_net, build_net_probabilistic, cap_measure, chernoff_floor_check,
    empirical_shatter_search, height_for_measure, verify_net_against_caps, SetSystemStats,
};
use ruc_core::linalg::trace_distance;

#[test]
fn cap_measure_matches_monte_carlo() {
    let d = 2usize;
    let h = 0.3f64;
    let analytic = cap_measure(h, d).unwrap();
    let master = SeededStream::new(404);
    let center = PureState::basis_state(d, 0).unwrap();
    let n = 1_000_000u64;
    let hits: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = random_pure_state(d, &derive_stream(&master, i)).unwrap();
            f64::from(center.real_inner(&x).unwrap() >= 1.0 - h)
        })
        .collect();
    let (mean, se) = mean_and_stderr(&hits);
    assert!(
        (mean - analytic).abs() <= 3.0 * se,
        "MC {mean} vs analytic {analytic} (se {se})"
    );
}

#[test]
fn height_inversion_matches_monte_carlo_inverse() {
    let d = 4usize;
    let eps = 0.01f64;
    let h = height_for_measure(eps, d).unwrap();

    // Common-random-number empirical measure: with the sample set fixed, the
    // empirical cap measure is monotone in h, so it can be bisected.
    let master = SeededStream::new(505);
    let center = PureState::basis_state(d, 0).unwrap();
    let n = 4_000_000u64;
    let inners: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = random_pure_state(d, &derive_stream(&master, i)).unwrap();
            center.real_inner(&x).unwrap()
        })
        .collect();
    let empirical = |height: f64| -> f64 {
        inners.iter().filter(|&&v| v >= 1.0 - height).count() as f64 / n as f64
    };
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if empirical(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h_mc = 0.5 * (lo + hi);
    assert!(
        (h - h_mc).abs() <= 1e-3,
        "analytic h {h} vs MC-inverted {h_mc}"
    );

    let at_h = empirical(h);
    let se = (eps * (1.0 - eps) / n as f64).sqrt();
    assert!((at_h - eps).abs() <= 3.0 * se);
}

#[test]
fn theorem_net_has_no_missed_caps() {
    let stream = SeededStream::new(606);
    let net = build_net_probabilistic(2, 0.2, 10.0, &stream).unwrap();
    assert_eq!(net.len(), 233);
    let misses =
        verify_net_against_caps(&net, 0.2, 10_000, &derive_stream(&stream, 999_999)).unwrap();
    // Expected miss probability per cap is (1−0.2)^233 ≈ 5e-23.
    assert_eq!(misses, 0);
}

#[test]
fn covering_net_covers_fresh_probes() {
    let build_stream = SeededStream::new(707);
    let delta = 0.5f64;
    let net = build_covering_net(2, delta, &build_stream).unwrap();
    let probe_stream = SeededStream::new(708);
    let worst: f64 = (0..100_000u64)
        .into_par_iter()
        .map(|i| {
            let probe = random_pure_state(2, &derive_stream(&probe_stream, i)).unwrap();
            net.points()
                .iter()
                .map(|p| trace_distance(&probe, p).unwrap())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst <= delta, "uncovered probe at distance {worst}");
}

#[test]
fn chernoff_tail_matches_direct_binomial_sum() {
    // Independent oracle: direct Σ C(t,k) ε^k (1−ε)^{t−k} accumulation.
    let direct = |t: u64, eps: f64, k0: u64| -> f64 {
        let mut total = 0.0f64;
        for k in k0..=t {
            let mut log_term = 0.0f64;
            for j in 0..k {
                log_term += ((t - j) as f64).ln() - ((j + 1) as f64).ln();
            }
            log_term += k as f64 * eps.ln();
            if t > k {
                log_term += (t - k) as f64 * (1.0 - eps).ln();
            }
            total += log_term.exp();
        }
        total.min(1.0)
    };
    for (t, eps) in [(16u64, 0.5f64), (32, 0.25), (64, 0.125), (11, 0.8)] {
        let k0 = (t as f64 * eps / 2.0).ceil() as u64;
        let (p, _) = chernoff_floor_check(t, eps).unwrap();
        let oracle = direct(t, eps, k0);
        assert!(
            (p - oracle).abs() < 1e-10,
            "t={t}, eps={eps}: {p} vs oracle {oracle}"
        );
    }
    // Frozen values from the direct sum.
    let (p, passes) = chernoff_floor_check(16, 0.5).unwrap();
    assert!((p - 0.9893646240234375).abs() < 1e-12);
    assert!(passes);
    let (p, passes) = chernoff_floor_check(32, 0.25).unwrap();
    assert!((p - 0.9748385275870872).abs() < 1e-10);
    assert!(passes);
}

#[test]
fn shatter_search_matches_exhaustive_arc_oracle_on_circle() {
    // For points on the phase circle (d = 1), caps are arcs, so the
    // realizable subsets are exactly the contiguous circular runs. The
    // largest shattered subset size is computable exhaustively.
    let exhaustive = |angles: &[f64]| -> u32 {
        let m = angles.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| angles[a].partial_cmp(&angles[b]).unwrap());
        let mut realized: Vec<u8> = vec![0];
        for start in 0..m {
            for len in 1..=m {
                let mut mask = 0u8;
                for k in 0..len {
                    mask |= 1 << order[(start + k) % m];
                }
                realized.push(mask);
            }
        }
        for k in (1..=m as u32).rev() {
            for subset in 0u8..(1 << m) {
                if subset.count_ones() != k {
                    continue;
                }
                let mut seen = std::collections::HashSet::new();
                for r in &realized {
                    seen.insert(r & subset);
                }
                if seen.len() == 1usize << k {
                    return k;
                }
            }
        }
        0
    };

    let stream = SeededStream::new(808);
    for (m, tag) in [(2usize, 0u64), (3, 1), (4, 2)] {
        let sub = derive_stream(&stream, tag);
        // Mirror the search's own point layout: sample k = 0 configuration.
        let config = derive_stream(&sub, 0);
        let angles: Vec<f64> = (0..m as u64)
            .map(|i| {
                random_pure_state(1, &derive_stream(&config, i))
                    .unwrap()
                    .amplitude(0)
                    .arg()
            })
            .collect();
        let expected = exhaustive(&angles);
        let found = empirical_shatter_search(1, m, 1, &sub).unwrap();
        assert_eq!(found, expected, "m = {m}");
    }
}

#[test]
fn shatter_search_circle_caps_at_three() {
    // Arcs on the circle shatter three points but never four.
    let got = empirical_shatter_search(1, 4, 20, &SeededStream::new(809)).unwrap();
    assert_eq!(got, 3);
    let got3 = empirical_shatter_search(1, 3, 20, &SeededStream::new(810)).unwrap();
    assert_eq!(got3, 3);
}

#[test]
fn shatter_search_sphere_reaches_five() {
    // Half-space sections of S³ shatter five generic points; six would
    // contradict the Radon partition. The randomized search reports a lower
    // bound, pinned here under a fixed seed.
    let got = empirical_shatter_search(2, 6, 8, &SeededStream::new(811)).unwrap();
    assert_eq!(got, 5);
}

#[test]
fn set_system_stats_table() {
    let stats = SetSystemStats::new(3, 8).unwrap();
    for (m, bound) in &stats.shatter_bounds {
        assert!(*bound <= 1u128 << m);
    }
    assert_eq!(stats.vc_dim, 3);
    assert_eq!(stats.shatter_bounds[4], (4, 15));
}
