use std::f64::consts::LN_2;

use fronthaul::branch::{
    classify_region, concave_allocation, density_hessian, dividing_curve, multipliers_from_point,
    stationarity_residuals, stationary_branches, Branch, MultiplierPair,
};
use fronthaul::gib::{awgn_capacity, info_rate, info_rate_slope, PerUseRate, SnrPoint};
use fronthaul::quantizer::{bpsk_sign_mi, sign_quantizer_mi_gaussian, stochastic_quantizer_mi};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative slack of a few ulps for bounds reached along different rounding paths.
const ULPS: f64 = 4.0 * f64::EPSILON;

fn ir(rho: f64, c: f64) -> f64 {
    info_rate(SnrPoint::new(rho).unwrap(), PerUseRate::finite(c).unwrap())
}

proptest! {
    #[test]
    fn info_rate_below_both_resources(rho in 0.0..1e4f64, c in 0.0..20.0f64) {
        let v = ir(rho, c);
        prop_assert!(v >= 0.0);
        let cap = awgn_capacity(SnrPoint::new(rho).unwrap());
        prop_assert!(v <= c * (1.0 + ULPS));
        prop_assert!(v <= cap * (1.0 + ULPS));
    }

    #[test]
    fn info_rate_increasing_and_concave_in_rate(rho in 1e-3..1e3f64, c in 0.01..10.0f64) {
        let h = 1e-3;
        let (a, b, d) = (ir(rho, c - h), ir(rho, c), ir(rho, c + h));
        prop_assert!(d >= b && b >= a);
        prop_assert!(a + d - 2.0 * b <= 1e-13);
    }

    #[test]
    fn info_rate_increasing_in_snr(rho in 0.0..1e3f64, c in 0.0..10.0f64) {
        prop_assert!(ir(rho * 1.01 + 1e-6, c) >= ir(rho, c));
    }

    #[test]
    fn slope_matches_difference_quotient(rho in 1e-2..1e3f64, c in 0.05..6.0f64) {
        // five-point stencil
        let h = 1e-3;
        let fd = (8.0 * (ir(rho, c + h) - ir(rho, c - h)) - (ir(rho, c + 2.0 * h) - ir(rho, c - 2.0 * h))) / (12.0 * h);
        let an = info_rate_slope(SnrPoint::new(rho).unwrap(), c);
        prop_assert!((fd - an).abs() <= 1e-6 * an, "{} vs {}", fd, an);
    }

    #[test]
    fn branches_are_stationary(h2 in 0.05..5.0f64, ls in 1e-3..2.0f64, lc in 1e-3..0.999f64) {
        let m = MultiplierPair::new(ls, lc);
        for b in stationary_branches(h2, m).unwrap() {
            let (rs, rc) = stationarity_residuals(h2, m, b.s, b.c);
            prop_assert!(rs < 1e-7 && rc < 1e-7, "{:?}: {} {}", b, rs, rc);
            prop_assert!((b.q - (-b.c).exp()).abs() <= 1e-12 * b.q.max(1e-300));
        }
    }

    #[test]
    fn concave_branch_clears_one_bit(h2 in 0.05..5.0f64, ls in 1e-3..2.0f64, lc in 1e-3..0.999f64) {
        if let Some((_, c)) = concave_allocation(h2, MultiplierPair::new(ls, lc)).unwrap() {
            prop_assert!(c > LN_2 - 1e-12);
        }
    }

    #[test]
    fn concave_points_round_trip(s in 0.05..50.0f64, c in 0.05..8.0f64) {
        let label = classify_region(s, c).unwrap();
        if label.concave && label.det > 1e-6 {
            let m = multipliers_from_point(s, c, 1.0);
            let (s2, c2) = concave_allocation(1.0, m).unwrap().unwrap();
            prop_assert!((s2 - s).abs() <= 1e-7 * s && (c2 - c).abs() <= 1e-7 * c);
        }
    }

    #[test]
    fn dividing_curve_is_singular(lc in 1e-6..0.9999f64) {
        let (s, c) = dividing_curve(lc);
        let h = density_hessian(s, c);
        let scale = (h.ss * h.cc).abs().max(h.sc * h.sc);
        prop_assert!(h.det().abs() <= 1e-9 * scale);
        prop_assert!(c > LN_2);
    }
}

/// The concave branch is selected exactly where the density is locally concave.
#[test]
fn branch_sign_matches_concavity_on_grid() {
    let mut checked = 0;
    for i in 1..=200 {
        let s = 0.1 * i as f64;
        for j in 1..=100 {
            let c = 0.05 * j as f64;
            let l = classify_region(s, c).unwrap();
            if l.det.abs() < 1e-4 {
                continue;
            }
            assert_eq!(l.psi == Branch::Plus, l.concave, "s = {s}, c = {c}, det = {}", l.det);
            checked += 1;
        }
    }
    assert!(checked > 15_000);
}

#[test]
fn stochastic_beats_sign_quantizer() {
    for k in 0..50 {
        let snr = 10f64.powf(-2.0 + 4.0 * k as f64 / 49.0);
        let gib = stochastic_quantizer_mi(snr, 1.0).unwrap();
        let sign = sign_quantizer_mi_gaussian(snr, 128).unwrap();
        assert!(gib >= sign, "snr = {snr}: {gib} < {sign}");
    }
}

#[test]
fn quantizer_curves_are_ordered_and_bounded() {
    let mut prev = [0.0; 3];
    for k in 0..60 {
        let snr = 10f64.powf(-3.0 + 6.0 * k as f64 / 59.0);
        let cap = awgn_capacity(SnrPoint::new(snr).unwrap());
        let now = [
            stochastic_quantizer_mi(snr, 1.0).unwrap(),
            sign_quantizer_mi_gaussian(snr, 64).unwrap(),
            bpsk_sign_mi(snr).unwrap(),
        ];
        for (v, p) in now.iter().zip(prev) {
            assert!(*v >= p - 1e-14 && *v <= LN_2 + 1e-15);
        }
        // binary input may exceed Gaussian capacity only by quadrature noise
        assert!(now[0] <= cap + 1e-15 && now[1] <= cap + 1e-15 && now[2] <= cap + 1e-12);
        prev = now;
    }
}

#[test]
fn quadrature_orders_agree() {
    for k in 0..30 {
        let snr = 10f64.powf(-2.0 + 4.0 * k as f64 / 29.0);
        let a = sign_quantizer_mi_gaussian(snr, 64).unwrap();
        let b = sign_quantizer_mi_gaussian(snr, 128).unwrap();
        assert!((a - b).abs() < 1e-8, "snr = {snr}");
    }
}

#[test]
fn sign_quantizer_regression_values() {
    let cases = [(1.0, 0.193_147_180_560), (100.0, 0.621_466_353_478), (1e6, 0.692_426_533_777)];
    for (snr, v) in cases {
        assert!((sign_quantizer_mi_gaussian(snr, 128).unwrap() - v).abs() < 1e-11, "snr = {snr}");
    }
}

/// Sample mean of `ln(2 P(z | x))` with `z = sign(x + n)`.
#[test]
fn sign_quantizer_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let x: f64 = StandardNormal.sample(&mut rng);
        let noise: f64 = StandardNormal.sample(&mut rng);
        let z = if x + noise >= 0.0 { 1.0 } else { -1.0 };
        let p = 0.5 * libm::erfc(-z * x / 2f64.sqrt());
        let v = (2.0 * p).ln();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let sd = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let quad = sign_quantizer_mi_gaussian(1.0, 128).unwrap();
    assert!((mean - quad).abs() < 3.0 * sd, "mc {mean} +- {sd}, quadrature {quad}");
}
