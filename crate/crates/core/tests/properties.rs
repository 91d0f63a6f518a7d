//! Property tests for the enclosure formulas and the sampled ranges.

use num_complex::Complex64;
use proptest::prelude::*;

use qnr_enclose::constants::{self, DampingConstants};
use qnr_enclose::enclosures::{self, EnclosureRegion};
use qnr_enclose::linalg;
use qnr_enclose::model;
use qnr_enclose::ranges::{self, SampleStrategy, SplitMix64};
use qnr_enclose::Extended;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn synthetic(k: f64, beta: f64, mu: f64, delta: f64) -> DampingConstants {
    DampingConstants {
        beta,
        gamma: Extended::Infinite,
        delta,
        mu,
        a0: 1.0,
        k: Extended::Finite(k),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sector_slope_window_and_mu_monotonicity(
        k in 0.0f64..20.0,
        mu in 0.05f64..50.0,
        stretch in 1.0f64..4.0,
    ) {
        let slope = enclosures::k_mu(k, mu).unwrap();
        let hi = (k * k + 4.0 / (mu * mu)).sqrt();
        prop_assert!(slope >= k);
        prop_assert!(slope <= hi * (1.0 + 1e-12));
        let relaxed = enclosures::k_mu(k, mu * stretch).unwrap();
        prop_assert!(relaxed <= slope * (1.0 + 1e-12));
    }

    #[test]
    fn cubic_bound_brackets_and_residual(
        k in 0.0f64..10.0,
        delta_exp in -2.0f64..2.0,
        t_exp in -3.0f64..3.0,
    ) {
        let delta = 10f64.powf(delta_exp);
        let t = 10f64.powf(t_exp);
        let y = enclosures::h_iii(t, k, delta).unwrap();
        let slack = 1e-9 * y.max(1.0);
        prop_assert!(y >= k * t - slack);
        prop_assert!(y <= k * t + (1.0 / delta).min((2.0 * t / delta).sqrt()) + slack);
        let tight = (k * t + 1.0 / delta)
            .min(k * t / 2.0 + ((k * t / 2.0).powi(2) + 2.0 * t / delta).sqrt());
        prop_assert!(y <= tight + slack);
        let residual = (y * y + t * t) * (y - k * t) - (2.0 / delta) * t * y;
        let scale = y * y * y + k * t * y * y + (t * t + 2.0 * t / delta) * y + k * t * t * t;
        prop_assert!(residual.abs() <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn pole_bound_is_increasing_below_the_pole(
        k in 0.0f64..5.0,
        beta in 0.1f64..100.0,
        x1 in 1e-3f64..0.98,
        x2 in 1e-3f64..0.98,
    ) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let t1 = lo * beta / 2.0;
        let t2 = hi * beta / 2.0;
        let y1 = enclosures::h_i(t1, k, beta).unwrap().expect_finite();
        let y2 = enclosures::h_i(t2, k, beta).unwrap().expect_finite();
        prop_assert!(y1 <= y2 * (1.0 + 1e-12) + 1e-300);
        prop_assert!(enclosures::h_i(beta / 2.0, k, beta).unwrap() == Extended::Infinite);
    }

    #[test]
    fn strip_endpoints_have_fixed_sum_and_product(
        beta in 0.1f64..200.0,
        s in 1.000001f64..50.0,
    ) {
        let delta = 4.0 * s / beta;
        let (a, b) = enclosures::interval_i0(beta, delta).unwrap().unwrap();
        prop_assert!(0.0 < a && a < b && b < beta);
        prop_assert!(((a + b) - beta).abs() <= 1e-9 * beta);
        prop_assert!((a * b - beta / delta).abs() <= 1e-9 * (beta / delta));
    }

    #[test]
    fn strip_is_empty_below_threshold(
        beta in 0.1f64..200.0,
        s in 0.01f64..0.9999,
    ) {
        let delta = 4.0 * s / beta;
        prop_assert!(enclosures::interval_i0(beta, delta).unwrap().is_none());
    }

    #[test]
    fn narrow_strip_sits_inside_wide_strip(
        beta in 0.1f64..200.0,
        s in 1.000001f64..50.0,
        k in 0.0f64..5.0,
        mu in 0.05f64..20.0,
    ) {
        let delta = 4.0 * s / beta;
        let kmu = enclosures::k_mu(k, mu).unwrap();
        let (a, b) = enclosures::interval_i0(beta, delta).unwrap().unwrap();
        let (wa, wb) = enclosures::interval_i0mu(beta, delta, kmu).unwrap().unwrap();
        prop_assert!(wa <= a * (1.0 + 1e-12));
        prop_assert!(b <= wb * (1.0 + 1e-12));
    }
}

fn regions_for_slack_test() -> Vec<EnclosureRegion> {
    let pipe = constants::pipe_constants(25.0, 1.0, 14.0).unwrap();
    let damped = synthetic(0.2, 4.0, 2.1, 1.05);
    let hermitian = synthetic(0.0, 4.0, 1.9, 0.8);
    vec![
        enclosures::region_sectorial(&pipe).unwrap(),
        enclosures::region_sectorial(&damped).unwrap(),
        enclosures::region_nr_parabola(&damped).unwrap(),
        enclosures::region_selfadjoint(&hermitian).unwrap(),
        enclosures::region_accretive(&damped).unwrap(),
        enclosures::region_halfplane(&pipe),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn membership_is_monotone_in_tolerance(
        re in -150.0f64..10.0,
        im in -120.0f64..120.0,
        t1 in 0.0f64..5.0,
        dt in 0.0f64..5.0,
    ) {
        let lambda = c64(re, im);
        for region in regions_for_slack_test() {
            if region.contains_with_tol(lambda, t1) {
                prop_assert!(
                    region.contains_with_tol(lambda, t1 + dt),
                    "{} lost {lambda} when slack grew", region.kind().name()
                );
            }
        }
    }
}

#[test]
fn boundary_vertices_are_members_under_small_slack() {
    for region in regions_for_slack_test() {
        let polylines = enclosures::region_boundary(&region, 400, 160.0).unwrap();
        assert!(!polylines.is_empty(), "{} produced no boundary", region.kind().name());
        for polyline in &polylines {
            for z in polyline {
                assert!(
                    region.contains_with_tol(*z, 1e-6 * (1.0 + z.norm())),
                    "{} rejects its own boundary point {z}",
                    region.kind().name()
                );
            }
        }
    }
}

#[test]
fn random_qnr_roots_stay_inside_computed_sector() {
    let m = model::build_pipe(4, 25.0, 1.0, 14.0).unwrap();
    let computed = constants::compute_constants(&m).unwrap();
    let region = enclosures::region_sectorial(&computed).unwrap();
    let scale = m.to_energy().matrix().max_abs();
    let samples = ranges::sample_qnr(&m, SampleStrategy::Random, 2000, 7).unwrap();
    for sample in &samples {
        for root in sample.roots() {
            assert!(
                region.contains_with_tol(root, 1e-8 * scale),
                "root {root} escaped the sectorial region"
            );
        }
    }
}

#[test]
fn hermitian_damping_gives_conjugate_root_pairs() {
    let m = model::build_pipe(6, 25.0, 2.0, 0.0).unwrap();
    let samples = ranges::sample_qnr(&m, SampleStrategy::Random, 2000, 11).unwrap();
    for sample in &samples {
        let (l1, l2) = (sample.lambda1, sample.lambda2);
        let sum = l1 + l2;
        let product = l1 * l2;
        assert!(sum.im.abs() <= 1e-10 * (1.0 + sum.norm()), "root sum {sum} not real");
        assert!(
            product.im.abs() <= 1e-10 * (1.0 + product.norm()),
            "root product {product} not real"
        );
    }
}

#[test]
fn support_function_dominates_rayleigh_quotients() {
    let m = model::build_diag_example(4).unwrap();
    let energy = m.to_energy();
    let dim = energy.matrix().rows();
    let support = ranges::nr_support(&m, 64).unwrap();
    let mut rng = SplitMix64::new(29);
    for _ in 0..200 {
        let mut x: Vec<Complex64> = (0..dim)
            .map(|_| c64(rng.next_gaussian(), rng.next_gaussian()))
            .collect();
        let norm = linalg::norm2(&x);
        if norm < 1e-12 {
            continue;
        }
        for entry in &mut x {
            *entry /= norm;
        }
        let value = linalg::dot(&energy.matrix().matvec(&x), &x);
        for (theta, s) in support.angles().iter().zip(support.values()) {
            let projected = (c64(theta.cos(), -theta.sin()) * value).re;
            assert!(
                projected <= s + 1e-9,
                "rayleigh value {value} exceeds support at angle {theta}"
            );
        }
    }
}
