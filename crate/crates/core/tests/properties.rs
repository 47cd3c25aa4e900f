//! Property tests for the invariants of each module.

mod common;

use std::f64::consts::{PI, TAU};

use arnold_chain::crest::{alpha, build_crest, CrestKind};
use arnold_chain::flow::{integrate, FullState};
use arnold_chain::inner::{classify_resonance, torus_level_set, Region, Side, TorusKind};
use arnold_chain::melnikov::{amplitude, amplitude_prime, MelnikovSeries};
use arnold_chain::numerics::linspace;
use arnold_chain::pendulum::{pendulum_energy, separatrix};
use arnold_chain::system::{validate_spec, Harmonic, SystemSpec};
use arnold_chain::ReducedPoincare;
use common::{generated, perturbed_fixture};
use proptest::prelude::*;

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

fn random_spec() -> impl Strategy<Value = SystemSpec> {
    (
        prop::sample::select(vec![-1.0, 1.0]),
        0.05..0.5f64,
        prop::sample::select(vec![-1.0, 1.0]),
        0.1..0.8f64,
        -PI..PI,
        -PI..PI,
        -PI..PI,
        -0.2..0.2f64,
    )
        .prop_map(|(s10, a10, s01, a01, p10, p01, p11, a11)| {
            SystemSpec::new(
                vec![
                    Harmonic::new(0, 0, 1.0, 0.0),
                    Harmonic::new(1, 0, s10 * a10, p10),
                    Harmonic::new(0, 1, s01 * a01, p01),
                    Harmonic::new(1, 1, a11, p11),
                ],
                None,
                1e-3,
                2.0,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn separatrix_energy_and_symmetry(tau in -30.0..30.0f64) {
        let a = separatrix(tau);
        let b = separatrix(-tau);
        prop_assert!(pendulum_energy(a).abs() <= 1e-14);
        prop_assert!((a.q.cos() - 1.0 + 0.5 * a.p * a.p).abs() <= 1e-14);
        prop_assert!((a.p - b.p).abs() <= 1e-15 * a.p.max(1e-300));
        prop_assert!((a.q + b.q - TAU).abs() <= 1e-14);
    }

    #[test]
    fn normalization_is_a_translation(spec in random_spec(), phi in 0.0..TAU, t in 0.0..TAU) {
        let n = spec.normalized();
        prop_assert!(n.is_normalized());
        let lhs = n.g(phi, t);
        let rhs = spec.g(phi + n.shift.dphi, t + n.shift.dt);
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn normalization_is_idempotent(spec in random_spec()) {
        let n = spec.normalized();
        let nn = n.normalized();
        for (a, b) in n.harmonics().iter().zip(nn.harmonics()) {
            prop_assert_eq!((a.k, a.l), (b.k, b.l));
            prop_assert_eq!(a.a, b.a);
            prop_assert!((a.sigma - b.sigma).abs() <= 1e-14);
        }
    }

    #[test]
    fn validation_is_deterministic(spec in random_spec()) {
        let a = validate_spec(&spec);
        let b = validate_spec(&spec);
        prop_assert_eq!(&a, &b);
        let n = spec.normalized();
        prop_assert_eq!(validate_spec(&n), validate_spec(&n.normalized()));
    }

    #[test]
    fn melnikov_is_periodic(i in -0.5..2.0f64, phi in 0.0..TAU, s in 0.0..TAU) {
        let ms = MelnikovSeries::new(&generated(0.05, 0.05));
        let v = ms.potential(i, phi, s);
        prop_assert!((ms.potential(i, phi + TAU, s) - v).abs() <= 1e-12);
        prop_assert!((ms.potential(i, phi, s - TAU) - v).abs() <= 1e-12);
    }

    #[test]
    fn melnikov_gradient_matches_differences(i in -0.5..2.0f64, phi in 0.0..TAU, s in 0.0..TAU) {
        let ms = MelnikovSeries::new(&generated(0.05, 0.05));
        let h = 1e-6;
        let (li, lp, ls) = ms.gradient(i, phi, s);
        let fi = (ms.potential(i + h, phi, s) - ms.potential(i - h, phi, s)) / (2.0 * h);
        let fp = (ms.potential(i, phi + h, s) - ms.potential(i, phi - h, s)) / (2.0 * h);
        let fs = (ms.potential(i, phi, s + h) - ms.potential(i, phi, s - h)) / (2.0 * h);
        prop_assert!((li - fi).abs() <= 1e-8, "L_I {} vs {}", li, fi);
        prop_assert!((lp - fp).abs() <= 1e-8);
        prop_assert!((ls - fs).abs() <= 1e-8);
    }

    #[test]
    fn along_line_is_a_restriction(i in -0.5..2.0f64, phi in 0.0..TAU, s in 0.0..TAU, tau in -5.0..5.0f64) {
        let ms = MelnikovSeries::new(&SystemSpec::figure2());
        let a = ms.along_line(i, phi, s, tau);
        let b = ms.potential(i, phi - i * tau, s - tau);
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn coefficient_is_continuous_across_resonance(k in 1u32..6, l in 0u32..6, d in 1e-12..1e-5f64) {
        let c = l as f64 / k as f64;
        let a0 = amplitude(k, l, c, 1.0);
        prop_assert!((amplitude(k, l, c + d, 1.0) - a0).abs() <= 2.0 * d * k as f64);
        prop_assert!((amplitude(k, l, c - d, 1.0) - a0).abs() <= 2.0 * d * k as f64);
        let p0 = amplitude_prime(k, l, c, 1.0);
        prop_assert!((amplitude_prime(k, l, c + d, 1.0) - p0).abs() <= 10.0 * d * (k * k) as f64);
    }

    #[test]
    fn validated_specs_have_alpha_below_one(rho in 0.01..0.1f64, r in 0.02..0.1f64) {
        let spec = generated(rho, r);
        prop_assume!(validate_spec(&spec).passed);
        for i in linspace(spec.i_minus_star, spec.i_plus_star, 401) {
            prop_assert!(alpha(i, &spec).unwrap().abs() < 1.0);
        }
    }

    #[test]
    fn gap_scales_with_root_epsilon(eps in 1e-6..1e-2f64, a in 0.01..1.0f64) {
        let spec = SystemSpec::new(
            vec![Harmonic::new(1, 0, a, 0.0), Harmonic::new(0, 1, 0.5, 0.0)], None, eps, 2.0,
        ).unwrap();
        let w1 = classify_resonance(1, 0, eps, &spec).unwrap().gap_halfwidth;
        let w4 = classify_resonance(1, 0, 4.0 * eps, &spec).unwrap().gap_halfwidth;
        prop_assert!((w4 / w1 - 2.0).abs() <= 1e-12);
        prop_assert!((w1 - 2.0 * (eps * a).sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn flat_tori_are_horizontal(level in -0.5..2.0f64, theta in 0.0..TAU) {
        let ts = torus_level_set(level, &Region::Flat, Side::Upper).unwrap();
        prop_assert_eq!(ts.kind, TorusKind::Flat);
        prop_assert_eq!(ts.graph(theta, Side::Upper), level);
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn crest_residual_vanishes(i in -0.5..2.0f64) {
        let spec = generated(0.05, 0.05);
        let ms = MelnikovSeries::new(&spec);
        for kind in [CrestKind::Max, CrestKind::Min] {
            let c = build_crest(i, kind, &ms, &spec).unwrap();
            prop_assert!(c.max_residual <= 1e-10);
            for phi in linspace(0.0, TAU, 37) {
                let s = c.refine(phi).unwrap();
                prop_assert!(c.residual(phi, s).abs() <= 1e-10);
                // the Hermite table agrees with the refined crest
                prop_assert!((c.eval(phi) - s).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn potential_is_monotone_along_the_crest(i in -0.5..2.0f64) {
        let spec = SystemSpec::figure2();
        let ms = MelnikovSeries::new(&spec);
        let c = build_crest(i, CrestKind::Max, &ms, &spec).unwrap();
        let vals: Vec<f64> = linspace(0.0, PI, 200).into_iter().map(|p| ms.potential(i, p, c.eval(p))).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn tau_star_is_deterministic_and_on_the_crest(i in -0.5..2.0f64, phi in 0.0..TAU, u in 1e-3..(TAU - 1e-3)) {
        let rp = ReducedPoincare::new(&SystemSpec::figure2());
        let s = rp.crests(i).unwrap().min.eval(phi) - u;
        let a = rp.tau_star(i, phi, s).unwrap();
        let b = rp.tau_star(i, phi, s).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.crossings, 1);
        prop_assert!(a.residual <= 1e-10);
        prop_assert!(a.curvature < 0.0);
    }

    #[test]
    fn reduced_function_periodic_with_exact_partials(i in -0.4..1.5f64, theta in 0.0..TAU) {
        let rp = ReducedPoincare::new(&generated(0.05, 0.05));
        let v = rp.evaluate(i, theta).unwrap();
        prop_assert!((rp.value(i, theta + TAU).unwrap() - v.value).abs() <= 1e-12);
        let h = 1e-6;
        let ft = (rp.value(i, theta + h).unwrap() - rp.value(i, theta - h).unwrap()) / (2.0 * h);
        let fi = (rp.value(i + h, theta).unwrap() - rp.value(i - h, theta).unwrap()) / (2.0 * h);
        prop_assert!((v.d_theta - ft).abs() <= 1e-7, "{} vs {}", v.d_theta, ft);
        prop_assert!((v.d_action - fi).abs() <= 1e-7, "{} vs {}", v.d_action, fi);
    }

    #[test]
    fn scattering_map_keeps_time(i in -0.4..1.5f64, phi in 0.0..TAU, u in 1e-3..(TAU - 1e-3), eps in 1e-4..1e-2f64) {
        let rp = ReducedPoincare::new(&SystemSpec::figure2());
        let s = rp.crests(i).unwrap().min.eval(phi) - u;
        let (i2, phi2, s2) = rp.scattering_map(i, phi, s, eps).unwrap();
        prop_assert_eq!(s2, s);
        let (j2, t2) = rp.reduced_map(i, phi - i * s, eps).unwrap();
        prop_assert!((i2 - j2).abs() <= 1e-15);
        prop_assert!((phi2 - i2 * s - t2).abs() <= 1e-12);
    }

    #[test]
    fn secondary_domain_shrinks_with_energy(f1 in 0.05..0.95f64, f2 in 0.05..0.95f64) {
        let spec = SystemSpec::figure2();
        let r = classify_resonance(1, 0, 1e-3, &spec).unwrap();
        let region = Region::Resonance(r);
        let e_min = r.min_level();
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        let a = torus_level_set(e_min * (1.0 - lo), &region, Side::Upper).unwrap();
        let b = torus_level_set(e_min * (1.0 - hi), &region, Side::Upper).unwrap();
        prop_assert_eq!(a.kind, TorusKind::Secondary);
        // a is the deeper level, so its eye is narrower
        prop_assert!(a.domain.1 - a.domain.0 <= b.domain.1 - b.domain.0 + 1e-12);
    }

    #[test]
    fn energy_changes_only_through_explicit_time(phi in 0.0..TAU, i in -0.5..1.5f64, tau0 in -4.0..0.0f64) {
        let spec = SystemSpec::figure2();
        let eps = 1e-2;
        let sep = separatrix(tau0);
        let st = FullState { p: sep.p, q: sep.q, action: i, phi, t: 0.0 };
        let h = 1e-3;
        let times: Vec<f64> = [1.0, 2.0, 3.0].iter().flat_map(|&t| [t - h, t, t + h]).collect();
        let tr = integrate(st, 4.0, eps, &spec, 1e-12, &times).unwrap();
        for w in tr.samples.chunks(3) {
            let dh = (w[2].energy(eps, &spec) - w[0].energy(eps, &spec)) / (2.0 * h);
            let m = &w[1];
            let expected = eps * m.q.cos() * spec.g_t(m.phi, m.t);
            prop_assert!((dh - expected).abs() <= 1e-7, "{} vs {}", dh, expected);
        }
    }
}

#[test]
fn first_order_dominance() {
    // |L − L^{≤1}| ≤ C (ρ² + r² + ρr); the fitted ratio is 2.79 at ρ = 0.05
    const C: f64 = 3.0;
    for rho in [0.05, 0.02, 0.01] {
        let spec = generated(rho, rho);
        let full = MelnikovSeries::new(&spec);
        let first = MelnikovSeries::first_order(&spec);
        let mut worst: f64 = 0.0;
        for i in linspace(-0.5, 2.0, 11) {
            for phi in linspace(0.0, TAU, 12) {
                for s in linspace(0.0, TAU, 12) {
                    worst = worst.max((full.potential(i, phi, s) - first.potential(i, phi, s)).abs());
                }
            }
        }
        let bound = C * 3.0 * rho * rho;
        assert!(worst <= bound, "ρ = {rho}: {worst:e} > {bound:e}");
    }
}

#[test]
fn crest_is_close_to_first_order() {
    // |ξ_M − ξ_M^{(1)}| ≤ C (ρ² + r² + ρr); the fitted ratio is 1.23
    const C: f64 = 1.5;
    for rho in [0.02, 0.01, 0.005] {
        let spec = perturbed_fixture(rho, rho);
        let full = MelnikovSeries::new(&spec);
        let first = MelnikovSeries::first_order(&spec);
        let mut worst: f64 = 0.0;
        for i in [-0.4, 0.0, 0.5, 1.0, 1.5] {
            let a = build_crest(i, CrestKind::Max, &full, &spec).unwrap();
            let b = build_crest(i, CrestKind::Max, &first, &spec).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                worst = worst.max((x - y).abs());
            }
        }
        let bound = C * 3.0 * rho * rho;
        assert!(worst <= bound, "ρ = {rho}: {worst:e} > {bound:e}");
    }
}

#[test]
fn integrator_error_tracks_tolerance() {
    // the unperturbed separatrix is an exact solution
    let spec = SystemSpec::figure2();
    let s0 = separatrix(-2.0);
    let st = FullState { p: s0.p, q: s0.q, action: 0.3, phi: 0.0, t: 0.0 };
    let mut prev = f64::INFINITY;
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let tr = integrate(st, 4.0, 0.0, &spec, tol, &[]).unwrap();
        let exact = separatrix(2.0);
        let err = (tr.end.p - exact.p).abs().max((tr.end.q - exact.q).abs());
        assert!(err <= 100.0 * tol, "tol {tol:e}: err {err:e}");
        assert!(err < prev);
        prev = err;
    }
}
