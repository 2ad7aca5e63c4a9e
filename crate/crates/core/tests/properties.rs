use std::f64::consts::PI;

use annihilator_core::hobby_rice::{
    moment_residual, select_phi_sharp, solve_hobby_rice, SignPattern, SphereCoordinates,
};
use annihilator_core::phase::{
    build_step_phase, mollify, phase_total_variation, step_integral_exp, window_phase,
    MollifiedJump,
};
use annihilator_core::sobolev::{blowup_instance, scaling_identity_check, upsilon_scale};
use annihilator_core::{
    Complex64, HobbyRiceOptions, IntervalMask, Mollifier, PiecewiseComplexFunction,
    QuadratureConfig, SmoothPhase, StepPhase,
};
use proptest::prelude::*;

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..=1.0f64, 0.0..(2.0 * PI)).prop_map(|(r, a)| Complex64::from_polar(r.sqrt(), a))
}

fn real_function(
    max_pieces: usize,
    max_degree: usize,
) -> impl Strategy<Value = PiecewiseComplexFunction> {
    (1..=max_pieces)
        .prop_flat_map(move |k| {
            (
                prop::collection::vec(0.05..0.95f64, k - 1),
                prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 1..=max_degree + 1), k),
            )
        })
        .prop_filter_map("distinct breakpoints", |(mut cuts, pieces)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            if cuts.windows(2).any(|w| w[1] - w[0] < 0.02) || cuts.len() + 1 != pieces.len() {
                return None;
            }
            let mut bp = vec![0.0];
            bp.extend(cuts);
            bp.push(1.0);
            let pieces = pieces
                .into_iter()
                .map(|p| p.into_iter().map(|c| Complex64::new(c, 0.0)).collect())
                .collect();
            PiecewiseComplexFunction::new(bp, pieces).ok()
        })
}

fn smooth_phase() -> impl Strategy<Value = SmoothPhase> {
    (
        -3.0..3.0f64,
        prop::collection::vec((0.0..1.0f64, 1e-4..0.2f64, -7.0..7.0f64), 0..6),
    )
        .prop_map(|(base, terms)| {
            let terms = terms
                .into_iter()
                .map(|(center, width, jump)| MollifiedJump {
                    center,
                    width,
                    jump,
                })
                .collect();
            SmoothPhase::new(base, terms, Mollifier::shared()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn step_phase_integrates_to_z(z in disk_point()) {
        let s = build_step_phase(z).unwrap();
        prop_assert!((step_integral_exp(&s) - z).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_phase_is_flat_and_monotone(z in disk_point(), h in 0.001..0.5f64) {
        let th = window_phase(z, h, Mollifier::shared()).unwrap();
        prop_assert_eq!(th.eval(-1.0), 0.0);
        prop_assert!((th.eval(1.0) - 2.0 * PI).abs() < 1e-13);
        prop_assert_eq!(th.eval_deriv(-1.0), 0.0);
        prop_assert_eq!(th.eval_deriv(1.0), 0.0);
        for i in 0..=500 {
            prop_assert!(th.eval_deriv(-1.0 + i as f64 / 250.0) >= 0.0);
        }
    }

    #[test]
    fn window_phase_is_continuous_in_z(z in disk_point(), dz in disk_point(), h in 0.01..0.5f64) {
        let z2 = z + dz * 1e-3;
        let z2 = if z2.norm() > 1.0 { z2 / z2.norm() } else { z2 };
        let m = Mollifier::shared();
        let k_h = 2.0 * PI * m.sup_norm() / h;
        let a = window_phase(z, h, m.clone()).unwrap();
        let b = window_phase(z2, h, m).unwrap();
        let sup = (0..=2000)
            .map(|i| -1.0 + i as f64 / 1000.0)
            .map(|t| (a.eval(t) - b.eval(t)).abs())
            .fold(0.0, f64::max);
        prop_assert!(sup <= k_h * (z - z2).norm() + 1e-12, "sup {} vs {}", sup, k_h * (z - z2).norm());
    }

    #[test]
    fn mollify_does_not_add_variation(
        jumps in prop::collection::vec((0.0..1.0f64, -4.0..4.0f64), 1..6),
        h in 0.005..0.3f64,
    ) {
        let s = StepPhase::from_values(0.0, jumps, (0.0, 1.0));
        let th = mollify(&s, h, Mollifier::shared()).unwrap();
        let cfg = QuadratureConfig::default();
        let tv = phase_total_variation(&th, -1.0, 2.0, &cfg).unwrap();
        prop_assert!(tv <= s.total_jump_variation() + 1e-9);
    }

    #[test]
    fn phase_derivative_matches_finite_differences(theta in smooth_phase(), t in 0.0..1.0f64) {
        let h = 1e-7;
        let fd = (theta.eval(t + h) - theta.eval(t - h)) / (2.0 * h);
        let d = theta.eval_deriv(t);
        let scale = theta.terms().iter().map(|m| m.jump.abs() / (m.width * m.width)).sum::<f64>();
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0) + 1e-6 * scale * h, "{} vs {}", fd, d);
    }

    #[test]
    fn unit_modulus_identity(theta in smooth_phase(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        // |(e^{iθ})'| = |θ'| pointwise, so the two integrals coincide.
        let cfg = QuadratureConfig::default();
        let cuts = theta.structural_points();
        let lhs = theta.deriv_power_integral(0.0, 1.0, p, &cfg).unwrap();
        let mut pts: Vec<f64> = cuts.into_iter().filter(|&c| c > 0.0 && c < 1.0).collect();
        pts.extend([0.0, 1.0]);
        pts.sort_by(f64::total_cmp);
        let mut rhs = 0.0;
        for w in pts.windows(2) {
            let (v, _) = annihilator_core::quadrature::integrate_real(
                |t| {
                    let h = 1e-6 * (w[1] - w[0]).max(1e-9);
                    let e = |s: f64| Complex64::from_polar(1.0, theta.eval(s));
                    ((e(t + h) - e(t - h)) / (2.0 * h)).norm().powf(p)
                },
                &[(w[0], w[1])],
                &QuadratureConfig { abs_tol: 1e-6, rel_tol: 1e-7, max_subdivisions: 50_000 },
            ).unwrap();
            rhs += v;
        }
        prop_assert!((lhs - rhs).abs() <= 1e-4 * lhs.max(1.0));
    }

    #[test]
    fn scaling_identity_holds(theta in smooth_phase(), n in 1u32..=8, p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let err = scaling_identity_check(&theta, n, p, &QuadratureConfig::default()).unwrap();
        prop_assert!(err <= 1e-6);
    }

    #[test]
    fn upsilon_integral_scales(f in real_function(4, 4), n in 1u32..=6) {
        let g = upsilon_scale(&f, n).unwrap();
        let lhs = g.integrate(0.0, 1.0).unwrap();
        let rhs = f.integrate(0.0, 1.0).unwrap() / 2f64.powi(n as i32);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn blowup_has_prescribed_norm(f in real_function(3, 3), l in 0.1..100.0f64, n in 1u32..=5) {
        let cfg = QuadratureConfig::default();
        let Ok(g) = blowup_instance(&f, l, n, &cfg) else { return Ok(()); };
        prop_assert!((g.l1_norm(&cfg).unwrap() - l).abs() <= 1e-8 * l);
    }

    #[test]
    fn hobby_rice_residual_and_switch_count(gs in prop::collection::vec(real_function(3, 4), 1..=4)) {
        let mask = IntervalMask::full();
        let s = solve_hobby_rice(&gs, &mask, &HobbyRiceOptions::default()).unwrap();
        prop_assert!(s.switch_points().len() <= gs.len());
        let r = moment_residual(&gs, &s, &mask);
        prop_assert!(r.iter().all(|v| v.abs() <= 1e-10), "{:?}", r);
    }

    #[test]
    fn sphere_chart_is_odd(x in prop::collection::vec(-1.0..1.0f64, 2..6), g in real_function(3, 3)) {
        let Ok(x) = SphereCoordinates::new(x) else { return Ok(()); };
        let neg = SphereCoordinates::new(x.coords().iter().map(|v| -v).collect()).unwrap();
        let mask = IntervalMask::full();
        let a = moment_residual(std::slice::from_ref(&g), &x.to_pattern(), &mask)[0];
        let b = moment_residual(std::slice::from_ref(&g), &neg.to_pattern(), &mask)[0];
        prop_assert!((a + b).abs() <= 1e-14 * (1.0 + a.abs()));
    }

    #[test]
    fn phi_sharp_hits_at_most_half(
        switches in prop::collection::vec(0.01..0.99f64, 0..5),
        lead in prop::bool::ANY,
        nodes in prop::collection::vec(0.1..0.9f64, 1..4),
    ) {
        let mut switches = switches;
        switches.sort_by(f64::total_cmp);
        switches.dedup();
        let s = SignPattern::new(switches, if lead { 1 } else { -1 }).unwrap();
        let delta = 0.01;
        let boundary: Vec<f64> = nodes.iter().flat_map(|&t| [t - delta, t + delta]).collect();
        let phi = select_phi_sharp(&s, &boundary);
        let hits = boundary
            .iter()
            .enumerate()
            .filter(|&(i, &b)| (if i % 2 == 0 { phi.value_left(b) } else { phi.value(b) }) != 0.0)
            .count();
        prop_assert!(hits <= nodes.len());
    }
}

/// Root of `∫_0^x g − ∫_x^1 g` by bisection.
fn bisection_switch(g: &PiecewiseComplexFunction) -> f64 {
    let r = |x: f64| g.integrate(0.0, x).unwrap().re - g.integrate(x, 1.0).unwrap().re;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn single_function_matches_bisection(tail in prop::collection::vec(-1.0..1.0f64, 0..4), extra in 0.1..1.0f64) {
        // Positive g makes the bisection function strictly increasing, so the root is unique.
        let c0 = tail.iter().map(|c| c.abs()).sum::<f64>() + extra;
        let mut coeffs = vec![c0];
        coeffs.extend(tail);
        let g = PiecewiseComplexFunction::real_polynomial(&coeffs).unwrap();
        let s = solve_hobby_rice(std::slice::from_ref(&g), &IntervalMask::full(), &HobbyRiceOptions::default()).unwrap();
        prop_assert_eq!(s.switch_points().len(), 1);
        prop_assert!((s.switch_points()[0] - bisection_switch(&g)).abs() <= 1e-10);
    }
}

#[test]
fn shifted_linear_matches_bisection() {
    let g = PiecewiseComplexFunction::real_polynomial(&[-1.0 / 3.0, 1.0]).unwrap();
    let s = solve_hobby_rice(
        std::slice::from_ref(&g),
        &IntervalMask::full(),
        &HobbyRiceOptions::default(),
    )
    .unwrap();
    let r = moment_residual(std::slice::from_ref(&g), &s, &IntervalMask::full());
    assert!(r[0].abs() <= 1e-10);
    if s.switch_points().len() == 1 {
        let x = s.switch_points()[0];
        let check = g.integrate(0.0, x).unwrap().re - g.integrate(x, 1.0).unwrap().re;
        assert!(check.abs() <= 1e-10);
    }
}
