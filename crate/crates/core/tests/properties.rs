use std::sync::Arc;

use approx::assert_abs_diff_eq;
use flowline::families::polynomial::{count_real_roots, rational, Polynomial};
use flowline::families::{ChladekProblem, HarmonicFamily, PolynomialFamily};
use flowline::{
    invert_omega_beta, k_closed, k_recursive, lemma_jacobian, omega, omega_beta, restrict, AxiomReport, Family,
    FlowMap, InversionMethod, JacobianOptions, NewtonSettings, RecursionOptions, TimeSet,
};
use num::BigRational;
use proptest::prelude::*;

/// Strictly increasing times in (lo, hi) with gaps of at least a fifth of a bin.
fn times(k: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.2..0.8f64, k).prop_map(move |u| {
        let width = (hi - lo) / k as f64;
        u.iter().enumerate().map(|(i, x)| lo + (i as f64 + x) * width).collect()
    })
}

fn params(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, len)
}

fn polynomial(k: usize) -> Arc<dyn Family> {
    PolynomialFamily::new(k, 1).unwrap().into_family()
}

fn harmonic() -> Arc<dyn Family> {
    HarmonicFamily::default().into_family()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn polynomial_round_trip(k in 1usize..7, seed in params(6), beta in times(6, -1.0, 1.0)) {
        let fam = polynomial(k);
        let w = &seed[..k];
        let beta = TimeSet::new(beta[..k].to_vec()).unwrap();
        let a = omega_beta(&fam, w, &beta).unwrap();
        let inv = invert_omega_beta(fam.as_ref(), &a, None, &NewtonSettings::default(), InversionMethod::Auto).unwrap();
        for (got, want) in inv.param.iter().zip(w) {
            prop_assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn harmonic_round_trip(w in params(2), beta in times(2, -1.5, 1.5)) {
        let fam = harmonic();
        let a = omega_beta(&fam, &w, &TimeSet::new(beta).unwrap()).unwrap();
        let inv = invert_omega_beta(fam.as_ref(), &a, None, &NewtonSettings::default(), InversionMethod::Auto).unwrap();
        assert_abs_diff_eq!(inv.param.as_slice(), w.as_slice(), epsilon = 1e-12);
    }

    #[test]
    fn analytic_and_newton_inversions_agree(k in 2usize..5, w in params(4), beta in times(4, -1.0, 1.0)) {
        let fam = polynomial(k);
        let a = omega_beta(&fam, &w[..k], &TimeSet::new(beta[..k].to_vec()).unwrap()).unwrap();
        let settings = NewtonSettings::default();
        let closed = invert_omega_beta(fam.as_ref(), &a, None, &settings, InversionMethod::Auto).unwrap();
        let newton = invert_omega_beta(fam.as_ref(), &a, None, &settings, InversionMethod::Newton).unwrap();
        prop_assert!(closed.analytic && !newton.analytic);
        for (x, y) in closed.param.iter().zip(&newton.param) {
            prop_assert!((x - y).abs() <= 1e-7);
        }
    }

    #[test]
    fn reanchoring_reproduces_the_worldline(w in params(2), first in times(2, -1.5, 1.5), second in times(2, -1.5, 1.5), t in -1.5..1.5f64) {
        let fam = harmonic();
        let flow = FlowMap::new(fam.clone());
        let a = omega_beta(&fam, &w, &TimeSet::new(first).unwrap()).unwrap();
        let x = flow.flow(&a).unwrap().worldline;
        let b = restrict(&x, &TimeSet::new(second).unwrap()).unwrap();
        let y = flow.flow(&b).unwrap().worldline;
        prop_assert!((x.eval(t).unwrap()[0] - y.eval(t).unwrap()[0]).abs() <= 1e-10 * (1.0 + x.eval(t).unwrap()[0].abs()));
        prop_assert!((omega(&fam, &w).unwrap().eval(t).unwrap()[0] - x.eval(t).unwrap()[0]).abs() <= 1e-10);
    }

    #[test]
    fn k_closed_is_symmetric(k in 2usize..6, w in params(5), nodes in times(5, -1.0, 1.0), shift in 1usize..5) {
        let fam = polynomial(k);
        let nodes = &nodes[..k];
        let mut rotated = nodes.to_vec();
        rotated.rotate_left(shift % k);
        rotated.swap(0, k - 1);
        let x = k_closed(fam.as_ref(), nodes, &w[..k]).unwrap()[0];
        let y = k_closed(fam.as_ref(), &rotated, &w[..k]).unwrap()[0];
        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn k_closed_matches_k_recursive(k in 2usize..6, w in params(5), nodes in times(5, -1.0, 1.0), use_harmonic in any::<bool>()) {
        let (fam, w, nodes) = if use_harmonic {
            (harmonic(), &w[..2], &nodes[..2])
        } else {
            (polynomial(k), &w[..k], &nodes[..k])
        };
        let closed = k_closed(fam.as_ref(), nodes, w).unwrap()[0];
        let rec = k_recursive(fam.as_ref(), nodes, w, &RecursionOptions::default()).unwrap()[0];
        prop_assert!((closed - rec).abs() <= 1e-8, "{} vs {}", closed, rec);
    }

    #[test]
    fn certified_anchor_inverts_nearby(w in params(2), t0 in -1.0..1.0f64, gap in 0.05..0.3f64, offset in -0.1..0.1f64) {
        let fam = harmonic();
        let j = lemma_jacobian(fam.as_ref(), t0, &w, &JacobianOptions::default()).unwrap();
        prop_assume!(j.certified);
        let beta = TimeSet::new(vec![t0 + offset, t0 + offset + gap]).unwrap();
        let a = omega_beta(&fam, &w, &beta).unwrap();
        let inv = invert_omega_beta(fam.as_ref(), &a, None, &NewtonSettings::default(), InversionMethod::Newton).unwrap();
        assert_abs_diff_eq!(inv.param.as_slice(), w.as_slice(), epsilon = 1e-7);
    }

    #[test]
    fn distinct_exact_polynomials_meet_fewer_than_k_times(
        k in 1usize..9,
        p in proptest::collection::vec(-50i64..50, 8),
        q in proptest::collection::vec(-50i64..50, 8),
    ) {
        prop_assume!(p[..k] != q[..k]);
        let lift = |c: &[i64]| Polynomial::new(c[..k].iter().map(|&x| rational(x, 7)).collect::<Vec<BigRational>>());
        let diff = lift(&p).sub(&lift(&q));
        prop_assert!(!diff.is_zero());
        prop_assert!(diff.degree().unwrap() < k);
        prop_assert!(count_real_roots(&diff).unwrap() < k);
    }

    #[test]
    fn chladek_swap_is_symmetric(alpha in -1.4..-0.1f64, beta in 0.1..1.4f64, a in -2.0..2.0f64, b in -2.0..2.0f64, tau in -1.5..1.5f64) {
        let flow = FlowMap::new(harmonic());
        let p = ChladekProblem::new(flow, alpha, beta, vec![a], vec![b]).unwrap();
        let q = p.swapped().unwrap();
        prop_assert!((p.solve(tau).unwrap()[0] - q.solve(tau).unwrap()[0]).abs() <= 1e-12);
    }

    #[test]
    fn axiom_verdict_follows_residuals(c in 0.0..2.0f64, r in 0.0..2.0f64, tol in 0.0..2.0f64) {
        let mut report = AxiomReport::new(tol);
        report.record_consistency(c);
        report.record_restriction(r);
        let report = report.finish();
        prop_assert_eq!(report.passed, c <= tol && r <= tol);
    }

    #[test]
    fn time_sets_are_sorted(points in proptest::collection::vec(-10.0..10.0f64, 1..8)) {
        if let Ok(set) = TimeSet::new(points.clone()) {
            prop_assert_eq!(set.k(), points.len());
            prop_assert!(set.points().windows(2).all(|p| p[1] - p[0] >= 1e-8));
        }
    }
}

#[test]
fn confluent_limit_converges_at_first_order() {
    let fam = harmonic();
    let w = [0.7, -1.3];
    let t: f64 = 0.4;
    let exact = -w[0] * t.sin() + w[1] * t.cos();
    let errors: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|eps| (k_recursive(fam.as_ref(), &[t, t + eps], &w, &RecursionOptions::default()).unwrap()[0] - exact).abs())
        .collect();
    for pair in errors.windows(2) {
        let slope = (pair[0] / pair[1]).log10();
        assert!((slope - 1.0).abs() < 0.1, "{errors:?}");
    }
}
