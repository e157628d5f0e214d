use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};
use std::sync::Arc;

use flowline::families::polynomial::rational;
use flowline::families::{
    autonomous_F, goniometric_identity, harmonic_flow, lagrange_flow, lagrange_summation_identity,
    lagrange_summation_identity_exact, sincov_F, sincov_check, translation_check, ChladekProblem, ExactRestriction,
    FiniteSystem, HarmonicFamily, Point, RealSystem, SincovSample, SincovSystem,
    TranslationSample,
};
use flowline::{FlowMap, Interval, LocalChart, OdeFamily, OdeRhs, ParamBox, Restriction, TimeSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ode_flow(rhs: OdeRhs, lo: f64, hi: f64) -> FlowMap {
    let chart = LocalChart::new(0.0, Interval::new(lo, hi).unwrap(), ParamBox::unbounded(2), 1e-3).unwrap();
    FlowMap::new(Arc::new(OdeFamily::new(rhs, chart).unwrap()))
}

#[test]
fn lagrange_flow_examples() {
    let c = lagrange_flow(&Restriction::scalar(&[(0.0, 1.0), (1.0, 1.0)]).unwrap()).unwrap();
    assert_eq!(c.param(), &[1.0, 0.0]);
    let sq = lagrange_flow(&Restriction::scalar(&[(1.0, 1.0), (2.0, 4.0), (3.0, 9.0)]).unwrap()).unwrap();
    assert_eq!(sq.param(), &[0.0, 0.0, 1.0]);
    let line = lagrange_flow(&Restriction::scalar(&[(0.0, 3.0), (1.0, 5.0)]).unwrap()).unwrap();
    assert_eq!(line.param(), &[3.0, 2.0]);
}

#[test]
fn summation_identity_examples() {
    let a = Restriction::scalar(&[(0.2, 1.0), (0.9, -2.0), (1.7, 0.5)]).unwrap();
    assert_eq!(lagrange_summation_identity(&a, a.time_set(), 0.4).unwrap(), 0.0);

    let exact = ExactRestriction::new(vec![
        (rational(0, 1), vec![rational(0, 1)]),
        (rational(1, 1), vec![rational(1, 1)]),
        (rational(2, 1), vec![rational(4, 1)]),
    ])
    .unwrap();
    let beta = [rational(-1, 1), rational(1, 1), rational(3, 1)];
    let r = lagrange_summation_identity_exact(&exact, &beta, &rational(5, 1)).unwrap();
    assert_eq!(r, rational(0, 1));
}

#[test]
fn float_summation_at_eight_points_tracks_the_exact_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let times: Vec<f64> = (0..8).map(|i| -1.0 + (i as f64 + 0.2 + 0.6 * rng.gen::<f64>()) * 0.25).collect();
        let beta: Vec<f64> = (0..8).map(|i| -1.0 + (i as f64 + 0.2 + 0.6 * rng.gen::<f64>()) * 0.25).collect();
        let a = Restriction::scalar(&times.iter().map(|&t| (t, rng.gen_range(-1.0..1.0))).collect::<Vec<_>>()).unwrap();
        let t = rng.gen_range(-1.0..1.0);
        let float = lagrange_summation_identity(&a, &TimeSet::new(beta.clone()).unwrap(), t).unwrap();
        let exact = lagrange_summation_identity_exact(
            &ExactRestriction::from_restriction(&a),
            &beta.iter().map(|&b| flowline::families::polynomial::rational_from_f64(b)).collect::<Vec<_>>(),
            &flowline::families::polynomial::rational_from_f64(t),
        )
        .unwrap();
        assert_eq!(exact, rational(0, 1));
        assert!(float.abs() <= 1e-8 * a.value_scale().max(1.0), "{float}");
    }
}

#[test]
fn harmonic_flow_examples() {
    let w = harmonic_flow(&Restriction::scalar(&[(0.0, 1.0), (FRAC_PI_4, FRAC_PI_4.cos())]).unwrap()).unwrap();
    assert!((w[0] - 1.0).abs() < 1e-15 && w[1].abs() < 1e-15);
    let a = Restriction::scalar(&[(0.0, 0.0), (FRAC_PI_4, FRAC_PI_4.sin())]).unwrap();
    let w = harmonic_flow(&a).unwrap();
    assert!(w[0].abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    let x = FlowMap::new(HarmonicFamily::default().into_family()).apply(&a, FRAC_PI_6).unwrap();
    assert!((x[0] - 0.5).abs() < 1e-15);
    for t0 in [-1.2, 0.3, 1.5] {
        let w = harmonic_flow(&Restriction::scalar(&[(0.0, 0.0), (t0, 0.0)]).unwrap()).unwrap();
        assert_eq!(w.map(f64::abs), [0.0, 0.0]);
    }
}

#[test]
fn harmonic_interval_is_capped_at_pi() {
    assert!(HarmonicFamily::new(Interval::new(-2.0, 2.0).unwrap()).is_err());
    assert!(HarmonicFamily::new(Interval::real_line()).is_err());
    assert!(HarmonicFamily::new(Interval::new(0.0, PI).unwrap()).is_ok());
}

#[test]
fn goniometric_identity_examples() {
    let a = Restriction::scalar(&[(0.0, 1.0), (FRAC_PI_4, FRAC_PI_4.cos())]).unwrap();
    assert_eq!(goniometric_identity(&a, a.time_set(), 0.3).unwrap(), 0.0);
    let beta = TimeSet::new(vec![-FRAC_PI_6, FRAC_PI_3]).unwrap();
    assert!(goniometric_identity(&a, &beta, FRAC_PI_8).unwrap().abs() <= 1e-12);
}

#[test]
fn sine_quotient_matches_parametrization() {
    let fam = HarmonicFamily::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let (t1, t2) = (rng.gen_range(-1.5..-0.1), rng.gen_range(0.1..1.5));
        let t = rng.gen_range(-1.5..1.5);
        let g = |s: f64| w[0] * s.cos() + w[1] * s.sin();
        let q = flowline::families::sine_quotient([t1, t2], [g(t1), g(t2)], t);
        assert!((q - g(t)).abs() <= 1e-12);
        use flowline::Family;
        assert!((fam.evaluate(t, &w).unwrap()[0] - g(t)).abs() <= 1e-15);
    }
}

#[test]
fn sincov_examples() {
    let id = SincovSystem::Real(RealSystem::identity(2));
    let m = Point::Real(vec![0.5, -3.0]);
    assert_eq!(sincov_F(&id, 4.0, -1.0, &m).unwrap(), m);

    let shift = SincovSystem::Real(RealSystem::translation(vec![1.0]).unwrap());
    assert_eq!(sincov_F(&shift, 5.0, 2.0, &Point::Real(vec![10.0])).unwrap(), Point::Real(vec![13.0]));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let affine = SincovSystem::Real(RealSystem::affine(1).unwrap());
    for _ in 0..100 {
        let s = rng.gen_range(-3.0..3.0);
        let m = Point::Real(vec![rng.gen_range(-5.0..5.0)]);
        let Point::Real(back) = sincov_F(&affine, s, s, &m).unwrap() else { panic!() };
        let Point::Real(orig) = &m else { panic!() };
        assert!((back[0] - orig[0]).abs() < 1e-12);
        let Point::Real(again) = sincov_F(&shift, s, s, &m).unwrap() else { panic!() };
        assert!((again[0] - orig[0]).abs() < 1e-14);
    }
}

fn sincov_draws(rng: &mut ChaCha8Rng, count: usize) -> Vec<SincovSample> {
    (0..count)
        .map(|_| SincovSample {
            t: rng.gen_range(-256..=256) as f64 / 64.0,
            r: rng.gen_range(-256..=256) as f64 / 64.0,
            s: rng.gen_range(-256..=256) as f64 / 64.0,
            m: Point::Real(vec![rng.gen_range(-512..=512) as f64 / 64.0]),
        })
        .collect()
}

#[test]
fn sincov_check_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = sincov_draws(&mut rng, 300);
    let shift = SincovSystem::Real(RealSystem::translation(vec![1.0]).unwrap());
    let r = sincov_check(&shift, &draws, 0.0);
    assert!(r.passed, "{r:?}");

    let id = SincovSystem::Real(RealSystem::identity(1));
    assert!(sincov_check(&id, &draws, 0.0).passed);

    let times = vec![-2.0, -0.5, 0.0, 1.0, 1.7, 3.2];
    let cyc = SincovSystem::Finite(FiniteSystem::cyclic(3, times.clone()).unwrap());
    let draws: Vec<SincovSample> = (0..300)
        .map(|_| SincovSample {
            t: times[rng.gen_range(0..times.len())],
            r: times[rng.gen_range(0..times.len())],
            s: times[rng.gen_range(0..times.len())],
            m: Point::Label(rng.gen_range(0..3)),
        })
        .collect();
    let r = sincov_check(&cyc, &draws, 0.0);
    assert!(r.passed && r.max_residual_consistency == 0.0);
}

#[test]
fn sincov_check_catches_a_broken_system() {
    // G_t(m) = m + t^2 with a mismatched inverse
    let broken = SincovSystem::Real(
        RealSystem::new("broken", 1, |t, m| vec![m[0] + t * t], |t, m| vec![m[0] - t]).unwrap(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let r = sincov_check(&broken, &sincov_draws(&mut rng, 50), 1e-12);
    assert!(!r.passed);
}

#[test]
fn finite_systems_must_be_bijective() {
    assert!(FiniteSystem::tabulate(3, vec![0.0], |_, m| m / 2).is_err());
    assert!(FiniteSystem::cyclic(4, vec![0.0, 0.0]).is_err());
}

#[test]
fn translation_check_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<TranslationSample> = (0..500)
        .map(|_| TranslationSample {
            r: rng.gen_range(-256..=256) as f64 / 64.0,
            s: rng.gen_range(-256..=256) as f64 / 64.0,
            m: vec![rng.gen_range(-512..=512) as f64 / 64.0, rng.gen_range(-512..=512) as f64 / 64.0],
        })
        .collect();
    let shift = SincovSystem::Real(RealSystem::translation(vec![0.5, -2.0]).unwrap());
    let r = translation_check(&shift, &draws, 0.0).unwrap();
    assert!(r.passed);
    assert_eq!(r.max_residual_restriction, 0.0);
    assert_eq!(autonomous_F(&shift, 0.0, &[1.25, 3.0]).unwrap(), vec![1.25, 3.0]);

    let scalar: Vec<TranslationSample> = draws
        .iter()
        .map(|d| TranslationSample { r: d.r / 4.0, s: d.s / 4.0, m: vec![d.m[0] / 4.0] })
        .collect();
    let mult = SincovSystem::Real(RealSystem::multiplicative(1).unwrap());
    let r = translation_check(&mult, &scalar, 1e-12).unwrap();
    assert!(r.passed, "{r:?}");

    let affine = SincovSystem::Real(RealSystem::affine(1).unwrap());
    assert!(translation_check(&affine, &scalar, 1e-12).is_err());
}

#[test]
fn chladek_solve_examples() {
    let line = ChladekProblem::new(ode_flow(OdeRhs::free(2, 1).unwrap(), -2.0, 2.0), 0.0, 1.0, vec![0.0], vec![1.0]).unwrap();
    assert!((line.solve(0.5).unwrap()[0] - 0.5).abs() < 1e-10);

    let cos = ChladekProblem::new(ode_flow(OdeRhs::harmonic(1.0), -1.2, 1.2), 0.0, FRAC_PI_3, vec![1.0], vec![0.5]).unwrap();
    assert!((cos.solve(FRAC_PI_4).unwrap()[0] - FRAC_PI_4.cos()).abs() < 1e-8);
}

#[test]
fn chladek_boundary_and_reanchoring() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let line = ode_flow(OdeRhs::free(2, 1).unwrap(), -2.0, 2.0);
    let harmonic = ode_flow(OdeRhs::harmonic(1.0), -1.2, 1.2);
    for _ in 0..20 {
        let (alpha, beta) = (rng.gen_range(-1.0..-0.1), rng.gen_range(0.1..1.0));
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = ChladekProblem::new(harmonic.clone(), alpha, beta, vec![a], vec![b]).unwrap();
        assert!(p.boundary_residual().unwrap() <= 1e-9);
        assert!(p.consistency(alpha, beta, rng.gen_range(-1.0..1.0)).unwrap() <= 1e-9);
        let (g, d, tau) = (rng.gen_range(-1.0..-0.1), rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0));
        assert!(p.consistency(g, d, tau).unwrap() <= 1e-6);
        // closed-form oracle
        let det = (beta - alpha).sin();
        let c0 = (a * beta.sin() - b * alpha.sin()) / det;
        let c1 = (b * alpha.cos() - a * beta.cos()) / det;
        assert!((p.solve(tau).unwrap()[0] - (c0 * tau.cos() + c1 * tau.sin())).abs() <= 1e-6);

        let q = ChladekProblem::new(line.clone(), alpha, beta, vec![a], vec![b]).unwrap();
        assert!(q.consistency(g, d, tau).unwrap() <= 1e-12);
    }
}
