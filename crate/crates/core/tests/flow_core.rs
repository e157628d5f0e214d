use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use flowline::families::{Arithmetic, HarmonicFamily, PolynomialFamily};
use flowline::{
    intersection_count, omega, restrict, verify_flow_axioms, FlowMap, IntersectionCount, IntersectionVerdict,
    Restriction, TimeSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

#[test]
fn restrict_samples_the_worldline() {
    let square = omega(&PolynomialFamily::new(3, 1).unwrap().into_family(), &[0.0, 0.0, 1.0]).unwrap();
    let r = restrict(&square, &TimeSet::new(vec![0.0, 1.0]).unwrap()).unwrap();
    assert_eq!(r.values(), &[vec![0.0], vec![1.0]]);

    let cosine = omega(&HarmonicFamily::default().into_family(), &[1.0, 0.0]).unwrap();
    let r = restrict(&cosine, &TimeSet::new(vec![0.0]).unwrap()).unwrap();
    assert_eq!((r.times(), r.values()), (&[0.0][..], &[vec![1.0]][..]));

    let line = omega(&PolynomialFamily::new(2, 1).unwrap().into_family(), &[3.0, 2.0]).unwrap();
    let r = restrict(&line, &TimeSet::new(vec![5.0, 2.0]).unwrap()).unwrap();
    assert_eq!(r.times(), &[2.0, 5.0]);
    assert_eq!(r.values(), &[vec![7.0], vec![13.0]]);
}

#[test]
fn restrict_rejects_points_outside_the_interval() {
    let cosine = omega(&HarmonicFamily::default().into_family(), &[1.0, 0.0]).unwrap();
    assert!(restrict(&cosine, &TimeSet::new(vec![0.0, 2.0]).unwrap()).is_err());
}

#[test]
fn time_sets_reject_near_coincident_points() {
    assert!(TimeSet::new(vec![0.0, 1e-9]).is_err());
    assert!(TimeSet::new(vec![0.0, f64::NAN]).is_err());
    assert!(TimeSet::new(vec![]).is_err());
    assert!(TimeSet::with_separation(vec![0.0, 0.05], 0.1).is_err());
}

#[test]
fn polynomial_axioms_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let flow = FlowMap::new(PolynomialFamily::new(2, 1).unwrap().into_family());
    let mut restrictions = Vec::new();
    let mut betas = Vec::new();
    for _ in 0..100 {
        let t0 = rng.gen_range(-1.0..-0.1);
        let t1 = rng.gen_range(0.1..1.0);
        restrictions.push(Restriction::scalar(&[(t0, rng.gen_range(-1.0..1.0)), (t1, rng.gen_range(-1.0..1.0))]).unwrap());
        betas.push(TimeSet::new(vec![rng.gen_range(-1.0..-0.1), rng.gen_range(0.1..1.0)]).unwrap());
    }
    let ts: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let report = verify_flow_axioms(&flow, &restrictions, &betas[..3], &ts, 1e-10);
    assert!(report.passed, "{report:?}");
    assert_eq!(report.samples_tested, 100);
    assert!(report.max_residual_consistency <= 1e-10);
}

#[test]
fn harmonic_axioms_hold_to_rounding() {
    let flow = FlowMap::new(HarmonicFamily::default().into_family());
    let a = Restriction::scalar(&[(0.0, 1.0), (FRAC_PI_4, FRAC_PI_4.cos())]).unwrap();
    let betas: Vec<TimeSet> = [(-1.5, 1.5), (-0.3, 0.2), (0.9, 1.1)]
        .iter()
        .map(|&(x, y)| TimeSet::new(vec![x, y]).unwrap())
        .collect();
    let report = verify_flow_axioms(&flow, &[a], &betas, &grid(-1.5, 1.5, 31), 1e-9);
    assert!(report.passed);
    assert!(report.max_residual_consistency < 1e-14, "{}", report.max_residual_consistency);
}

#[test]
fn reanchoring_at_own_times_is_exact() {
    let flow = FlowMap::new(PolynomialFamily::new(3, 1).unwrap().into_family());
    // integer data keeps every floating step exact
    let a = Restriction::scalar(&[(-1.0, 3.0), (1.0, -1.0), (2.0, 6.0)]).unwrap();
    let report = verify_flow_axioms(&flow, &[a.clone()], &[a.time_set().clone()], &[0.5], 0.0);
    assert_eq!(report.max_residual_consistency, 0.0);
}

#[test]
fn inversion_failures_are_flagged_not_raised() {
    let flow = FlowMap::new(HarmonicFamily::default().into_family());
    // three samples for a two-point family
    let bad = Restriction::scalar(&[(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)]).unwrap();
    let good = Restriction::scalar(&[(0.0, 1.0), (0.5, 0.0)]).unwrap();
    let report = verify_flow_axioms(&flow, &[good, bad], &[], &[0.0], 1e-9);
    assert!(!report.passed);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].sample, 1);
}

#[test]
fn crossing_lines_meet_once() {
    let fam = PolynomialFamily::new(2, 1).unwrap().into_family();
    let (x1, x2) = (omega(&fam, &[0.0, 1.0]).unwrap(), omega(&fam, &[2.0, -1.0]).unwrap());
    let r = intersection_count(&x1, &x2, &grid(-5.0, 5.0, 1001)).unwrap();
    assert_eq!(r.count, IntersectionCount::Finite(1));
    assert_eq!(r.verdict, IntersectionVerdict::Consistent);
    assert!(!r.exact);

    let exact = PolynomialFamily::new(2, 1).unwrap().with_arithmetic(Arithmetic::Exact).into_family();
    let (y1, y2) = (omega(&exact, &[0.0, 1.0]).unwrap(), omega(&exact, &[2.0, -1.0]).unwrap());
    let r = intersection_count(&y1, &y2, &[]).unwrap();
    assert_eq!((r.count, r.exact), (IntersectionCount::Finite(1), true));
}

#[test]
fn equal_parameters_mean_equal_worldlines() {
    let fam = HarmonicFamily::default().into_family();
    let x = omega(&fam, &[0.3, 0.4]).unwrap();
    let r = intersection_count(&x, &x.clone(), &grid(-1.5, 1.5, 11)).unwrap();
    assert_eq!(r.count, IntersectionCount::All);
    assert_eq!(r.verdict, IntersectionVerdict::Equal);
}

#[test]
fn sine_and_cosine_meet_once_on_the_half_period() {
    let fam = HarmonicFamily::default().into_family();
    let (sin, cos) = (omega(&fam, &[0.0, 1.0]).unwrap(), omega(&fam, &[1.0, 0.0]).unwrap());
    let g = grid(-FRAC_PI_2 + 1e-6, FRAC_PI_2 - 1e-6, 2001);
    let r = intersection_count(&sin, &cos, &g).unwrap();
    assert_eq!(r.count, IntersectionCount::Finite(1));
}

#[test]
fn mixed_families_are_rejected() {
    let x1 = omega(&HarmonicFamily::default().into_family(), &[1.0, 0.0]).unwrap();
    let x2 = omega(&PolynomialFamily::new(2, 1).unwrap().into_family(), &[1.0, 0.0]).unwrap();
    assert!(intersection_count(&x1, &x2, &[0.0]).is_err());
}
