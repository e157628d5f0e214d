//! Flows without intersection (`k = 1`).
//!
//! Every system `{G_t}` of bijections of `M` gives `F(t, s, m) = G_t(G_s^{-1}(m))`,
//! which satisfies the Sincov composition law `F(t, r, F(r, s, m)) = F(t, s, m)`
//! with `F(s, s, m) = m`. Autonomous systems are described instead by
//! `F(r, m)` with `F(r, F(s, m)) = F(r + s, m)` and `F(0, m) = m`; they are
//! tied to the nonautonomous form through `G_t = F(-t, .)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{FlowError, Result};
use crate::flow::AxiomReport;

type PointMap = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// A point of `M`: a real vector or a label of a finite set.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Real(Vec<f64>),
    Label(usize),
}

/// Bijections of `R^n` indexed by time.
#[derive(Clone)]
pub struct RealSystem {
    name: String,
    dim: usize,
    forward: PointMap,
    inverse: PointMap,
    autonomous: Option<PointMap>,
}

impl fmt::Debug for RealSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("autonomous", &self.autonomous.is_some())
            .finish()
    }
}

impl RealSystem {
    /// A nonautonomous system from `G_t` and `G_t^{-1}`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        forward: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        inverse: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(FlowError::validation("state dimension must be positive"));
        }
        Ok(RealSystem {
            name: name.into(),
            dim,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            autonomous: None,
        })
    }

    /// An autonomous system from its one-parameter group `F(r, m)`.
    pub fn autonomous(
        name: impl Into<String>,
        dim: usize,
        group: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(FlowError::validation("state dimension must be positive"));
        }
        let group: PointMap = Arc::new(group);
        let (fwd, inv) = (Arc::clone(&group), Arc::clone(&group));
        Ok(RealSystem {
            name: name.into(),
            dim,
            forward: Arc::new(move |t, m| fwd(-t, m)),
            inverse: Arc::new(move |t, m| inv(t, m)),
            autonomous: Some(group),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::autonomous("identity", dim, |_, m| m.to_vec()).expect("positive dimension")
    }

    /// `G_t(m) = m + t v`.
    pub fn translation(drift: Vec<f64>) -> Result<Self> {
        let dim = drift.len();
        Self::autonomous("translation", dim, move |r, m| {
            m.iter().zip(&drift).map(|(x, v)| x - r * v).collect()
        })
    }

    /// `F(r, m) = m e^r`.
    pub fn multiplicative(dim: usize) -> Result<Self> {
        Self::autonomous("multiplicative", dim, |r, m| {
            let scale = r.exp();
            m.iter().map(|x| x * scale).collect()
        })
    }

    /// `G_t(m) = e^t m + sin t`, a smooth nonautonomous system.
    pub fn affine(dim: usize) -> Result<Self> {
        Self::new(
            "affine",
            dim,
            |t, m| m.iter().map(|x| t.exp() * x + t.sin()).collect(),
            |t, m| m.iter().map(|x| (x - t.sin()) * (-t).exp()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous.is_some()
    }
}

/// Permutations of `{0, .., size - 1}` tabulated on a discrete time set.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    times: Vec<f64>,
    forward: Vec<Vec<usize>>,
    inverse: Vec<Vec<usize>>,
}

impl FiniteSystem {
    /// Tabulates `g(t, m)` for every sample time and checks each `G_t`
    /// is a permutation.
    pub fn tabulate(
        size: usize,
        times: Vec<f64>,
        g: impl Fn(f64, usize) -> usize,
    ) -> Result<Self> {
        if size == 0 || times.is_empty() {
            return Err(FlowError::validation("finite system needs points and times"));
        }
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(FlowError::validation("sample times must be distinct"));
        }
        let mut forward = Vec::with_capacity(times.len());
        let mut inverse = Vec::with_capacity(times.len());
        for &t in &times {
            let table: Vec<usize> = (0..size).map(|m| g(t, m)).collect();
            let mut inv = vec![usize::MAX; size];
            for (m, &image) in table.iter().enumerate() {
                if image >= size || inv[image] != usize::MAX {
                    return Err(FlowError::validation(format!(
                        "G_t at t = {t} is not a bijection"
                    )));
                }
                inv[image] = m;
            }
            forward.push(table);
            inverse.push(inv);
        }
        Ok(FiniteSystem {
            times,
            forward,
            inverse,
        })
    }

    /// `G_t(m) = (m + floor(t)) mod size`.
    pub fn cyclic(size: usize, times: Vec<f64>) -> Result<Self> {
        Self::tabulate(size, times, |t, m| {
            (m as i64 + t.floor() as i64).rem_euclid(size as i64) as usize
        })
    }

    pub fn size(&self) -> usize {
        self.forward[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn slot(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| s == t)
            .ok_or_else(|| FlowError::validation(format!("time {t} is not a tabulated time")))
    }
}

/// A system `{G_t}` of bijections of `M`.
#[derive(Debug, Clone)]
pub enum SincovSystem {
    Real(RealSystem),
    Finite(FiniteSystem),
}

impl SincovSystem {
    pub fn name(&self) -> String {
        match self {
            SincovSystem::Real(sys) => format!("{}(n={})", sys.name, sys.dim),
            SincovSystem::Finite(sys) => format!("finite(size={})", sys.size()),
        }
    }

    /// Checks `G_t` is a bijection: exhaustively on finite sets (already done
    /// when tabulating), by `G_t^{-1}(G_t(m)) = m` on the given samples otherwise.
    pub fn bijection_residual(&self, samples: &[(f64, Point)]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (t, m) in samples {
            self.check_point(m)?;
            if let (SincovSystem::Real(sys), Point::Real(x)) = (self, m) {
                let back = (sys.inverse)(*t, &(sys.forward)(*t, x));
                worst = worst.max(distance(&back, x));
            }
        }
        Ok(worst)
    }

    fn check_point<'a>(&self, m: &'a Point) -> Result<&'a Point> {
        match (self, m) {
            (SincovSystem::Real(sys), Point::Real(x)) if x.len() == sys.dim => Ok(m),
            (SincovSystem::Finite(sys), Point::Label(l)) if *l < sys.size() => Ok(m),
            _ => Err(FlowError::validation(format!(
                "point {m:?} is not in the state set of {}",
                self.name()
            ))),
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn point_distance(a: &Point, b: &Point) -> f64 {
    match (a, b) {
        (Point::Real(x), Point::Real(y)) => distance(x, y),
        (Point::Label(x), Point::Label(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        _ => f64::INFINITY,
    }
}

/// `F(t, s, m) = G_t(G_s^{-1}(m))`: where the worldline through `(s, m)` is at time `t`.
#[allow(non_snake_case)]
pub fn sincov_F(system: &SincovSystem, t: f64, s: f64, m: &Point) -> Result<Point> {
    system.check_point(m)?;
    match (system, m) {
        (SincovSystem::Real(sys), Point::Real(x)) => {
            Ok(Point::Real((sys.forward)(t, &(sys.inverse)(s, x))))
        }
        (SincovSystem::Finite(sys), Point::Label(l)) => {
            let pre = sys.inverse[sys.slot(s)?][*l];
            Ok(Point::Label(sys.forward[sys.slot(t)?][pre]))
        }
        _ => unreachable!("checked above"),
    }
}

/// One draw for the Sincov law.
#[derive(Debug, Clone, PartialEq)]
pub struct SincovSample {
    pub t: f64,
    pub r: f64,
    pub s: f64,
    pub m: Point,
}

/// Worst residuals of `F(t, r, F(r, s, m)) = F(t, s, m)` (consistency) and
/// `F(s, s, m) = m` (restriction). Distances between labels are 0 or 1.
pub fn sincov_check(system: &SincovSystem, samples: &[SincovSample], tolerance: f64) -> AxiomReport {
    let mut report = AxiomReport::new(tolerance);
    for (index, sample) in samples.iter().enumerate() {
        report.samples_tested += 1;
        let outcome = (|| -> Result<(f64, f64)> {
            let SincovSample { t, r, s, m } = sample;
            let inner = sincov_F(system, *r, *s, m)?;
            let lhs = sincov_F(system, *t, *r, &inner)?;
            let rhs = sincov_F(system, *t, *s, m)?;
            let fixed = sincov_F(system, *s, *s, m)?;
            Ok((point_distance(&lhs, &rhs), point_distance(&fixed, m)))
        })();
        match outcome {
            Ok((consistency, restriction)) => {
                report.record_consistency(consistency);
                report.record_restriction(restriction);
            }
            Err(err) => report.record_failure(index, err.to_string()),
        }
    }
    report.finish()
}

/// One draw for the translation equations.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSample {
    pub r: f64,
    pub s: f64,
    pub m: Vec<f64>,
}

/// Worst residuals of `F(r, F(s, m)) = F(r + s, m)` (consistency) and
/// `F(0, m) = m` (restriction) for an autonomous system.
pub fn translation_check(
    system: &SincovSystem,
    samples: &[TranslationSample],
    tolerance: f64,
) -> Result<AxiomReport> {
    let group = match system {
        SincovSystem::Real(RealSystem {
            autonomous: Some(group),
            dim,
            ..
        }) => (group, *dim),
        _ => {
            return Err(FlowError::validation(format!(
                "{} is not declared autonomous",
                system.name()
            )))
        }
    };
    let (group, dim) = group;
    let mut report = AxiomReport::new(tolerance);
    for (index, TranslationSample { r, s, m }) in samples.iter().enumerate() {
        report.samples_tested += 1;
        if m.len() != dim {
            report.record_failure(index, format!("point has dimension {}, expected {dim}", m.len()));
            continue;
        }
        report.record_consistency(distance(&group(*r, &group(*s, m)), &group(r + s, m)));
        report.record_restriction(distance(&group(0.0, m), m));
    }
    Ok(report.finish())
}

/// `F(r, m)` of an autonomous system.
#[allow(non_snake_case)]
pub fn autonomous_F(system: &SincovSystem, r: f64, m: &[f64]) -> Result<Vec<f64>> {
    match system {
        SincovSystem::Real(RealSystem {
            autonomous: Some(group),
            dim,
            ..
        }) if m.len() == *dim => Ok(group(r, m)),
        _ => Err(FlowError::validation(format!(
            "{} has no autonomous form for this point",
            system.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(x: f64) -> Point {
        Point::Real(vec![x])
    }

    #[test]
    fn identity_system_fixes_points() {
        let sys = SincovSystem::Real(RealSystem::identity(1));
        assert_eq!(sincov_F(&sys, 3.0, -2.0, &real(7.5)).unwrap(), real(7.5));
    }

    #[test]
    fn unit_translation_example() {
        // G_t(m) = m + t: F(5, 2, 10) = 10 - 2 + 5
        let sys = SincovSystem::Real(RealSystem::translation(vec![1.0]).unwrap());
        assert_eq!(sincov_F(&sys, 5.0, 2.0, &real(10.0)).unwrap(), real(13.0));
    }

    #[test]
    fn autonomous_and_sincov_forms_agree() {
        // F(t, s, m) = F_aut(s - t, m)
        let sys = SincovSystem::Real(RealSystem::multiplicative(1).unwrap());
        let nonaut = sincov_F(&sys, 0.7, -0.2, &real(1.5)).unwrap();
        let aut = autonomous_F(&sys, -0.9, &[1.5]).unwrap();
        match nonaut {
            Point::Real(x) => assert!((x[0] - aut[0]).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn finite_cyclic_composes_exactly() {
        let times: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let sys = SincovSystem::Finite(FiniteSystem::cyclic(3, times.clone()).unwrap());
        let mut samples = Vec::new();
        for &t in &times {
            for &r in &times {
                for &s in &times {
                    for m in 0..3 {
                        samples.push(SincovSample { t, r, s, m: Point::Label(m) });
                    }
                }
            }
        }
        let report = sincov_check(&sys, &samples, 0.0);
        assert!(report.passed);
        assert_eq!(report.max_residual_consistency, 0.0);
    }

    #[test]
    fn non_bijection_rejected() {
        assert!(FiniteSystem::tabulate(3, vec![0.0], |_, _| 0).is_err());
    }

    #[test]
    fn unknown_points_and_times_rejected() {
        let sys = SincovSystem::Finite(FiniteSystem::cyclic(3, vec![0.0, 1.0]).unwrap());
        assert!(sincov_F(&sys, 0.0, 1.0, &Point::Label(3)).is_err());
        assert!(sincov_F(&sys, 0.5, 1.0, &Point::Label(0)).is_err());
        assert!(sincov_F(&sys, 0.0, 1.0, &real(0.0)).is_err());
    }

    #[test]
    fn translation_check_needs_autonomous_flag() {
        let sys = SincovSystem::Real(RealSystem::affine(1).unwrap());
        assert!(translation_check(&sys, &[], 1e-12).is_err());
        let sys = SincovSystem::Real(RealSystem::translation(vec![0.5]).unwrap());
        let report = translation_check(
            &sys,
            &[TranslationSample { r: 1.25, s: -0.5, m: vec![3.0] }],
            0.0,
        )
        .unwrap();
        assert!(report.passed);
    }

    #[test]
    fn smooth_system_round_trips() {
        let sys = SincovSystem::Real(RealSystem::affine(2).unwrap());
        let r = sys
            .bijection_residual(&[(0.3, Point::Real(vec![1.0, -2.0])), (-1.1, Point::Real(vec![0.0, 4.0]))])
            .unwrap();
        assert!(r < 1e-14);
    }
}
