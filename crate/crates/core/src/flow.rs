//! Worldlines, restrictions and the checks a flow with limited intersection
//! must pass.
//!
//! A worldline is never stored as samples. It is the pair (family, parameter)
//! and is evaluated on demand. A restriction is a worldline sampled at `k`
//! distinct times. A flow maps restrictions back to whole worldlines and has
//! to satisfy two laws: re-anchoring the flow at any other `k` points of its
//! own worldline gives the same worldline (consistency), and the worldline
//! passes through the points it was built from (restriction).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::embedding::{Family, FlowMap};
use crate::error::{FlowError, Result};

/// Minimum separation between two time points in a [`TimeSet`].
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-8;

/// Default absolute tolerance for axiom verdicts.
pub const DEFAULT_AXIOM_TOLERANCE: f64 = 1e-9;

/// Magnitude up to which residuals are taken as absolute.
pub const ABSOLUTE_SCALE_LIMIT: f64 = 1e3;

/// An open interval `(lower, upper)` of the real line. Infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(FlowError::validation(format!(
                "interval ({lower}, {upper}) is empty"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn real_line() -> Self {
        Interval {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lower < t && t < self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub(crate) fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(FlowError::OutsideInterval {
                time: t,
                interval: *self,
            })
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

fn check_separation(points: &[f64], min_separation: f64) -> Result<()> {
    if points.iter().any(|t| !t.is_finite()) {
        return Err(FlowError::validation("time points must be finite"));
    }
    for pair in points.windows(2) {
        if pair[1] - pair[0] < min_separation {
            return Err(FlowError::validation(format!(
                "nodes not distinct: {} and {} are closer than {min_separation:e}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

/// A set of `k` distinct time points, kept in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSet {
    points: Vec<f64>,
}

impl TimeSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        Self::with_separation(points, DEFAULT_MIN_SEPARATION)
    }

    /// Builds the set, rejecting points closer than `min_separation`.
    pub fn with_separation(mut points: Vec<f64>, min_separation: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(FlowError::validation("a time set needs at least one point"));
        }
        points.sort_by(f64::total_cmp);
        check_separation(&points, min_separation)?;
        Ok(TimeSet { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn check_inside(&self, interval: &Interval) -> Result<()> {
        self.points.iter().try_for_each(|&t| interval.check(t))
    }
}

/// `k` samples `(t_i, v_i)` of an `n`-dimensional worldline, ordered by time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Restriction {
    times: TimeSet,
    values: Vec<Vec<f64>>,
}

impl Restriction {
    pub fn new(entries: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        Self::with_separation(entries, DEFAULT_MIN_SEPARATION)
    }

    pub fn with_separation(mut entries: Vec<(f64, Vec<f64>)>, min_separation: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(FlowError::validation("a restriction needs at least one entry"));
        }
        let n = entries[0].1.len();
        if n == 0 {
            return Err(FlowError::validation("values must have dimension at least 1"));
        }
        if let Some((t, v)) = entries.iter().find(|(_, v)| v.len() != n) {
            return Err(FlowError::validation(format!(
                "value at t = {t} has dimension {}, expected {n}",
                v.len()
            )));
        }
        if entries.iter().flat_map(|(_, v)| v).any(|x| !x.is_finite()) {
            return Err(FlowError::validation("restriction values must be finite"));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (times, values): (Vec<f64>, Vec<Vec<f64>>) = entries.into_iter().unzip();
        let times = TimeSet::with_separation(times, min_separation)?;
        Ok(Restriction { times, values })
    }

    /// Convenience constructor for scalar-valued data.
    pub fn scalar(entries: &[(f64, f64)]) -> Result<Self> {
        Self::new(entries.iter().map(|&(t, v)| (t, vec![v])).collect())
    }

    pub fn k(&self) -> usize {
        self.times.k()
    }

    pub fn n(&self) -> usize {
        self.values[0].len()
    }

    pub fn time_set(&self) -> &TimeSet {
        &self.times
    }

    pub fn times(&self) -> &[f64] {
        self.times.points()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .points()
            .iter()
            .zip(&self.values)
            .map(|(&t, v)| (t, v.as_slice()))
    }

    /// Largest absolute value component, used to scale tolerances.
    pub fn value_scale(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Component `j` of every sample, in time order.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[j]).collect()
    }
}

/// A curve `t -> G(t, w)` of a family, evaluable anywhere in the family's interval.
#[derive(Clone)]
pub struct Worldline {
    family: Arc<dyn Family>,
    param: Vec<f64>,
}

impl fmt::Debug for Worldline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Worldline")
            .field("family", &self.family.id())
            .field("param", &self.param)
            .finish()
    }
}

impl Worldline {
    pub(crate) fn from_parts(family: Arc<dyn Family>, param: Vec<f64>) -> Self {
        Worldline { family, param }
    }

    pub fn family(&self) -> &Arc<dyn Family> {
        &self.family
    }

    pub fn family_id(&self) -> String {
        self.family.id()
    }

    pub fn param(&self) -> &[f64] {
        &self.param
    }

    pub fn interval(&self) -> Interval {
        self.family.interval()
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.interval().check(t)?;
        self.family.evaluate(t, &self.param)
    }
}

/// Samples `x` at the points of `beta`.
pub fn restrict(x: &Worldline, beta: &TimeSet) -> Result<Restriction> {
    beta.check_inside(&x.interval())?;
    let entries = beta
        .points()
        .iter()
        .map(|&t| Ok((t, x.eval(t)?)))
        .collect::<Result<Vec<_>>>()?;
    Restriction::new(entries)
}

/// Absolute difference, rescaled once the reference magnitude exceeds
/// [`ABSOLUTE_SCALE_LIMIT`].
pub fn scaled_residual(difference: f64, reference: f64) -> f64 {
    difference / (reference.abs() / ABSOLUTE_SCALE_LIMIT).max(1.0)
}

fn max_scaled_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| scaled_residual((x - y).abs(), x.abs().max(y.abs())))
        .fold(0.0, f64::max)
}

/// A sample that could not be evaluated during verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleFailure {
    pub sample: usize,
    pub message: String,
}

/// Worst residuals of the two flow laws over a batch of samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub max_residual_consistency: f64,
    pub max_residual_restriction: f64,
    pub samples_tested: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: Vec<SampleFailure>,
}

impl AxiomReport {
    pub fn new(tolerance: f64) -> Self {
        AxiomReport {
            max_residual_consistency: 0.0,
            max_residual_restriction: 0.0,
            samples_tested: 0,
            tolerance,
            passed: true,
            failures: Vec::new(),
        }
    }

    pub fn record_consistency(&mut self, residual: f64) {
        self.max_residual_consistency = fold_residual(self.max_residual_consistency, residual);
    }

    pub fn record_restriction(&mut self, residual: f64) {
        self.max_residual_restriction = fold_residual(self.max_residual_restriction, residual);
    }

    pub fn record_failure(&mut self, sample: usize, message: impl Into<String>) {
        self.failures.push(SampleFailure {
            sample,
            message: message.into(),
        });
    }

    /// Settles the verdict from the recorded residuals and failures.
    pub fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty()
            && self.max_residual_consistency <= self.tolerance
            && self.max_residual_restriction <= self.tolerance;
        self
    }
}

// NaN must poison the maximum rather than be swallowed by f64::max.
fn fold_residual(acc: f64, residual: f64) -> f64 {
    if residual.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.max(residual)
    }
}

/// Checks both flow laws: for each restriction `a`, the worldline `phi(a)`
/// passes through `a`, and re-anchoring it at each `beta` reproduces it on
/// `eval_grid`.
pub fn verify_flow_axioms(
    flow: &FlowMap,
    restrictions: &[Restriction],
    betas: &[TimeSet],
    eval_grid: &[f64],
    tolerance: f64,
) -> AxiomReport {
    let mut report = AxiomReport::new(tolerance);
    for (index, a) in restrictions.iter().enumerate() {
        report.samples_tested += 1;
        if let Err(err) = check_one(flow, a, betas, eval_grid, &mut report) {
            report.record_failure(index, err.to_string());
        }
    }
    report.finish()
}

fn check_one(
    flow: &FlowMap,
    a: &Restriction,
    betas: &[TimeSet],
    grid: &[f64],
    report: &mut AxiomReport,
) -> Result<()> {
    let phi_a = flow.flow(a)?.worldline;
    for (t, value) in a.entries() {
        report.record_restriction(max_scaled_difference(&phi_a.eval(t)?, value));
    }
    let reference = grid
        .iter()
        .map(|&t| phi_a.eval(t))
        .collect::<Result<Vec<_>>>()?;
    for beta in betas {
        let anchored = restrict(&phi_a, beta)?;
        let phi_b = flow.flow(&anchored)?.worldline;
        for (&t, expected) in grid.iter().zip(&reference) {
            report.record_consistency(max_scaled_difference(&phi_b.eval(t)?, expected));
        }
    }
    Ok(())
}

/// Number of times two worldlines meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntersectionCount {
    /// The worldlines coincide.
    All,
    Finite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntersectionVerdict {
    /// Same parameter, same worldline.
    Equal,
    /// Fewer than `k` meetings observed.
    Consistent,
    /// At least `k` meetings between distinct worldlines.
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntersectionReport {
    pub count: IntersectionCount,
    pub verdict: IntersectionVerdict,
    /// True when the count is exact rather than a grid estimate.
    pub exact: bool,
}

/// Counts meetings of two worldlines of one family.
///
/// Families that can count roots exactly (the exact-mode polynomial family)
/// do so; otherwise zero crossings of each component of `x1 - x2` are counted
/// on `grid` and the maximum over components is reported. Grid counts can
/// only under-approximate the true number.
pub fn intersection_count(
    x1: &Worldline,
    x2: &Worldline,
    grid: &[f64],
) -> Result<IntersectionReport> {
    if x1.family_id() != x2.family_id() {
        return Err(FlowError::validation(format!(
            "worldlines belong to different families: {} vs {}",
            x1.family_id(),
            x2.family_id()
        )));
    }
    let k = x1.family().k();
    if x1.param() == x2.param() {
        return Ok(IntersectionReport {
            count: IntersectionCount::All,
            verdict: IntersectionVerdict::Equal,
            exact: true,
        });
    }
    let verdict_for = |count: IntersectionCount| match count {
        IntersectionCount::All => IntersectionVerdict::Equal,
        IntersectionCount::Finite(c) if c < k => IntersectionVerdict::Consistent,
        IntersectionCount::Finite(_) => IntersectionVerdict::Violated,
    };
    if let Some(count) = x1.family().exact_intersections(x1.param(), x2.param()) {
        return Ok(IntersectionReport {
            count,
            verdict: verdict_for(count),
            exact: true,
        });
    }

    let n = x1.family().n();
    let mut diffs: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); n];
    for &t in grid {
        let (v1, v2) = (x1.eval(t)?, x2.eval(t)?);
        for j in 0..n {
            diffs[j].push(v1[j] - v2[j]);
        }
    }
    let crossings = diffs.iter().map(|d| zero_crossings(d)).max().unwrap_or(0);
    let count = IntersectionCount::Finite(crossings);
    Ok(IntersectionReport {
        count,
        verdict: verdict_for(count),
        exact: false,
    })
}

/// Sign changes of a sampled function, with runs of exact zeros counted once.
pub(crate) fn zero_crossings(samples: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0.0;
    let mut in_zero_run = false;
    for &d in samples {
        if d == 0.0 {
            if !in_zero_run {
                count += 1;
                in_zero_run = true;
            }
            continue;
        }
        let sign = d.signum();
        if !in_zero_run && last_sign != 0.0 && sign != last_sign {
            count += 1;
        }
        in_zero_run = false;
        last_sign = sign;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_set_sorts_and_rejects_close_points() {
        let set = TimeSet::new(vec![2.0, -1.0, 0.5]).unwrap();
        assert_eq!(set.points(), &[-1.0, 0.5, 2.0]);
        assert!(TimeSet::new(vec![1.0, 1.0 + 1e-10]).is_err());
        assert!(TimeSet::new(vec![]).is_err());
        assert!(TimeSet::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn restriction_rejects_duplicate_times() {
        let err = Restriction::scalar(&[(0.0, 1.0), (0.0, 2.0)]).unwrap_err();
        assert!(err.to_string().contains("nodes not distinct"));
    }

    #[test]
    fn restriction_rejects_mixed_dimensions() {
        let err = Restriction::new(vec![(0.0, vec![1.0]), (1.0, vec![1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, FlowError::Validation(_)));
    }

    #[test]
    fn interval_is_open() {
        let i = Interval::new(-1.0, 1.0).unwrap();
        assert!(i.contains(0.0));
        assert!(!i.contains(1.0));
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn zero_crossing_counter() {
        assert_eq!(zero_crossings(&[1.0, 0.5, -0.5, -1.0]), 1);
        assert_eq!(zero_crossings(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(zero_crossings(&[1.0, 0.0, 0.0, 1.0]), 1);
        assert_eq!(zero_crossings(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(zero_crossings(&[1.0, -1.0, 1.0]), 2);
    }

    #[test]
    fn scaled_residual_is_absolute_below_limit() {
        assert_eq!(scaled_residual(1e-10, 500.0), 1e-10);
        assert!((scaled_residual(1e-6, 1e6) - 1e-9).abs() < 1e-24);
    }

    #[test]
    fn report_verdict() {
        let mut report = AxiomReport::new(1e-9);
        report.record_consistency(1e-12);
        assert!(report.clone().finish().passed);
        report.record_restriction(1e-3);
        assert!(!report.clone().finish().passed);
        let mut report = AxiomReport::new(1e-9);
        report.record_consistency(f64::NAN);
        assert!(!report.finish().passed);
    }
}
