//! Worldline families induced by `k`-th order ODEs.
//!
//! The equation `x^(k) = f(t, x, x', .., x^(k-1))` with Cauchy data
//! `w = (x(t0), x'(t0), .., x^(k-1)(t0))` gives the family `G(t, w) = x(t)`.
//! Values come from a fixed-step classical Runge-Kutta integrator applied to
//! the first-order system `y' = (y_1, .., y_{k-1}, f(t, y))`; inverting the
//! `k`-point projection is multi-point shooting.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::{invert_omega_beta, omega_beta, Family, Inversion, InversionMethod, ParamBox};
use crate::error::{FlowError, Result};
use crate::families::polynomial::interpolating_polynomial;
use crate::flow::{Interval, Restriction, TimeSet};
use crate::newton::{self, NewtonSettings};

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;

type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Open set where the right-hand side may be evaluated: a time interval
/// times a box in `(R^n)^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhsDomain {
    pub time: Interval,
    pub state: ParamBox,
}

impl RhsDomain {
    pub fn everywhere(state_dim: usize) -> Self {
        RhsDomain {
            time: Interval::real_line(),
            state: ParamBox::unbounded(state_dim),
        }
    }

    pub fn contains(&self, t: f64, y: &[f64]) -> bool {
        self.time.contains(t) && self.state.contains(y)
    }
}

/// Right-hand side `f` of `x^(k) = f(t, x, .., x^(k-1))`.
///
/// `f` receives the stacked state `(x, x', .., x^(k-1))` and writes the
/// `n`-vector `x^(k)`.
#[derive(Clone)]
pub struct OdeRhs {
    name: String,
    k: usize,
    n: usize,
    f: RhsFn,
    domain: RhsDomain,
}

impl fmt::Debug for OdeRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeRhs")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("n", &self.n)
            .field("domain", &self.domain)
            .finish()
    }
}

impl OdeRhs {
    pub fn new(
        name: impl Into<String>,
        k: usize,
        n: usize,
        f: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(FlowError::validation("ODE needs order k >= 1 and dimension n >= 1"));
        }
        Ok(OdeRhs {
            name: name.into(),
            k,
            n,
            f: Arc::new(f),
            domain: RhsDomain::everywhere(k * n),
        })
    }

    pub fn with_domain(mut self, domain: RhsDomain) -> Result<Self> {
        if domain.state.dim() != self.k * self.n {
            return Err(FlowError::validation("domain box must have dimension k * n"));
        }
        self.domain = domain;
        Ok(self)
    }

    /// `x'' = -c x`.
    pub fn harmonic(c: f64) -> Self {
        Self::new("harmonic", 2, 1, move |_, y, out| out[0] = -c * y[0]).expect("valid order")
    }

    /// `x^(k) = 0` in `n` dimensions.
    pub fn free(k: usize, n: usize) -> Result<Self> {
        Self::new("free", k, n, |_, _, out| out.fill(0.0))
    }

    /// `x'' = -c sin x`.
    pub fn pendulum(c: f64) -> Self {
        Self::new("pendulum", 2, 1, move |_, y, out| out[0] = -c * y[0].sin()).expect("valid order")
    }

    /// `x^(k) = sum_d c_d x^(d)` with `k = coefficients.len()`.
    pub fn linear(coefficients: Vec<f64>) -> Result<Self> {
        let k = coefficients.len();
        Self::new("linear", k, 1, move |_, y, out| {
            out[0] = coefficients.iter().zip(y).map(|(c, x)| c * x).sum();
        })
    }

    /// Looks up a catalog equation by name.
    pub fn catalog(name: &str, constants: &[f64], order: Option<usize>, dim: Option<usize>) -> Result<Self> {
        let constant = |default: f64| -> Result<f64> {
            match constants {
                [] => Ok(default),
                [c] => Ok(*c),
                _ => Err(FlowError::validation(format!("{name} takes one constant"))),
            }
        };
        let rhs = match name {
            "harmonic" => Self::harmonic(constant(1.0)?),
            "pendulum" => Self::pendulum(constant(1.0)?),
            "free" => {
                if !constants.is_empty() {
                    return Err(FlowError::validation("free takes no constants"));
                }
                Self::free(order.unwrap_or(2), dim.unwrap_or(1))?
            }
            "linear" => Self::linear(constants.to_vec())?,
            other => return Err(FlowError::validation(format!("unknown right-hand side '{other}'"))),
        };
        if order.is_some_and(|k| k != rhs.k) || dim.is_some_and(|n| n != rhs.n) {
            return Err(FlowError::validation(format!(
                "{name} has order {} and dimension {}",
                rhs.k, rhs.n
            )));
        }
        Ok(rhs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &RhsDomain {
        &self.domain
    }

    /// `x^(k)` at the stacked state `y`.
    pub fn eval(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        (self.f)(t, y, &mut out);
        out
    }

    /// The first-order field `(y_1, .., y_{k-1}, f(t, y))`.
    fn field(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let lower = (self.k - 1) * self.n;
        out[..lower].copy_from_slice(&y[self.n..]);
        (self.f)(t, y, &mut out[lower..]);
    }
}

/// Stacked state `(x, x', .., x^(k-1))` at `time`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyState {
    pub time: f64,
    pub y: Vec<f64>,
}

impl CauchyState {
    /// Block `d` of the state: the `d`-th derivative of `x`.
    pub fn block(&self, d: usize, n: usize) -> &[f64] {
        &self.y[d * n..(d + 1) * n]
    }
}

struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(dim: usize) -> Self {
        Rk4Work {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn step(&mut self, rhs: &OdeRhs, t: f64, h: f64, y: &mut [f64]) {
        rhs.field(t, y, &mut self.k1);
        for ((tmp, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = yi + 0.5 * h * k;
        }
        rhs.field(t + 0.5 * h, &self.tmp, &mut self.k2);
        for ((tmp, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = yi + 0.5 * h * k;
        }
        rhs.field(t + 0.5 * h, &self.tmp, &mut self.k3);
        for ((tmp, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = yi + h * k;
        }
        rhs.field(t + h, &self.tmp, &mut self.k4);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Propagates Cauchy data `w` at `t0` to time `t` with fixed-step RK4 of
/// step `step`, finishing with one partial step of the exact remaining length.
pub fn integrate_cauchy(rhs: &OdeRhs, t0: f64, w: &[f64], t: f64, step: f64) -> Result<CauchyState> {
    let dim = rhs.k * rhs.n;
    if w.len() != dim {
        return Err(FlowError::validation(format!(
            "Cauchy data has {} entries, expected {dim}",
            w.len()
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(FlowError::validation("integrator step must be positive"));
    }
    if !t.is_finite() || !t0.is_finite() {
        return Err(FlowError::validation("integration times must be finite"));
    }
    if !rhs.domain.contains(t0, w) {
        return Err(FlowError::Escape { time: t0 });
    }
    let mut y = w.to_vec();
    if t == t0 {
        return Ok(CauchyState { time: t, y });
    }
    let direction = (t - t0).signum();
    let span = (t - t0).abs();
    let full_steps = (span / step).floor() as usize;
    let mut work = Rk4Work::new(dim);
    let h = direction * step;

    let check = |time: f64, y: &[f64]| -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::BlowUp { time });
        }
        if !rhs.domain.contains(time, y) {
            return Err(FlowError::Escape { time });
        }
        Ok(())
    };

    for i in 0..full_steps {
        let time = t0 + i as f64 * h;
        work.step(rhs, time, h, &mut y);
        check(t0 + (i + 1) as f64 * h, &y)?;
    }
    let reached = t0 + full_steps as f64 * h;
    let remaining = t - reached;
    if remaining != 0.0 {
        work.step(rhs, reached, remaining, &mut y);
        check(t, &y)?;
    }
    Ok(CauchyState { time: t, y })
}

/// Anchor time, interval and parameter box on which an ODE family is used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalChart {
    pub t0: f64,
    pub interval: Interval,
    pub param_box: ParamBox,
    pub step: f64,
}

impl LocalChart {
    pub fn new(t0: f64, interval: Interval, param_box: ParamBox, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(FlowError::validation("integrator step must be positive"));
        }
        if !interval.is_bounded() {
            return Err(FlowError::validation("chart interval must be bounded"));
        }
        Ok(LocalChart {
            t0,
            interval,
            param_box,
            step,
        })
    }
}

/// `G(t, w) = x(t)` for the solution with Cauchy data `w` at the chart's anchor.
#[derive(Debug, Clone)]
pub struct OdeFamily {
    rhs: OdeRhs,
    chart: LocalChart,
}

impl OdeFamily {
    pub fn new(rhs: OdeRhs, chart: LocalChart) -> Result<Self> {
        if chart.param_box.dim() != rhs.k * rhs.n {
            return Err(FlowError::validation(format!(
                "parameter box has dimension {}, expected {}",
                chart.param_box.dim(),
                rhs.k * rhs.n
            )));
        }
        Ok(OdeFamily { rhs, chart })
    }

    pub fn into_family(self) -> Arc<dyn Family> {
        Arc::new(self)
    }

    pub fn rhs(&self) -> &OdeRhs {
        &self.rhs
    }

    pub fn chart(&self) -> &LocalChart {
        &self.chart
    }

    pub fn state(&self, t: f64, w: &[f64]) -> Result<CauchyState> {
        integrate_cauchy(&self.rhs, self.chart.t0, w, t, self.chart.step)
    }
}

impl Family for OdeFamily {
    fn id(&self) -> String {
        format!(
            "ode({},k={},n={},t0={},I={},h={})",
            self.rhs.name, self.rhs.k, self.rhs.n, self.chart.t0, self.chart.interval, self.chart.step
        )
    }

    fn k(&self) -> usize {
        self.rhs.k
    }

    fn n(&self) -> usize {
        self.rhs.n
    }

    fn interval(&self) -> Interval {
        self.chart.interval
    }

    fn param_box(&self) -> ParamBox {
        self.chart.param_box.clone()
    }

    fn evaluate(&self, t: f64, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.state(t, w)?.block(0, self.rhs.n).to_vec())
    }

    fn time_derivative(&self, t: f64, w: &[f64], order: usize) -> Option<Result<Vec<f64>>> {
        let (k, n) = (self.rhs.k, self.rhs.n);
        if order > k {
            return None;
        }
        Some(self.state(t, w).map(|s| {
            if order < k {
                s.block(order, n).to_vec()
            } else {
                self.rhs.eval(t, &s.y)
            }
        }))
    }

    /// Cauchy data of the interpolating polynomial through `a` at the anchor.
    fn initial_guess(&self, a: &Restriction) -> Vec<f64> {
        let (k, n) = (self.rhs.k, self.rhs.n);
        let mut guess = vec![0.0; k * n];
        for j in 0..n {
            let mut poly = interpolating_polynomial(a.times(), &a.component(j));
            for d in 0..k {
                guess[d * n + j] = poly.eval(&self.chart.t0);
                poly = poly.derivative();
            }
        }
        self.chart.param_box.pull_inside(&guess)
    }
}

/// `G(t, w)`: the zero block of the propagated Cauchy state.
#[allow(non_snake_case)]
pub fn ode_G(rhs: &OdeRhs, chart: &LocalChart, t: f64, w: &[f64]) -> Result<Vec<f64>> {
    chart.interval.check(t)?;
    Ok(integrate_cauchy(rhs, chart.t0, w, t, chart.step)?.block(0, rhs.n).to_vec())
}

/// Cauchy data at the anchor of the solution through the `k` samples of `a`.
pub fn shoot_multipoint(
    rhs: &OdeRhs,
    chart: &LocalChart,
    a: &Restriction,
    settings: &NewtonSettings,
) -> Result<Inversion> {
    let family = OdeFamily::new(rhs.clone(), chart.clone())?;
    invert_omega_beta(&family, a, None, settings, InversionMethod::Newton)
}

/// Requested chart and the knobs of the probing heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartRequest {
    pub time_half_width: f64,
    pub param_half_widths: Vec<f64>,
    pub step: f64,
    /// Give up once the time half-width falls below this.
    pub min_time_half_width: f64,
    /// Largest accepted condition number of the `k`-point Jacobian.
    pub condition_cap: f64,
    pub beta_draws: usize,
    /// Relative distance within which shooting must recover the probe.
    pub recovery_tolerance: f64,
    pub seed: u64,
    pub newton: NewtonSettings,
}

impl ChartRequest {
    pub fn new(time_half_width: f64, param_half_widths: Vec<f64>) -> Self {
        ChartRequest {
            time_half_width,
            param_half_widths,
            step: DEFAULT_STEP,
            min_time_half_width: 1e-3,
            condition_cap: 1e8,
            beta_draws: 8,
            recovery_tolerance: 1e-6,
            seed: 42,
            newton: NewtonSettings::default(),
        }
    }
}

/// Outcome of [`localize_chart`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSearch {
    pub chart: LocalChart,
    /// Number of times the chart was halved before acceptance.
    pub bisections: usize,
    /// Why each rejected candidate failed, in order.
    pub rejections: Vec<String>,
}

/// Shrinks `(t0 - r, t0 + r) x (w0 - u, w0 + u)` by halving until shooting
/// succeeds and the `k`-point Jacobian is well conditioned on a probe grid:
/// the `3^(k n)` combinations of center and near-corner coordinates of the
/// box, each with `beta_draws` random time sets.
pub fn localize_chart(rhs: &OdeRhs, t0: f64, w0: &[f64], request: &ChartRequest) -> Result<ChartSearch> {
    let dim = rhs.k * rhs.n;
    if w0.len() != dim || request.param_half_widths.len() != dim {
        return Err(FlowError::validation(format!("anchor and half-widths need {dim} entries")));
    }
    if !rhs.domain.contains(t0, w0) {
        return Err(FlowError::validation("anchor lies outside the domain of the right-hand side"));
    }
    if !(request.time_half_width > 0.0) || request.param_half_widths.iter().any(|h| !(*h > 0.0)) {
        return Err(FlowError::validation("half-widths must be positive"));
    }
    let mut time_half = request.time_half_width;
    let mut param_half = request.param_half_widths.clone();
    let mut rejections = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);

    while time_half >= request.min_time_half_width {
        let chart = LocalChart::new(
            t0,
            Interval::new(t0 - time_half, t0 + time_half)?,
            ParamBox::around(w0, &param_half)?,
            request.step,
        )?;
        match probe_chart(rhs, &chart, w0, &param_half, request, &mut rng) {
            Ok(()) => {
                return Ok(ChartSearch {
                    chart,
                    bisections: rejections.len(),
                    rejections,
                })
            }
            Err(reason) => rejections.push(format!("half-width {time_half}: {reason}")),
        }
        time_half *= 0.5;
        param_half.iter_mut().for_each(|h| *h *= 0.5);
    }
    Err(FlowError::Localization(format!(
        "no chart above half-width {} after {} bisections; last: {}",
        request.min_time_half_width,
        rejections.len(),
        rejections.last().map(String::as_str).unwrap_or("none")
    )))
}

fn probe_points(center: &[f64], half: &[f64]) -> Vec<Vec<f64>> {
    let dim = center.len();
    let total = 3_usize.pow(dim as u32);
    (0..total)
        .map(|mut code| {
            (0..dim)
                .map(|i| {
                    let offset = (code % 3) as f64 - 1.0;
                    code /= 3;
                    center[i] + 0.9 * offset * half[i]
                })
                .collect()
        })
        .collect()
}

fn random_beta(rng: &mut ChaCha8Rng, interval: &Interval, k: usize) -> TimeSet {
    let min_gap = interval.length() * 1e-3;
    loop {
        let points: Vec<f64> = (0..k)
            .map(|_| interval.lower + interval.length() * rng.gen_range(0.001..0.999))
            .collect();
        if let Ok(set) = TimeSet::with_separation(points, min_gap) {
            return set;
        }
    }
}

fn condition_number(jac: DMatrix<f64>) -> f64 {
    let sv = jac.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn probe_chart(
    rhs: &OdeRhs,
    chart: &LocalChart,
    center: &[f64],
    half: &[f64],
    request: &ChartRequest,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(), String> {
    let family: Arc<dyn Family> = Arc::new(OdeFamily::new(rhs.clone(), chart.clone()).map_err(|e| e.to_string())?);
    for w in probe_points(center, half) {
        for end in [chart.interval.lower, chart.interval.upper] {
            integrate_cauchy(rhs, chart.t0, &w, end, chart.step)
                .map_err(|e| format!("probe {w:?}: {e}"))?;
        }
        for _ in 0..request.beta_draws {
            let beta = random_beta(rng, &chart.interval, rhs.k);
            let a = omega_beta(&family, &w, &beta).map_err(|e| format!("probe {w:?}: {e}"))?;
            let residual = |v: &[f64]| crate::embedding::anchor_residuals(family.as_ref(), &a, v);
            let fx = residual(&w).map_err(|e| e.to_string())?;
            let jac = newton::jacobian(&residual, &w, &fx, false).map_err(|e| e.to_string())?;
            let cond = condition_number(jac);
            if !(cond < request.condition_cap) {
                return Err(format!(
                    "probe {w:?}, beta {:?}: condition number {cond:e}",
                    beta.points()
                ));
            }
            let inv = invert_omega_beta(family.as_ref(), &a, None, &request.newton, InversionMethod::Newton)
                .map_err(|e| format!("probe {w:?}, beta {:?}: {e}", beta.points()))?;
            let miss = inv
                .param
                .iter()
                .zip(&w)
                .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
                .fold(0.0, f64::max);
            if miss > request.recovery_tolerance {
                return Err(format!(
                    "probe {w:?}, beta {:?}: shooting found another worldline {:?}",
                    beta.points(),
                    inv.param
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_moves_in_a_line() {
        let rhs = OdeRhs::free(2, 1).unwrap();
        let s = integrate_cauchy(&rhs, 0.0, &[0.0, 1.0], 2.0, DEFAULT_STEP).unwrap();
        assert!((s.y[0] - 2.0).abs() < 1e-12);
        assert!((s.y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_length_integration_is_identity() {
        let rhs = OdeRhs::pendulum(1.0);
        let s = integrate_cauchy(&rhs, 0.3, &[0.7, -0.2], 0.3, DEFAULT_STEP).unwrap();
        assert_eq!(s.y, vec![0.7, -0.2]);
    }

    #[test]
    fn harmonic_matches_cosine() {
        let rhs = OdeRhs::harmonic(1.0);
        let s = integrate_cauchy(&rhs, 0.0, &[1.0, 0.0], 1.0, 1e-3).unwrap();
        assert!((s.y[0] - 1.0_f64.cos()).abs() <= 1e-8);
        assert!((s.y[1] + 1.0_f64.sin()).abs() <= 1e-8);
        // backwards too
        let s = integrate_cauchy(&rhs, 0.0, &[1.0, 0.0], -1.0, 1e-3).unwrap();
        assert!((s.y[0] - 1.0_f64.cos()).abs() <= 1e-8);
    }

    #[test]
    fn partial_final_step_lands_on_target() {
        let rhs = OdeRhs::free(1, 1).unwrap();
        let s = integrate_cauchy(&rhs, 0.0, &[2.0], 0.12345, 0.01).unwrap();
        assert_eq!(s.time, 0.12345);
        assert_eq!(s.y, vec![2.0]);
        let rhs = OdeRhs::free(2, 1).unwrap();
        let s = integrate_cauchy(&rhs, 0.0, &[0.0, 1.0], 0.12345, 0.01).unwrap();
        assert!((s.y[0] - 0.12345).abs() < 1e-15);
    }

    #[test]
    fn escape_and_blow_up_are_reported() {
        let rhs = OdeRhs::free(2, 1)
            .unwrap()
            .with_domain(RhsDomain {
                time: Interval::real_line(),
                state: ParamBox::new(vec![-1.0, -10.0], vec![1.0, 10.0]).unwrap(),
            })
            .unwrap();
        match integrate_cauchy(&rhs, 0.0, &[0.0, 1.0], 3.0, 1e-3).unwrap_err() {
            FlowError::Escape { time } => assert!((time - 1.0).abs() < 2e-3, "{time}"),
            other => panic!("unexpected {other:?}"),
        }
        // x' = x^2 from x(0) = 1 blows up at t = 1
        let riccati = OdeRhs::new("riccati", 1, 1, |_, y, out| out[0] = y[0] * y[0]).unwrap();
        let err = integrate_cauchy(&riccati, 0.0, &[1.0], 2.0, 1e-2).unwrap_err();
        assert!(matches!(err, FlowError::BlowUp { .. }), "{err:?}");
    }

    #[test]
    fn catalog_lookup() {
        assert_eq!(OdeRhs::catalog("harmonic", &[], None, None).unwrap().k(), 2);
        assert_eq!(OdeRhs::catalog("free", &[], Some(3), Some(2)).unwrap().n(), 2);
        assert_eq!(OdeRhs::catalog("linear", &[0.0, 0.0, -1.0], None, None).unwrap().k(), 3);
        assert!(OdeRhs::catalog("lorenz", &[], None, None).is_err());
        assert!(OdeRhs::catalog("harmonic", &[1.0, 2.0], None, None).is_err());
        assert!(OdeRhs::catalog("pendulum", &[], Some(3), None).is_err());
    }

    #[test]
    fn initial_guess_is_exact_for_free_particle() {
        let rhs = OdeRhs::free(2, 1).unwrap();
        let chart = LocalChart::new(0.0, Interval::new(-2.0, 2.0).unwrap(), ParamBox::unbounded(2), 1e-3).unwrap();
        let fam = OdeFamily::new(rhs, chart).unwrap();
        let a = Restriction::scalar(&[(0.5, 1.0), (1.5, 4.0)]).unwrap();
        let guess = fam.initial_guess(&a);
        assert!((guess[0] + 0.5).abs() < 1e-15 && (guess[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn probe_grid_covers_center_and_corners() {
        let pts = probe_points(&[0.0, 10.0], &[1.0, 2.0]);
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&vec![0.0, 10.0]));
        assert!(pts.contains(&vec![-0.9, 8.2]));
    }
}
