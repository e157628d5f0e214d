//! Frontal embeddings: parametrized worldline families `w -> (t -> G(t, w))`
//! whose every `k`-point projection is invertible, and the flow map built
//! from them.
//!
//! The flow sends a restriction `a` with time set `beta` to the worldline
//! whose parameter solves `G(t_i, w) = a_i` for all `t_i` in `beta`. Families
//! that know the inverse in closed form supply it; everything else goes
//! through damped Newton on the stacked `k * n` system.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::{IntersectionCount, Interval, Restriction, TimeSet, Worldline};
use crate::newton::{self, inf_norm, NewtonSettings};

/// Open box `lower < w < upper` in parameter space. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(FlowError::validation("box bounds differ in dimension"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l >= u) {
            return Err(FlowError::validation("box has an empty side"));
        }
        Ok(ParamBox { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        ParamBox {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    /// Box `center ± half_widths`.
    pub fn around(center: &[f64], half_widths: &[f64]) -> Result<Self> {
        if center.len() != half_widths.len() {
            return Err(FlowError::validation("center and half-widths differ in dimension"));
        }
        Self::new(
            center.iter().zip(half_widths).map(|(c, h)| c - h).collect(),
            center.iter().zip(half_widths).map(|(c, h)| c + h).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| l < x && x < u)
    }

    /// Midpoint per coordinate; zero (or next to the finite bound) on
    /// unbounded sides.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| match (l.is_finite(), u.is_finite()) {
                (true, true) => 0.5 * (l + u),
                _ if l < 0.0 && 0.0 < u => 0.0,
                (true, false) => l + 1.0,
                (false, true) => u - 1.0,
                (false, false) => 0.0,
            })
            .collect()
    }

    /// Replaces coordinates outside the box by the center's coordinate.
    pub fn pull_inside(&self, w: &[f64]) -> Vec<f64> {
        let center = self.center();
        w.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .zip(center)
            .map(|((&x, (&l, &u)), c)| if l < x && x < u { x } else { c })
            .collect()
    }
}

/// A smooth family of worldlines `G(t, w)` with `k * n` real parameters.
///
/// `evaluate` does not check the interval; [`Worldline::eval`] does.
pub trait Family: Send + Sync {
    /// Identifies the family, including its dimensions and settings.
    fn id(&self) -> String;

    /// Number of points that pin down a worldline.
    fn k(&self) -> usize;

    /// Dimension of the values.
    fn n(&self) -> usize;

    fn interval(&self) -> Interval;

    fn param_box(&self) -> ParamBox;

    fn evaluate(&self, t: f64, w: &[f64]) -> Result<Vec<f64>>;

    /// Closed-form inverse of the `k`-point projection, if known.
    fn analytic_invert(&self, _a: &Restriction) -> Option<Result<Vec<f64>>> {
        None
    }

    /// `order`-th derivative of `G` in `t`, if known in closed form.
    fn time_derivative(&self, _t: f64, _w: &[f64], _order: usize) -> Option<Result<Vec<f64>>> {
        None
    }

    fn default_param(&self) -> Vec<f64> {
        self.param_box().center()
    }

    /// Starting point for Newton inversion of `a`.
    fn initial_guess(&self, _a: &Restriction) -> Vec<f64> {
        self.default_param()
    }

    /// Exact number of meetings of two worldlines, when the family can
    /// count it without sampling.
    fn exact_intersections(&self, _w1: &[f64], _w2: &[f64]) -> Option<IntersectionCount> {
        None
    }
}

fn check_param(family: &dyn Family, w: &[f64]) -> Result<()> {
    let expected = family.k() * family.n();
    if w.len() != expected {
        return Err(FlowError::validation(format!(
            "parameter has {} entries, family {} expects {expected}",
            w.len(),
            family.id()
        )));
    }
    if !family.param_box().contains(w) {
        return Err(FlowError::ParameterOutsideBox { param: w.to_vec() });
    }
    Ok(())
}

/// The worldline `t -> G(t, w)`.
pub fn omega(family: &Arc<dyn Family>, w: &[f64]) -> Result<Worldline> {
    check_param(family.as_ref(), w)?;
    Ok(Worldline::from_parts(Arc::clone(family), w.to_vec()))
}

/// The `k`-point projection `{(t, G(t, w)) : t in beta}`.
pub fn omega_beta(family: &Arc<dyn Family>, w: &[f64], beta: &TimeSet) -> Result<Restriction> {
    let x = omega(family, w)?;
    crate::flow::restrict(&x, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InversionMethod {
    /// Closed form when the family has one, Newton otherwise.
    #[default]
    Auto,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub param: Vec<f64>,
    /// Infinity norm of `G(t_i, w) - a_i` over all entries.
    pub residual: f64,
    pub iterations: usize,
    pub analytic: bool,
}

/// Stacked residual `G(t_i, w) - a_i`.
pub fn anchor_residuals(family: &dyn Family, a: &Restriction, w: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(a.k() * a.n());
    for (t, value) in a.entries() {
        let g = family.evaluate(t, w)?;
        out.extend(g.iter().zip(value).map(|(x, y)| x - y));
    }
    Ok(out)
}

fn check_restriction(family: &dyn Family, a: &Restriction) -> Result<()> {
    if a.k() != family.k() || a.n() != family.n() {
        return Err(FlowError::validation(format!(
            "restriction has k = {}, n = {} but family {} has k = {}, n = {}",
            a.k(),
            a.n(),
            family.id(),
            family.k(),
            family.n()
        )));
    }
    a.time_set().check_inside(&family.interval())
}

/// Finds `w` with `G(t_i, w) = a_i` for every entry of `a`.
pub fn invert_omega_beta(
    family: &dyn Family,
    a: &Restriction,
    initial_guess: Option<&[f64]>,
    settings: &NewtonSettings,
    method: InversionMethod,
) -> Result<Inversion> {
    check_restriction(family, a)?;
    if method == InversionMethod::Auto {
        if let Some(param) = family.analytic_invert(a) {
            let param = param?;
            if !family.param_box().contains(&param) {
                return Err(FlowError::DomainEscape {
                    iterate: param,
                    iterations: 0,
                });
            }
            let residual = inf_norm(&anchor_residuals(family, a, &param)?);
            return Ok(Inversion {
                param,
                residual,
                iterations: 0,
                analytic: true,
            });
        }
    }
    let guess = match initial_guess {
        Some(w) => {
            check_param(family, w)?;
            w.to_vec()
        }
        None => family.initial_guess(a),
    };
    let outcome = newton::solve(
        |w: &[f64]| anchor_residuals(family, a, w),
        guess,
        a.value_scale(),
        &family.param_box(),
        settings,
    )?;
    Ok(Inversion {
        param: outcome.solution,
        residual: outcome.residual,
        iterations: outcome.iterations,
        analytic: false,
    })
}

/// Result of applying a flow to one restriction.
#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub worldline: Worldline,
    pub residual: f64,
    pub iterations: usize,
    pub analytic: bool,
}

/// The flow `a -> omega(omega_beta^{-1}(a))` of a family.
#[derive(Clone)]
pub struct FlowMap {
    family: Arc<dyn Family>,
    settings: NewtonSettings,
    method: InversionMethod,
}

impl FlowMap {
    pub fn new(family: Arc<dyn Family>) -> Self {
        FlowMap {
            family,
            settings: NewtonSettings::default(),
            method: InversionMethod::Auto,
        }
    }

    pub fn with_settings(mut self, settings: NewtonSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_method(mut self, method: InversionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn family(&self) -> &Arc<dyn Family> {
        &self.family
    }

    pub fn settings(&self) -> &NewtonSettings {
        &self.settings
    }

    /// The worldline through `a`.
    pub fn flow(&self, a: &Restriction) -> Result<FlowOutcome> {
        self.flow_from(a, None)
    }

    /// As [`FlowMap::flow`], with an explicit Newton starting point.
    pub fn flow_from(&self, a: &Restriction, guess: Option<&[f64]>) -> Result<FlowOutcome> {
        let inv = invert_omega_beta(self.family.as_ref(), a, guess, &self.settings, self.method)?;
        Ok(FlowOutcome {
            worldline: Worldline::from_parts(Arc::clone(&self.family), inv.param),
            residual: inv.residual,
            iterations: inv.iterations,
            analytic: inv.analytic,
        })
    }

    /// Value at `t` of the worldline through `a`.
    pub fn apply(&self, a: &Restriction, t: f64) -> Result<Vec<f64>> {
        self.family.interval().check(t)?;
        self.flow(a)?.worldline.eval(t)
    }
}

/// Value at `t` of the worldline through `a`.
pub fn flow_apply(flow: &FlowMap, a: &Restriction, t: f64) -> Result<Vec<f64>> {
    flow.apply(a, t)
}
