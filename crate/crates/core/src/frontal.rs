//! Divided differences of a family in time and the Jacobian test for local
//! `k`-frontality.
//!
//! `K_i(t_1, .., t_i, w)` is the divided difference of `t -> G(t, w)` on the
//! nodes. For distinct nodes it has the closed form
//! `sum_j G(t_j, w) prod_{m != j} 1 / (t_j - t_m)`. The integral recursion
//!
//! ```text
//! K_{i+1}(t_1, t_2, ..) = int_0^1 dK_i/dt_1 (t_1 (1 - s) + t_2 s, t_3, ..) ds
//! ```
//!
//! also makes sense for repeated nodes, where it yields derivatives.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embedding::Family;
use crate::error::{FlowError, Result};
use crate::flow::DEFAULT_MIN_SEPARATION;

/// Default certificate threshold on `|J|`.
pub const DEFAULT_CERTIFICATE_THRESHOLD: f64 = 1e-6;

/// Default number of Gauss-Legendre nodes per recursion level.
pub const DEFAULT_QUADRATURE_NODES: usize = 16;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(FlowError::validation("quadrature needs at least one node"));
        }
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let nf = count as f64;
        for i in 0..count {
            // Newton on P_n from the usual cosine guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(count, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(count, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(0.5 * (1.0 - x));
            weights.push(0.5 * w);
        }
        Ok(GaussLegendre { nodes, weights })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Where time derivatives of `G` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeSource {
    /// The family's own derivatives where it has them, differences otherwise.
    #[default]
    Auto,
    /// Only the family's own derivatives; missing ones are an error.
    Analytic,
    /// Central differences of `G` always.
    Differences,
}

/// `d`-th time derivative of `G` at `(t, w)`.
///
/// Differences use the centered `d`-th difference with step
/// `eps^(1/(d+2)) max(1, |t|)` unless `step` overrides the base step.
pub fn time_derivative(
    family: &dyn Family,
    t: f64,
    w: &[f64],
    order: usize,
    source: DerivativeSource,
    step: Option<f64>,
) -> Result<Vec<f64>> {
    let wrap = |e: FlowError| FlowError::Capability(format!("derivative of order {order} at t = {t}: {e}"));
    if order == 0 {
        return family.evaluate(t, w).map_err(wrap);
    }
    if source != DerivativeSource::Differences {
        match family.time_derivative(t, w, order) {
            Some(value) => return value.map_err(wrap),
            None if source == DerivativeSource::Analytic => {
                return Err(FlowError::Capability(format!(
                    "{} has no derivative of order {order} and differences are disabled",
                    family.id()
                )))
            }
            None => {}
        }
    }
    let base = step.unwrap_or_else(|| f64::EPSILON.powf(1.0 / (order as f64 + 2.0)));
    let h = base * t.abs().max(1.0);
    let mut acc = vec![0.0; family.n()];
    let mut binom = 1.0;
    for i in 0..=order {
        let shift = (order as f64 / 2.0 - i as f64) * h;
        let value = family.evaluate(t + shift, w).map_err(wrap)?;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        for (a, v) in acc.iter_mut().zip(value) {
            *a += sign * binom * v;
        }
        binom = binom * (order - i) as f64 / (i + 1) as f64;
    }
    let scale = h.powi(order as i32);
    Ok(acc.into_iter().map(|a| a / scale).collect())
}

fn check_nodes(family: &dyn Family, nodes: &[f64], w: &[f64]) -> Result<()> {
    if nodes.is_empty() || nodes.len() > family.k() {
        return Err(FlowError::validation(format!(
            "divided differences of {} take 1 to {} nodes, got {}",
            family.id(),
            family.k(),
            nodes.len()
        )));
    }
    if w.len() != family.k() * family.n() {
        return Err(FlowError::validation(format!(
            "parameter has {} entries, expected {}",
            w.len(),
            family.k() * family.n()
        )));
    }
    let interval = family.interval();
    for &t in nodes {
        interval.check(t)?;
    }
    Ok(())
}

/// Closed-form divided difference on pairwise distinct nodes.
pub fn k_closed(family: &dyn Family, nodes: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_nodes(family, nodes, w)?;
    for (j, a) in nodes.iter().enumerate() {
        for b in &nodes[j + 1..] {
            if (a - b).abs() < DEFAULT_MIN_SEPARATION {
                return Err(FlowError::validation(format!(
                    "nodes not distinct: {a} and {b}; use the recursive form"
                )));
            }
        }
    }
    let mut acc = vec![0.0; family.n()];
    for (j, &tj) in nodes.iter().enumerate() {
        let denom: f64 = nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .map(|(_, &tm)| tj - tm)
            .product();
        let g = family.evaluate(tj, w)?;
        for (a, v) in acc.iter_mut().zip(g) {
            *a += v / denom;
        }
    }
    Ok(acc)
}

/// Quadrature and derivative settings for [`k_recursive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecursionOptions {
    pub quadrature_nodes: usize,
    /// Number of equal panels of `[0, 1]`, each with its own rule.
    pub panels: usize,
    pub derivatives: DerivativeSource,
    pub difference_step: Option<f64>,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        RecursionOptions {
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            panels: 1,
            derivatives: DerivativeSource::Auto,
            difference_step: None,
        }
    }
}

/// Divided difference by the integral recursion. Nodes may repeat.
pub fn k_recursive(family: &dyn Family, nodes: &[f64], w: &[f64], options: &RecursionOptions) -> Result<Vec<f64>> {
    check_nodes(family, nodes, w)?;
    if options.panels == 0 {
        return Err(FlowError::validation("quadrature needs at least one panel"));
    }
    let rule = GaussLegendre::new(options.quadrature_nodes)?;
    recurse(family, nodes, w, 0, options, &rule)
}

/// `d`-th derivative of `K_i` in its first node.
fn recurse(
    family: &dyn Family,
    nodes: &[f64],
    w: &[f64],
    d: usize,
    options: &RecursionOptions,
    rule: &GaussLegendre,
) -> Result<Vec<f64>> {
    if nodes.len() == 1 {
        return time_derivative(family, nodes[0], w, d, options.derivatives, options.difference_step);
    }
    let (t1, t2) = (nodes[0], nodes[1]);
    let mut inner = nodes[1..].to_vec();
    let mut acc = vec![0.0; family.n()];
    let width = 1.0 / options.panels as f64;
    for panel in 0..options.panels {
        let start = panel as f64 * width;
        for (x, weight) in rule.nodes.iter().zip(&rule.weights) {
            let s = start + width * x;
            inner[0] = t1 * (1.0 - s) + t2 * s;
            let value = recurse(family, &inner, w, d + 1, options, rule)?;
            let factor = width * weight * (1.0 - s).powi(d as i32);
            for (a, v) in acc.iter_mut().zip(value) {
                *a += factor * v;
            }
        }
    }
    Ok(acc)
}

/// Settings for [`lemma_jacobian`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JacobianOptions {
    pub derivatives: DerivativeSource,
    pub difference_step: Option<f64>,
    pub threshold: f64,
}

impl Default for JacobianOptions {
    fn default() -> Self {
        JacobianOptions {
            derivatives: DerivativeSource::Auto,
            difference_step: None,
            threshold: DEFAULT_CERTIFICATE_THRESHOLD,
        }
    }
}

/// Jacobian of `(t, w) -> (t, G, dG/dt, .., d^(k-1)G/dt^(k-1))` at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaJacobian {
    pub t0: f64,
    pub w0: Vec<f64>,
    /// Row-major `(1 + k n)`-square matrix.
    pub matrix: Vec<Vec<f64>>,
    pub determinant: f64,
    pub threshold: f64,
    /// `|determinant| > threshold`.
    pub certified: bool,
}

/// Stacked derivatives `(G, dG/dt, .., d^(k-1)G/dt^(k-1))` at `(t, w)`.
fn jet(family: &dyn Family, t: f64, w: &[f64], orders: usize, options: &JacobianOptions) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(orders * family.n());
    for d in 0..orders {
        out.extend(time_derivative(family, t, w, d, options.derivatives, options.difference_step)?);
    }
    Ok(out)
}

/// Determinant of the jet map's Jacobian at `(t0, w0)`. Parameter columns
/// use central differences with step `eps^(1/3) max(1, |w_j|)`; the time
/// column uses the derivatives one order up.
pub fn lemma_jacobian(family: &dyn Family, t0: f64, w0: &[f64], options: &JacobianOptions) -> Result<LemmaJacobian> {
    let (k, n) = (family.k(), family.n());
    let dim = k * n;
    if w0.len() != dim {
        return Err(FlowError::validation(format!("parameter has {} entries, expected {dim}", w0.len())));
    }
    family.interval().check(t0)?;
    if !family.param_box().contains(w0) {
        return Err(FlowError::ParameterOutsideBox { param: w0.to_vec() });
    }
    let size = 1 + dim;
    let mut m = DMatrix::<f64>::zeros(size, size);
    m[(0, 0)] = 1.0;
    for d in 0..k {
        let value = time_derivative(family, t0, w0, d + 1, options.derivatives, options.difference_step)?;
        for (j, v) in value.into_iter().enumerate() {
            m[(1 + d * n + j, 0)] = v;
        }
    }
    let step_base = f64::EPSILON.cbrt();
    let mut w = w0.to_vec();
    for col in 0..dim {
        let h = step_base * w0[col].abs().max(1.0);
        w[col] = w0[col] + h;
        let plus = jet(family, t0, &w, k, options)?;
        w[col] = w0[col] - h;
        let minus = jet(family, t0, &w, k, options)?;
        w[col] = w0[col];
        for (row, (p, q)) in plus.iter().zip(&minus).enumerate() {
            m[(1 + row, 1 + col)] = (p - q) / (2.0 * h);
        }
    }
    let determinant = m.clone().lu().determinant();
    let matrix = (0..size).map(|r| m.row(r).iter().copied().collect()).collect();
    Ok(LemmaJacobian {
        t0,
        w0: w0.to_vec(),
        matrix,
        determinant,
        threshold: options.threshold,
        certified: determinant.abs() > options.threshold,
    })
}
