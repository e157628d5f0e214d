//! Two-point (Dirichlet) data for a `k = 2` family.
//!
//! `F(tau, alpha, beta, a, b)` is the value at `tau` of the worldline through
//! `(alpha, a)` and `(beta, b)`. It is computed as `G(tau, H(alpha, beta, a, b))`
//! where `H` inverts the two-point projection of the family.

use crate::embedding::FlowMap;
use crate::error::{FlowError, Result};
use crate::flow::Restriction;

fn two_point(flow: &FlowMap, alpha: f64, beta: f64, a: &[f64], b: &[f64]) -> Result<Restriction> {
    let family = flow.family();
    if family.k() != 2 {
        return Err(FlowError::validation(format!(
            "two-point problems need a k = 2 family, {} has k = {}",
            family.id(),
            family.k()
        )));
    }
    if alpha == beta {
        return Err(FlowError::validation("nodes not distinct: alpha equals beta"));
    }
    let interval = family.interval();
    interval.check(alpha)?;
    interval.check(beta)?;
    Restriction::new(vec![(alpha, a.to_vec()), (beta, b.to_vec())])
}

/// Value at `tau` of the worldline through `(alpha, a)` and `(beta, b)`.
#[allow(non_snake_case)]
pub fn chladek_F(flow: &FlowMap, tau: f64, alpha: f64, beta: f64, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    flow.apply(&two_point(flow, alpha, beta, a, b)?, tau)
}

/// Boundary data `(alpha, beta, a, b)` together with the flow that solves it.
#[derive(Clone)]
pub struct ChladekProblem {
    flow: FlowMap,
    alpha: f64,
    beta: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    data: Restriction,
}

impl std::fmt::Debug for ChladekProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChladekProblem")
            .field("family", &self.flow.family().id())
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl ChladekProblem {
    pub fn new(flow: FlowMap, alpha: f64, beta: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let data = two_point(&flow, alpha, beta, &a, &b)?;
        Ok(ChladekProblem {
            flow,
            alpha,
            beta,
            a,
            b,
            data,
        })
    }

    /// `H(alpha, beta, a, b)`: the parameter of the solving worldline.
    pub fn parameter(&self) -> Result<Vec<f64>> {
        Ok(self.flow.flow(&self.data)?.worldline.param().to_vec())
    }

    /// `F(tau, alpha, beta, a, b)`.
    pub fn solve(&self, tau: f64) -> Result<Vec<f64>> {
        self.flow.apply(&self.data, tau)
    }

    /// `|F(tau, alpha, beta, a, b) - F(tau, gamma, delta, F(gamma, ..), F(delta, ..))|`.
    pub fn consistency(&self, gamma: f64, delta: f64, tau: f64) -> Result<f64> {
        let worldline = self.flow.flow(&self.data)?.worldline;
        let at_gamma = worldline.eval(gamma)?;
        let at_delta = worldline.eval(delta)?;
        let direct = worldline.eval(tau)?;
        let reanchored = chladek_F(&self.flow, tau, gamma, delta, &at_gamma, &at_delta)?;
        Ok(max_abs_diff(&direct, &reanchored))
    }

    /// Worst of `|F(alpha, ..) - a|` and `|F(beta, ..) - b|`.
    pub fn boundary_residual(&self) -> Result<f64> {
        let worldline = self.flow.flow(&self.data)?.worldline;
        Ok(max_abs_diff(&worldline.eval(self.alpha)?, &self.a)
            .max(max_abs_diff(&worldline.eval(self.beta)?, &self.b)))
    }

    /// The same problem with the ordered pair swapped.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.flow.clone(), self.beta, self.alpha, self.b.clone(), self.a.clone())
    }
}

/// `F(tau, alpha, beta, a, b)` for a prepared problem.
pub fn chladek_solve(problem: &ChladekProblem, tau: f64) -> Result<Vec<f64>> {
    problem.solve(tau)
}

pub fn chladek_consistency(problem: &ChladekProblem, gamma: f64, delta: f64, tau: f64) -> Result<f64> {
    problem.consistency(gamma, delta, tau)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
