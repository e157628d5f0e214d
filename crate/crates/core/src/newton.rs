//! Damped Newton iteration for square nonlinear systems with a
//! finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::ParamBox;
use crate::error::{FlowError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSettings {
    /// Relative residual target, scaled by `max(1, value scale)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step halvings tried before an iteration counts as stalled.
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tolerance: 1e-10,
            max_iterations: 100,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    /// Infinity norm of the residual at `solution`.
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| {
        if x.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(x.abs())
        }
    })
}

fn fd_step(x: f64) -> f64 {
    f64::EPSILON.sqrt() * x.abs().max(1.0)
}

/// Finite-difference Jacobian of `f` at `x`, where `fx = f(x)`.
pub fn jacobian<F>(f: &F, x: &[f64], fx: &[f64], central: bool) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let rows = fx.len();
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = fd_step(x[j]);
        probe[j] = x[j] + h;
        let forward = f(&probe)?;
        let column: Vec<f64> = if central {
            probe[j] = x[j] - h;
            let backward = f(&probe)?;
            forward
                .iter()
                .zip(&backward)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect()
        } else {
            forward.iter().zip(fx).map(|(p, c)| (p - c) / h).collect()
        };
        probe[j] = x[j];
        for (i, value) in column.into_iter().enumerate() {
            jac[(i, j)] = value;
        }
    }
    Ok(jac)
}

fn newton_step(jac: DMatrix<f64>, residual: &[f64]) -> Option<Vec<f64>> {
    let rhs = -DVector::from_column_slice(residual);
    let step = jac.lu().solve(&rhs)?;
    step.iter().all(|v| v.is_finite()).then(|| step.as_slice().to_vec())
}

enum Rejection {
    LeftBox,
    NoDecrease,
}

/// Solves `f(x) = 0` starting from `x0`, keeping iterates inside `bounds`.
///
/// Converged once the infinity norm of the residual is at most
/// `tolerance * max(1, scale)`. Steps are halved while the residual does not
/// decrease; a stalled iteration retries once with central differences.
pub fn solve<F>(
    f: F,
    x0: Vec<f64>,
    scale: f64,
    bounds: &ParamBox,
    settings: &NewtonSettings,
) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let target = settings.tolerance * scale.max(1.0);
    let mut x = if bounds.contains(&x0) {
        x0
    } else {
        bounds.pull_inside(&x0)
    };
    let mut fx = f(&x).map_err(|_| FlowError::InversionFailure {
        iterate: x.clone(),
        residual: f64::INFINITY,
        iterations: 0,
    })?;
    let mut norm = inf_norm(&fx);
    let mut central = false;

    for iteration in 0..settings.max_iterations {
        if norm <= target {
            return Ok(NewtonOutcome {
                solution: x,
                residual: norm,
                iterations: iteration,
            });
        }
        let failure = |x: &[f64]| FlowError::InversionFailure {
            iterate: x.to_vec(),
            residual: norm,
            iterations: iteration,
        };
        let Some(step) = jacobian(&f, &x, &fx, central)
            .ok()
            .and_then(|jac| newton_step(jac, &fx))
        else {
            if central {
                return Err(failure(&x));
            }
            central = true;
            continue;
        };

        let mut lambda = 1.0;
        let mut last_rejection = Rejection::NoDecrease;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + lambda * si).collect();
            lambda *= 0.5;
            if !bounds.contains(&trial) {
                last_rejection = Rejection::LeftBox;
                continue;
            }
            match f(&trial) {
                Ok(ft) if inf_norm(&ft) < norm => {
                    accepted = Some((trial, ft));
                    break;
                }
                _ => last_rejection = Rejection::NoDecrease,
            }
        }
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                norm = inf_norm(&ft);
                fx = ft;
            }
            None if !central => central = true,
            None => {
                return Err(match last_rejection {
                    Rejection::LeftBox => FlowError::DomainEscape {
                        iterate: x,
                        iterations: iteration,
                    },
                    Rejection::NoDecrease => failure(&x),
                })
            }
        }
    }
    if norm <= target {
        return Ok(NewtonOutcome {
            solution: x,
            residual: norm,
            iterations: settings.max_iterations,
        });
    }
    Err(FlowError::InversionFailure {
        iterate: x,
        residual: norm,
        iterations: settings.max_iterations,
    })
}
