//! Solutions of `x'' = -x` on an interval no longer than `pi`:
//! `G(t, w) = w0 cos t + w1 sin t`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::embedding::{Family, ParamBox};
use crate::error::{FlowError, Result};
use crate::flow::{Interval, Restriction, TimeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFamily {
    interval: Interval,
}

impl Default for HarmonicFamily {
    fn default() -> Self {
        HarmonicFamily {
            interval: Interval {
                lower: -FRAC_PI_2,
                upper: FRAC_PI_2,
            },
        }
    }
}

impl HarmonicFamily {
    /// Longer intervals let two solutions meet twice.
    pub fn new(interval: Interval) -> Result<Self> {
        if !interval.is_bounded() || interval.length() > PI {
            return Err(FlowError::validation(format!(
                "harmonic family needs an interval of length at most pi, got {interval}"
            )));
        }
        Ok(HarmonicFamily { interval })
    }

    pub fn into_family(self) -> Arc<dyn Family> {
        Arc::new(self)
    }

    fn check_nodes(&self, a: &Restriction) -> Result<()> {
        if a.k() != 2 || a.n() != 1 {
            return Err(FlowError::validation(
                "harmonic data needs two scalar samples",
            ));
        }
        a.time_set().check_inside(&self.interval)?;
        check_gap(a.times()[0], a.times()[1])
    }

    /// `(w0, w1)` of the worldline through two samples.
    pub fn harmonic_flow(&self, a: &Restriction) -> Result<[f64; 2]> {
        self.check_nodes(a)?;
        let (t1, t2) = (a.times()[0], a.times()[1]);
        let (x1, x2) = (a.values()[0][0], a.values()[1][0]);
        let det = (t2 - t1).sin();
        Ok([
            (x1 * t2.sin() - x2 * t1.sin()) / det,
            (x2 * t1.cos() - x1 * t2.cos()) / det,
        ])
    }

    /// Residual of the goniometric identity: the sine-quotient flow
    /// re-anchored at `beta`, minus the flow through `a`, at `t`.
    pub fn goniometric_identity(&self, a: &Restriction, beta: &TimeSet, t: f64) -> Result<f64> {
        self.check_nodes(a)?;
        if beta.k() != 2 {
            return Err(FlowError::validation("beta must have two points"));
        }
        beta.check_inside(&self.interval)?;
        check_gap(beta.points()[0], beta.points()[1])?;
        self.interval.check(t)?;
        let nodes = [a.times()[0], a.times()[1]];
        let data = [a.values()[0][0], a.values()[1][0]];
        let (r0, r1) = (beta.points()[0], beta.points()[1]);
        let resampled = [
            sine_quotient(nodes, data, r0),
            sine_quotient(nodes, data, r1),
        ];
        Ok(sine_quotient([r0, r1], resampled, t) - sine_quotient(nodes, data, t))
    }
}

fn check_gap(t1: f64, t2: f64) -> Result<()> {
    let gap = (t2 - t1).abs();
    if gap == 0.0 || gap >= PI {
        return Err(FlowError::validation(format!(
            "harmonic nodes {t1} and {t2} must differ by less than pi"
        )));
    }
    Ok(())
}

/// `sum over ordered pairs (i, j) of a_i sin(t - j) / sin(i - j)`.
pub fn sine_quotient(nodes: [f64; 2], values: [f64; 2], t: f64) -> f64 {
    let [i, j] = nodes;
    let [ai, aj] = values;
    ai * (t - j).sin() / (i - j).sin() + aj * (t - i).sin() / (j - i).sin()
}

/// Free-function form of [`HarmonicFamily::harmonic_flow`] on the default interval.
pub fn harmonic_flow(a: &Restriction) -> Result<[f64; 2]> {
    HarmonicFamily::default().harmonic_flow(a)
}

/// Free-function form of [`HarmonicFamily::goniometric_identity`] on the default interval.
pub fn goniometric_identity(a: &Restriction, beta: &TimeSet, t: f64) -> Result<f64> {
    HarmonicFamily::default().goniometric_identity(a, beta, t)
}

impl Family for HarmonicFamily {
    fn id(&self) -> String {
        format!("harmonic(I={})", self.interval)
    }

    fn k(&self) -> usize {
        2
    }

    fn n(&self) -> usize {
        1
    }

    fn interval(&self) -> Interval {
        self.interval
    }

    fn param_box(&self) -> ParamBox {
        ParamBox::unbounded(2)
    }

    fn evaluate(&self, t: f64, w: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![w[0] * t.cos() + w[1] * t.sin()])
    }

    fn analytic_invert(&self, a: &Restriction) -> Option<Result<Vec<f64>>> {
        Some(self.harmonic_flow(a).map(Vec::from))
    }

    fn time_derivative(&self, t: f64, w: &[f64], order: usize) -> Option<Result<Vec<f64>>> {
        // d/dt rotates (cos, sin) by a quarter turn
        let (c, s) = match order % 4 {
            0 => (t.cos(), t.sin()),
            1 => (-t.sin(), t.cos()),
            2 => (-t.cos(), -t.sin()),
            _ => (t.sin(), -t.cos()),
        };
        Some(Ok(vec![w[0] * c + w[1] * s]))
    }
}
