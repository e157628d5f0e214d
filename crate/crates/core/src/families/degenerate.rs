//! `G(t, w) = w0`: a `k = 2` family that ignores its second parameter.
//! Every two-point projection is singular, so it is never frontal.

use std::sync::Arc;

use crate::embedding::{Family, ParamBox};
use crate::error::Result;
use crate::flow::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DegenerateFamily;

impl DegenerateFamily {
    pub fn into_family(self) -> Arc<dyn Family> {
        Arc::new(self)
    }
}

impl Family for DegenerateFamily {
    fn id(&self) -> String {
        "degenerate(k=2,n=1)".to_string()
    }

    fn k(&self) -> usize {
        2
    }

    fn n(&self) -> usize {
        1
    }

    fn interval(&self) -> Interval {
        Interval::real_line()
    }

    fn param_box(&self) -> ParamBox {
        ParamBox::unbounded(2)
    }

    fn evaluate(&self, _t: f64, w: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![w[0]])
    }

    fn time_derivative(&self, _t: f64, w: &[f64], order: usize) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![if order == 0 { w[0] } else { 0.0 }]))
    }
}
