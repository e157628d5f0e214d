//! Polynomials of degree below `k`: the Lagrange flow.
//!
//! Any `k` samples at distinct times determine exactly one such polynomial,
//! and two distinct ones meet at most `k - 1` times. Arithmetic is generic so
//! the same code runs on `f64` and on exact rationals.

use std::fmt;
use std::ops::Neg;
use std::sync::Arc;

use num::{BigInt, BigRational, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::embedding::{Family, ParamBox};
use crate::error::{FlowError, Result};
use crate::flow::{IntersectionCount, Interval, Restriction, TimeSet, Worldline};

/// Field operations needed by the interpolation routines.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Neg<Output = Self> + fmt::Debug {}

impl<T: Num + Signed + Clone + PartialOrd + Neg<Output = T> + fmt::Debug> Scalar for T {}

/// Dense polynomial, lowest coefficient first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficients padded with zeros to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<T> {
        let mut out = self.coeffs.clone();
        out.resize(len.max(out.len()), T::zero());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let mut factor = T::zero();
        let coeffs = self
            .coeffs
            .iter()
            .skip(1)
            .map(|c| {
                factor = factor.clone() + T::one();
                c.clone() * factor.clone()
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let (a, b) = (self.padded(len), other.padded(len));
        Polynomial::new(a.into_iter().zip(b).map(|(x, y)| x - y).collect())
    }

    fn scale(&self, factor: &T) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect())
    }

    /// Multiplies by `(t - root)`.
    fn mul_linear(&self, root: &T) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] = out[i + 1].clone() + c.clone();
            out[i] = out[i].clone() - c.clone() * root.clone();
        }
        Polynomial::new(out)
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![T::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem[rem.len() - 1].clone() / lead.clone();
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = rem[shift + i].clone() - factor.clone() * c.clone();
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Monic greatest common divisor. Meaningful over exact fields.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.leading().cloned() {
            Some(lead) => a.scale(&(T::one() / lead)),
            None => a,
        }
    }
}

/// Newton divided-difference coefficients of the interpolant through
/// `(times[i], values[i])`.
pub fn divided_differences<T: Scalar>(times: &[T], values: &[T]) -> Vec<T> {
    let mut table = values.to_vec();
    for level in 1..times.len() {
        for i in (level..times.len()).rev() {
            table[i] = (table[i].clone() - table[i - 1].clone())
                / (times[i].clone() - times[i - level].clone());
        }
    }
    table
}

/// The unique polynomial of degree below `times.len()` through the data,
/// expanded from its Newton form.
pub fn interpolating_polynomial<T: Scalar>(times: &[T], values: &[T]) -> Polynomial<T> {
    let dd = divided_differences(times, values);
    let mut poly = Polynomial::new(vec![dd[dd.len() - 1].clone()]);
    for i in (0..dd.len() - 1).rev() {
        let shifted = poly.mul_linear(&times[i]);
        let mut coeffs = shifted.padded(1);
        coeffs[0] = coeffs[0].clone() + dd[i].clone();
        poly = Polynomial::new(coeffs);
    }
    poly
}

/// Lagrange formula `sum_i v_i prod_{j != i} (t - t_j) / (t_i - t_j)`.
pub fn lagrange_value<T: Scalar>(times: &[T], values: &[T], t: &T) -> T {
    let mut sum = T::zero();
    for (i, (ti, vi)) in times.iter().zip(values).enumerate() {
        let mut term = vi.clone();
        for (j, tj) in times.iter().enumerate() {
            if i != j {
                term = term * (t.clone() - tj.clone()) / (ti.clone() - tj.clone());
            }
        }
        sum = sum + term;
    }
    sum
}

/// Left side minus right side of the Lagrange summation identity: the
/// interpolant through the data, resampled at `beta` and interpolated again,
/// evaluated at `t`, against the original interpolant at `t`.
pub fn summation_residual<T: Scalar>(times: &[T], values: &[T], beta: &[T], t: &T) -> T {
    let resampled: Vec<T> = beta.iter().map(|r| lagrange_value(times, values, r)).collect();
    lagrange_value(beta, &resampled, t) - lagrange_value(times, values, t)
}

/// Exact or floating arithmetic for the polynomial family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Float,
    Exact,
}

/// Polynomials of degree below `k` in each of `n` components.
///
/// The parameter holds `k` blocks of `n` coefficients: `w[i * n + j]` is the
/// coefficient of `t^i` in component `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFamily {
    k: usize,
    n: usize,
    interval: Interval,
    arithmetic: Arithmetic,
}

impl PolynomialFamily {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(FlowError::validation("polynomial family needs k >= 1 and n >= 1"));
        }
        Ok(PolynomialFamily {
            k,
            n,
            interval: Interval::real_line(),
            arithmetic: Arithmetic::Float,
        })
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    pub fn with_arithmetic(mut self, arithmetic: Arithmetic) -> Self {
        self.arithmetic = arithmetic;
        self
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn into_family(self) -> Arc<dyn Family> {
        Arc::new(self)
    }

    /// Component polynomials of the worldline with parameter `w`.
    pub fn components(&self, w: &[f64]) -> Vec<Polynomial<f64>> {
        (0..self.n)
            .map(|j| Polynomial::new((0..self.k).map(|i| w[i * self.n + j]).collect()))
            .collect()
    }

    fn exact_components(&self, w: &[f64]) -> Vec<Polynomial<BigRational>> {
        (0..self.n)
            .map(|j| {
                Polynomial::new(
                    (0..self.k)
                        .map(|i| rational_from_f64(w[i * self.n + j]))
                        .collect(),
                )
            })
            .collect()
    }
}

impl Family for PolynomialFamily {
    fn id(&self) -> String {
        let mode = match self.arithmetic {
            Arithmetic::Float => "float",
            Arithmetic::Exact => "exact",
        };
        format!("polynomial(k={},n={},{mode})", self.k, self.n)
    }

    fn k(&self) -> usize {
        self.k
    }

    fn n(&self) -> usize {
        self.n
    }

    fn interval(&self) -> Interval {
        self.interval
    }

    fn param_box(&self) -> ParamBox {
        ParamBox::unbounded(self.k * self.n)
    }

    fn evaluate(&self, t: f64, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.components(w).iter().map(|p| p.eval(&t)).collect())
    }

    fn analytic_invert(&self, a: &Restriction) -> Option<Result<Vec<f64>>> {
        let mut w = vec![0.0; self.k * self.n];
        for j in 0..self.n {
            let poly = interpolating_polynomial(a.times(), &a.component(j));
            for (i, c) in poly.padded(self.k).into_iter().enumerate().take(self.k) {
                w[i * self.n + j] = c;
            }
        }
        Some(Ok(w))
    }

    fn time_derivative(&self, t: f64, w: &[f64], order: usize) -> Option<Result<Vec<f64>>> {
        let values = self
            .components(w)
            .into_iter()
            .map(|mut p| {
                for _ in 0..order {
                    p = p.derivative();
                }
                p.eval(&t)
            })
            .collect();
        Some(Ok(values))
    }

    fn exact_intersections(&self, w1: &[f64], w2: &[f64]) -> Option<IntersectionCount> {
        if self.arithmetic != Arithmetic::Exact {
            return None;
        }
        let (p1, p2) = (self.exact_components(w1), self.exact_components(w2));
        // Common zeros of all component differences.
        let common = p1
            .iter()
            .zip(&p2)
            .map(|(a, b)| a.sub(b))
            .filter(|d| !d.is_zero())
            .reduce(|acc, d| acc.gcd(&d));
        Some(match common {
            None => IntersectionCount::All,
            Some(g) => IntersectionCount::Finite(
                count_real_roots_in(&g, &self.interval).expect("nonzero by construction"),
            ),
        })
    }
}

/// The worldline of degree below `a.k()` through `a`.
pub fn lagrange_flow(a: &Restriction) -> Result<Worldline> {
    let family = PolynomialFamily::new(a.k(), a.n())?.into_family();
    let w = family
        .analytic_invert(a)
        .expect("polynomial family inverts analytically")?;
    crate::embedding::omega(&family, &w)
}

/// Summation-identity residual (max over components) in floating point.
pub fn lagrange_summation_identity(a: &Restriction, beta: &TimeSet, t: f64) -> Result<f64> {
    if beta.k() != a.k() {
        return Err(FlowError::validation(format!(
            "beta has {} points, restriction has {}",
            beta.k(),
            a.k()
        )));
    }
    Ok((0..a.n())
        .map(|j| summation_residual(a.times(), &a.component(j), beta.points(), &t).abs())
        .fold(0.0, f64::max))
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite value")
}

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// A restriction with rational times and values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRestriction {
    times: Vec<BigRational>,
    values: Vec<Vec<BigRational>>,
}

impl ExactRestriction {
    pub fn new(mut entries: Vec<(BigRational, Vec<BigRational>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FlowError::validation("a restriction needs at least one entry"));
        }
        let n = entries[0].1.len();
        if n == 0 || entries.iter().any(|(_, v)| v.len() != n) {
            return Err(FlowError::validation("values must share a positive dimension"));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(FlowError::validation("nodes not distinct"));
        }
        let (times, values) = entries.into_iter().unzip();
        Ok(ExactRestriction { times, values })
    }

    /// Exact image of a floating restriction.
    pub fn from_restriction(a: &Restriction) -> Self {
        ExactRestriction {
            times: a.times().iter().map(|&t| rational_from_f64(t)).collect(),
            values: a
                .values()
                .iter()
                .map(|v| v.iter().map(|&x| rational_from_f64(x)).collect())
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.times.len()
    }

    pub fn n(&self) -> usize {
        self.values[0].len()
    }

    pub fn times(&self) -> &[BigRational] {
        &self.times
    }

    pub fn component(&self, j: usize) -> Vec<BigRational> {
        self.values.iter().map(|v| v[j].clone()).collect()
    }
}

fn check_distinct(points: &[BigRational]) -> Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(FlowError::validation("nodes not distinct"));
    }
    Ok(())
}

/// Component polynomials of the exact Lagrange flow through `a`.
pub fn lagrange_flow_exact(a: &ExactRestriction) -> Vec<Polynomial<BigRational>> {
    (0..a.n())
        .map(|j| interpolating_polynomial(a.times(), &a.component(j)))
        .collect()
}

/// Exact flow-law residuals `(consistency, restriction)` for one draw.
///
/// Consistency compares the flow re-anchored at `beta` with the original
/// flow at `t`; restriction compares the flow with `a` at its own times.
pub fn exact_flow_residuals(
    a: &ExactRestriction,
    beta: &[BigRational],
    t: &BigRational,
) -> Result<(BigRational, BigRational)> {
    if beta.len() != a.k() {
        return Err(FlowError::validation("beta must have k points"));
    }
    check_distinct(beta)?;
    let phi = lagrange_flow_exact(a);
    let mut consistency = BigRational::zero();
    let mut restriction = BigRational::zero();
    for (j, p) in phi.iter().enumerate() {
        let resampled: Vec<BigRational> = beta.iter().map(|r| p.eval(r)).collect();
        let reanchored = interpolating_polynomial(beta, &resampled);
        consistency = consistency.max((reanchored.eval(t) - p.eval(t)).abs());
        // Same polynomial, coefficient for coefficient.
        if reanchored != *p {
            consistency = consistency.max(BigRational::one());
        }
        for (ti, vi) in a.times().iter().zip(a.component(j)) {
            restriction = restriction.max((p.eval(ti) - vi).abs());
        }
    }
    Ok((consistency, restriction))
}

/// Exact summation-identity residual (max over components).
pub fn lagrange_summation_identity_exact(
    a: &ExactRestriction,
    beta: &[BigRational],
    t: &BigRational,
) -> Result<BigRational> {
    if beta.len() != a.k() {
        return Err(FlowError::validation("beta must have k points"));
    }
    check_distinct(beta)?;
    Ok((0..a.n())
        .map(|j| summation_residual(a.times(), &a.component(j), beta, t).abs())
        .fold(BigRational::zero(), |acc, r| acc.max(r)))
}

fn sign_of(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn sign_variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sturm_sequence(p: &Polynomial<BigRational>) -> Vec<Polynomial<BigRational>> {
    let dp = p.derivative();
    let g = p.gcd(&dp);
    let (square_free, _) = p.div_rem(&g);
    let mut seq = vec![square_free.clone(), square_free.derivative()];
    while !seq[seq.len() - 1].is_zero() {
        let (_, r) = seq[seq.len() - 2].div_rem(&seq[seq.len() - 1]);
        seq.push(Polynomial::new(r.coeffs().iter().map(|c| -c.clone()).collect()));
    }
    seq.pop();
    seq
}

fn variations_at(seq: &[Polynomial<BigRational>], x: f64) -> usize {
    if x.is_finite() {
        let x = rational_from_f64(x);
        sign_variations(seq.iter().map(|p| sign_of(&p.eval(&x))))
    } else {
        sign_variations(seq.iter().map(|p| {
            let lead = sign_of(p.leading().expect("nonzero in a Sturm sequence"));
            let odd = p.degree().unwrap_or(0) % 2 == 1;
            if x < 0.0 && odd {
                -lead
            } else {
                lead
            }
        }))
    }
}

/// Number of distinct real roots of `p` in the open interval, by Sturm's
/// theorem. `None` for the zero polynomial.
pub fn count_real_roots_in(p: &Polynomial<BigRational>, interval: &Interval) -> Option<usize> {
    if p.is_zero() {
        return None;
    }
    if p.degree() == Some(0) {
        return Some(0);
    }
    let seq = sturm_sequence(p);
    // Roots in (lower, upper].
    let mut count = variations_at(&seq, interval.lower) - variations_at(&seq, interval.upper);
    if interval.upper.is_finite() && p.eval(&rational_from_f64(interval.upper)).is_zero() {
        count -= 1;
    }
    Some(count)
}

pub fn count_real_roots(p: &Polynomial<BigRational>) -> Option<usize> {
    count_real_roots_in(p, &Interval::real_line())
}

/// Lossy view of an exact residual, for reports.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}
