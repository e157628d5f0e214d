//! The four subcommands.

use std::sync::Arc;

use num::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use flowline::families::polynomial::{rational, rational_to_f64};
use flowline::families::{
    exact_flow_residuals, lagrange_summation_identity, lagrange_summation_identity_exact, sincov_check,
    translation_check, Arithmetic, ChladekProblem, ExactRestriction, Point, SincovSample, SincovSystem,
    TranslationSample,
};
use flowline::flow::{scaled_residual, IntersectionVerdict, DEFAULT_AXIOM_TOLERANCE};
use flowline::frontal::{DerivativeSource, DEFAULT_CERTIFICATE_THRESHOLD};
use flowline::{
    intersection_count, lemma_jacobian, localize_chart, omega, omega_beta, verify_flow_axioms, ChartRequest, Family,
    FlowMap, Interval, JacobianOptions, Restriction, TimeSet,
};

use crate::config::{Built, Kind, RunConfig};
use crate::report::{samples_csv, Law, Report};
use crate::CliError;

/// Tolerance for the closed-form `k = 1` laws.
const SINCOV_TOLERANCE: f64 = 1e-12;
/// Tolerance for the harmonic sine-quotient identity.
const GONIOMETRIC_TOLERANCE: f64 = 1e-10;
/// Tolerance for laws checked through the ODE integrator.
const ODE_TOLERANCE: f64 = 1e-6;
/// Grid size for sampled intersection counts.
const INTERSECTION_GRID: usize = 401;

pub struct Outcome {
    pub report: Report,
    /// Sample CSV written by `solve`.
    pub samples: Option<String>,
    /// Nonzero when the run completed but a check failed.
    pub exit_code: u8,
}

pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub tolerance: Option<f64>,
}

impl Context {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn build(&self) -> Result<Built, CliError> {
        Ok(self.config.family.build(&self.config.solver)?)
    }

    fn flow(&self, family: &Arc<dyn Family>) -> FlowMap {
        FlowMap::new(Arc::clone(family))
            .with_settings(self.config.solver.newton())
            .with_method(self.config.solver.method)
    }
}

fn worldlines(built: Built, command: &str) -> Result<(Arc<dyn Family>, Kind), CliError> {
    match built {
        Built::Worldlines(family, kind) => Ok((family, kind)),
        Built::Sincov(_) => Err(CliError::validation(format!(
            "{command} needs a worldline family, not a sincov system"
        ))),
    }
}

pub fn solve(ctx: &Context) -> Result<Outcome, CliError> {
    let task = ctx
        .config
        .task
        .solve
        .clone()
        .ok_or_else(|| CliError::validation("config has no task.solve section"))?;
    let (family, _) = worldlines(ctx.build()?, "solve")?;
    let a = Restriction::new(task.restriction.into_iter().map(|(t, v)| (t, v.into_vec())).collect())?;
    let mut flow = ctx.flow(&family);
    if let Some(tol) = ctx.tolerance {
        let mut settings = *flow.settings();
        settings.tolerance = tol;
        flow = flow.with_settings(settings);
    }
    let outcome = flow.flow(&a)?;
    let grid = match &ctx.config.output.grid {
        Some(g) => g.points()?,
        None => a.times().to_vec(),
    };
    let rows = grid
        .iter()
        .map(|&t| Ok((t, outcome.worldline.eval(t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let anchors = a
        .entries()
        .map(|(t, v)| {
            let x = outcome.worldline.eval(t)?;
            Ok(json!({"t": t, "residual": max_diff(&x, v)}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut report = Report::new("solve");
    report.fact("family", family.id());
    report.fact("parameter", outcome.worldline.param());
    report.fact("residual", outcome.residual);
    report.fact("iterations", outcome.iterations);
    report.fact("analytic", outcome.analytic);
    report.fact("anchors", anchors);
    report.fact("grid_points", rows.len());
    Ok(Outcome {
        report,
        samples: Some(samples_csv(&rows, family.n())),
        exit_code: 0,
    })
}

pub fn verify(ctx: &Context) -> Result<Outcome, CliError> {
    let task = ctx.config.task.verify.unwrap_or_default();
    let mut report = Report::new("verify");
    report.fact("seed", ctx.seed);
    report.fact("samples", task.samples);
    let tol = ctx.tolerance.or(task.tolerance);
    let mut rng = ctx.rng();
    match ctx.build()? {
        Built::Sincov(system) => {
            report.fact("family", system.name());
            sincov_laws(&system, task.samples, tol, &mut rng, &mut report)?;
        }
        Built::Worldlines(family, kind) => {
            report.fact("family", family.id());
            let flow = ctx.flow(&family);
            flow_laws(&flow, &kind, task.samples, tol, &mut rng, &mut report);
            if matches!(kind, Kind::Polynomial(_) | Kind::Harmonic(_)) {
                intersection_law(&family, task.samples, &mut rng, &mut report);
            }
            identity_laws(&flow, &kind, task.samples, tol, &mut rng, &mut report);
        }
    }
    finish(report)
}

pub fn identities(ctx: &Context) -> Result<Outcome, CliError> {
    let task = ctx.config.task.identities.unwrap_or_default();
    let mut report = Report::new("identities");
    report.fact("seed", ctx.seed);
    report.fact("samples", task.samples);
    let tol = ctx.tolerance.or(task.tolerance);
    let mut rng = ctx.rng();
    match ctx.build()? {
        Built::Sincov(system) => {
            report.fact("family", system.name());
            sincov_laws(&system, task.samples, tol, &mut rng, &mut report)?;
        }
        Built::Worldlines(family, kind) => {
            report.fact("family", family.id());
            identity_laws(&ctx.flow(&family), &kind, task.samples, tol, &mut rng, &mut report);
        }
    }
    if report.laws().is_empty() {
        return Err(CliError::validation("this family has no closed-form identities to check"));
    }
    finish(report)
}

fn finish(report: Report) -> Result<Outcome, CliError> {
    let exit_code = if report.all_passed() { 0 } else { 3 };
    Ok(Outcome {
        report,
        samples: None,
        exit_code,
    })
}

pub fn frontal(ctx: &Context) -> Result<Outcome, CliError> {
    let task = ctx
        .config
        .task
        .frontal
        .clone()
        .ok_or_else(|| CliError::validation("config has no task.frontal section"))?;
    let (family, kind) = worldlines(ctx.build()?, "frontal")?;
    let options = JacobianOptions {
        derivatives: DerivativeSource::Auto,
        difference_step: None,
        threshold: ctx
            .tolerance
            .or(task.threshold)
            .unwrap_or(DEFAULT_CERTIFICATE_THRESHOLD),
    };
    let jac = lemma_jacobian(family.as_ref(), task.t0, &task.w0, &options)?;
    let mut report = Report::new("frontal");
    report.fact("family", family.id());
    report.fact("t0", task.t0);
    report.fact("w0", &task.w0);
    report.fact("jacobian", &jac.matrix);
    report.fact("determinant", jac.determinant);
    report.fact("threshold", jac.threshold);
    report.fact("certificate", if jac.certified { "granted" } else { "refused" });
    let mut exit_code = if jac.certified { 0 } else { 4 };

    if let Some(chart) = &task.chart {
        let Kind::Ode(ode) = &kind else {
            return Err(CliError::validation("chart localization needs an ode family"));
        };
        let mut request = ChartRequest::new(chart.time_half_width, chart.param_half_widths.clone());
        request.step = ctx.config.solver.step;
        request.seed = ctx.seed;
        request.newton = ctx.config.solver.newton();
        if let Some(v) = chart.min_time_half_width {
            request.min_time_half_width = v;
        }
        if let Some(v) = chart.condition_cap {
            request.condition_cap = v;
        }
        if let Some(v) = chart.beta_draws {
            request.beta_draws = v;
        }
        report.fact("requested_time_half_width", chart.time_half_width);
        match localize_chart(ode.rhs(), task.t0, &task.w0, &request) {
            Ok(search) => {
                report.fact("chart_interval", search.chart.interval);
                report.fact("chart_param_box", &search.chart.param_box);
                report.fact("chart_bisections", search.bisections);
                report.fact("chart_rejections", &search.rejections);
            }
            Err(err) => {
                report.fact("chart_error", err.to_string());
                exit_code = 4;
            }
        }
    }
    Ok(Outcome {
        report,
        samples: None,
        exit_code,
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A bounded window inside `interval` to draw sample times from.
fn window(interval: &Interval) -> (f64, f64) {
    match (interval.lower.is_finite(), interval.upper.is_finite()) {
        (true, true) => {
            let margin = 0.05 * interval.length();
            (interval.lower + margin, interval.upper - margin)
        }
        (true, false) => (interval.lower + 0.1, interval.lower + 2.1),
        (false, true) => (interval.upper - 2.1, interval.upper - 0.1),
        (false, false) => (-1.0, 1.0),
    }
}

/// `k` increasing times, one in the middle of each of `k` equal bins.
fn jittered(rng: &mut ChaCha8Rng, k: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    let width = (hi - lo) / k as f64;
    (0..k)
        .map(|i| lo + (i as f64 + 0.2 + 0.6 * rng.gen::<f64>()) * width)
        .collect()
}

fn draw_param(rng: &mut ChaCha8Rng, family: &dyn Family) -> Vec<f64> {
    let bounds = family.param_box();
    let center = bounds.center();
    center
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
            let half = if lo.is_finite() && hi.is_finite() {
                0.4 * (hi - lo)
            } else {
                1.0
            };
            c + half * rng.gen_range(-1.0..1.0)
        })
        .collect()
}

fn default_tolerance(kind: &Kind) -> f64 {
    match kind {
        Kind::Ode(_) => ODE_TOLERANCE,
        Kind::Polynomial(p) if p.arithmetic() == Arithmetic::Exact => 0.0,
        _ => DEFAULT_AXIOM_TOLERANCE,
    }
}

/// Exact rationals `j / 16` inside the window.
fn rational_nodes(rng: &mut ChaCha8Rng, k: usize, (lo, hi): (f64, f64)) -> Vec<BigRational> {
    let (lo, hi) = (lo.max(-2.0), hi.min(2.0));
    let first = (lo * 16.0).ceil() as i64;
    let last = (hi * 16.0).floor() as i64;
    let count = (last - first + 1).max(0) as usize;
    let k = k.min(count);
    let mut picks: Vec<i64> = sample(rng, count, k).into_iter().map(|i| first + i as i64).collect();
    picks.sort();
    picks.into_iter().map(|j| rational(j, 16)).collect()
}

fn rational_value(rng: &mut ChaCha8Rng) -> BigRational {
    rational(rng.gen_range(-50..=50), rng.gen_range(1..=9))
}

fn flow_laws(
    flow: &FlowMap,
    kind: &Kind,
    samples: usize,
    tol: Option<f64>,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) {
    let family = flow.family();
    let tolerance = tol.unwrap_or_else(|| default_tolerance(kind));
    let (k, n) = (family.k(), family.n());
    let win = window(&family.interval());
    let mut consistency = Law::new("flow.consistency", tolerance);
    let mut restriction = Law::new("flow.restriction", tolerance);

    if let Kind::Polynomial(p) = kind {
        if p.arithmetic() == Arithmetic::Exact {
            for i in 0..samples {
                let times = rational_nodes(rng, k, win);
                let beta = rational_nodes(rng, k, win);
                let t = rational_nodes(rng, 1, win).remove(0);
                let entries = times
                    .into_iter()
                    .map(|t| (t, (0..n).map(|_| rational_value(rng)).collect()))
                    .collect();
                match ExactRestriction::new(entries).and_then(|a| exact_flow_residuals(&a, &beta, &t)) {
                    Ok((c, r)) => {
                        consistency.record(rational_to_f64(&c));
                        restriction.record(rational_to_f64(&r));
                    }
                    Err(e) => {
                        consistency.fail(i, &e);
                        restriction.fail(i, &e);
                    }
                }
            }
            report.law(consistency);
            report.law(restriction);
            return;
        }
    }

    for i in 0..samples {
        let w = draw_param(rng, family.as_ref());
        let drawn = TimeSet::new(jittered(rng, k, win))
            .and_then(|b0| omega_beta(family, &w, &b0))
            .and_then(|a| Ok((a, TimeSet::new(jittered(rng, k, win))?)));
        let t = rng.gen_range(win.0..win.1);
        let (a, beta) = match drawn {
            Ok(v) => v,
            Err(e) => {
                consistency.fail(i, &e);
                restriction.fail(i, &e);
                continue;
            }
        };
        let r = verify_flow_axioms(flow, &[a], &[beta], &[t], tolerance);
        if let Some(f) = r.failures.first() {
            consistency.fail(i, &f.message);
            restriction.fail(i, &f.message);
        } else {
            consistency.record(r.max_residual_consistency);
            restriction.record(r.max_residual_restriction);
        }
    }
    report.law(consistency);
    report.law(restriction);
}

/// Distinct worldlines meet fewer than `k` times.
fn intersection_law(family: &Arc<dyn Family>, samples: usize, rng: &mut ChaCha8Rng, report: &mut Report) {
    let k = family.k();
    let (lo, hi) = window(&family.interval());
    let grid: Vec<f64> = (0..INTERSECTION_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (INTERSECTION_GRID - 1) as f64)
        .collect();
    let mut law = Law::new("flow.limited_intersection", (k - 1) as f64);
    for i in 0..samples {
        let (w1, w2) = (draw_param(rng, family.as_ref()), draw_param(rng, family.as_ref()));
        let counted = omega(family, &w1)
            .and_then(|x1| Ok((x1, omega(family, &w2)?)))
            .and_then(|(x1, x2)| intersection_count(&x1, &x2, &grid));
        match counted {
            Ok(r) => match (r.verdict, r.count) {
                (IntersectionVerdict::Equal, _) => law.record(0.0),
                (_, flowline::IntersectionCount::Finite(c)) => law.record(c as f64),
                (_, flowline::IntersectionCount::All) => law.fail(i, "distinct parameters, same worldline"),
            },
            Err(e) => law.fail(i, e),
        }
    }
    report.law(law);
}

fn identity_laws(
    flow: &FlowMap,
    kind: &Kind,
    samples: usize,
    tol: Option<f64>,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) {
    let family = flow.family();
    let win = window(&family.interval());
    match kind {
        Kind::Polynomial(p) => {
            let exact = p.arithmetic() == Arithmetic::Exact;
            let mut law = Law::new(
                "lagrange.summation",
                tol.unwrap_or(if exact { 0.0 } else { DEFAULT_AXIOM_TOLERANCE }),
            );
            let (k, n) = (family.k(), family.n());
            for i in 0..samples {
                let residual = if exact {
                    let entries = rational_nodes(rng, k, win)
                        .into_iter()
                        .map(|t| (t, (0..n).map(|_| rational_value(rng)).collect()))
                        .collect();
                    let beta = rational_nodes(rng, k, win);
                    let t = rational_nodes(rng, 1, win).remove(0);
                    ExactRestriction::new(entries)
                        .and_then(|a| lagrange_summation_identity_exact(&a, &beta, &t))
                        .map(|r| rational_to_f64(&r))
                } else {
                    let entries: Vec<(f64, Vec<f64>)> = jittered(rng, k, win)
                        .into_iter()
                        .map(|t| (t, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()))
                        .collect();
                    let beta = jittered(rng, k, win);
                    let t = rng.gen_range(win.0..win.1);
                    Restriction::new(entries).and_then(|a| {
                        let scale = a.value_scale();
                        lagrange_summation_identity(&a, &TimeSet::new(beta)?, t).map(|r| scaled_residual(r, scale))
                    })
                };
                match residual {
                    Ok(r) => law.record(r),
                    Err(e) => law.fail(i, e),
                }
            }
            report.law(law);
        }
        Kind::Harmonic(h) => {
            let mut law = Law::new("harmonic.goniometric", tol.unwrap_or(GONIOMETRIC_TOLERANCE));
            for i in 0..samples {
                let times = jittered(rng, 2, win);
                let values: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let beta = jittered(rng, 2, win);
                let t = rng.gen_range(win.0..win.1);
                let residual = Restriction::scalar(&[(times[0], values[0]), (times[1], values[1])])
                    .and_then(|a| h.goniometric_identity(&a, &TimeSet::new(beta)?, t));
                match residual {
                    Ok(r) => law.record(r.abs()),
                    Err(e) => law.fail(i, e),
                }
            }
            report.law(law);
        }
        _ => {}
    }
    if family.k() == 2 && family.n() == 1 {
        chladek_laws(flow, kind, samples, tol, rng, report);
    }
}

fn chladek_laws(
    flow: &FlowMap,
    kind: &Kind,
    samples: usize,
    tol: Option<f64>,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) {
    let family = flow.family();
    let tolerance = tol.unwrap_or(match kind {
        Kind::Ode(_) => ODE_TOLERANCE,
        _ => DEFAULT_AXIOM_TOLERANCE,
    });
    let win = window(&family.interval());
    let mut consistency = Law::new("chladek.consistency", tolerance);
    let mut boundary = Law::new("chladek.boundary", tolerance);
    for i in 0..samples {
        let w = draw_param(rng, family.as_ref());
        let mut ends = jittered(rng, 2, win);
        if rng.gen::<bool>() {
            ends.swap(0, 1);
        }
        let others = jittered(rng, 2, win);
        let tau = rng.gen_range(win.0..win.1);
        let outcome = (|| {
            let x = omega(family, &w)?;
            let problem = ChladekProblem::new(flow.clone(), ends[0], ends[1], x.eval(ends[0])?, x.eval(ends[1])?)?;
            Ok::<_, flowline::FlowError>((
                problem.consistency(others[0], others[1], tau)?,
                problem.boundary_residual()?,
            ))
        })();
        match outcome {
            Ok((c, b)) => {
                consistency.record(c);
                boundary.record(b);
            }
            Err(e) => {
                consistency.fail(i, &e);
                boundary.fail(i, &e);
            }
        }
    }
    report.law(consistency);
    report.law(boundary);
}

fn dyadic(rng: &mut ChaCha8Rng, half_range: i64) -> f64 {
    rng.gen_range(-half_range..=half_range) as f64 / 64.0
}

fn sincov_laws(
    system: &SincovSystem,
    samples: usize,
    tol: Option<f64>,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) -> Result<(), CliError> {
    let tolerance = tol.unwrap_or(SINCOV_TOLERANCE);
    let draws: Vec<SincovSample> = (0..samples)
        .map(|_| match system {
            SincovSystem::Finite(sys) => {
                let times = sys.times();
                let mut pick = || times[rng.gen_range(0..times.len())];
                let (t, r, s) = (pick(), pick(), pick());
                SincovSample {
                    t,
                    r,
                    s,
                    m: Point::Label(rng.gen_range(0..sys.size())),
                }
            }
            SincovSystem::Real(sys) => SincovSample {
                t: dyadic(rng, 128),
                r: dyadic(rng, 128),
                s: dyadic(rng, 128),
                m: Point::Real((0..sys.dim()).map(|_| dyadic(rng, 256)).collect()),
            },
        })
        .collect();
    let r = sincov_check(system, &draws, tolerance);
    for law in Law::pair_from(["sincov.composition", "sincov.identity"], &r) {
        report.law(law);
    }
    if let SincovSystem::Real(sys) = system {
        if sys.is_autonomous() {
            let draws: Vec<TranslationSample> = (0..samples)
                .map(|_| TranslationSample {
                    r: dyadic(rng, 128),
                    s: dyadic(rng, 128),
                    m: (0..sys.dim()).map(|_| dyadic(rng, 256)).collect(),
                })
                .collect();
            let r = translation_check(system, &draws, tolerance)?;
            for law in Law::pair_from(["translation.composition", "translation.identity"], &r) {
                report.law(law);
            }
        }
    }
    Ok(())
}
