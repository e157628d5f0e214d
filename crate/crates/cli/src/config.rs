//! Run configuration: which family, how to solve, what to do, where to write.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use flowline::families::{
    Arithmetic, DegenerateFamily, FiniteSystem, HarmonicFamily, PolynomialFamily, RealSystem, SincovSystem,
};
use flowline::{
    Family, FlowError, InversionMethod, Interval, LocalChart, NewtonSettings, OdeFamily, OdeRhs, ParamBox,
};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub task: TaskSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

/// Interval ends; `null` stands for an infinite end.
pub type IntervalSpec = (Option<f64>, Option<f64>);

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    Polynomial {
        k: usize,
        #[serde(default = "one")]
        n: usize,
        #[serde(default)]
        arithmetic: ArithmeticSpec,
        interval: Option<IntervalSpec>,
    },
    Harmonic {
        interval: Option<IntervalSpec>,
    },
    Ode {
        rhs: String,
        #[serde(default)]
        constants: Vec<f64>,
        order: Option<usize>,
        dim: Option<usize>,
        #[serde(default)]
        t0: f64,
        interval: IntervalSpec,
        param_box: Option<ParamBox>,
    },
    Sincov {
        system: SystemSpec,
    },
    Degenerate {},
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticSpec {
    #[default]
    Float,
    Exact,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Translation { drift: Vec<f64> },
    Multiplicative {
        #[serde(default = "one")]
        dim: usize,
    },
    Identity {
        #[serde(default = "one")]
        dim: usize,
    },
    Affine {
        #[serde(default = "one")]
        dim: usize,
    },
    Cyclic { size: usize, times: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Integrator step for ODE families.
    pub step: f64,
    pub method: InversionMethod,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let newton = NewtonSettings::default();
        SolverSpec {
            tolerance: newton.tolerance,
            max_iterations: newton.max_iterations,
            max_halvings: newton.max_halvings,
            step: flowline::ode::DEFAULT_STEP,
            method: InversionMethod::Auto,
        }
    }
}

impl SolverSpec {
    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            max_halvings: self.max_halvings,
        }
    }
}

/// Parameters of each subcommand. Only the section of the command being
/// run is used.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub solve: Option<SolveTask>,
    pub verify: Option<VerifyTask>,
    pub frontal: Option<FrontalTask>,
    pub identities: Option<IdentitiesTask>,
}

/// A sample value: a number for scalar families, a list otherwise.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ValueSpec {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            ValueSpec::Scalar(x) => vec![x],
            ValueSpec::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveTask {
    pub restriction: Vec<(f64, ValueSpec)>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyTask {
    pub samples: usize,
    pub tolerance: Option<f64>,
}

impl Default for VerifyTask {
    fn default() -> Self {
        VerifyTask {
            samples: 200,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontalTask {
    pub t0: f64,
    pub w0: Vec<f64>,
    pub threshold: Option<f64>,
    /// Requested chart for ODE families.
    pub chart: Option<ChartSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub time_half_width: f64,
    pub param_half_widths: Vec<f64>,
    pub min_time_half_width: Option<f64>,
    pub condition_cap: Option<f64>,
    pub beta_draws: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesTask {
    pub samples: usize,
    pub tolerance: Option<f64>,
}

impl Default for IdentitiesTask {
    fn default() -> Self {
        IdentitiesTask {
            samples: 200,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub grid: Option<GridSpec>,
}

/// Either explicit points or an inclusive range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::Points(p) => Ok(p.clone()),
            GridSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Err(CliError::validation("grid needs step > 0 and stop >= start"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=count).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("invalid config: {e}")))
}

pub fn interval(spec: &IntervalSpec) -> Result<Interval, FlowError> {
    Interval::new(spec.0.unwrap_or(f64::NEG_INFINITY), spec.1.unwrap_or(f64::INFINITY))
}

/// What a family spec builds into.
pub enum Built {
    Worldlines(Arc<dyn Family>, Kind),
    Sincov(SincovSystem),
}

/// Family-specific checks available beyond the flow laws.
#[derive(Debug, Clone)]
pub enum Kind {
    Polynomial(PolynomialFamily),
    Harmonic(HarmonicFamily),
    Ode(OdeFamily),
    Degenerate,
}

impl FamilySpec {
    pub fn build(&self, solver: &SolverSpec) -> Result<Built, FlowError> {
        Ok(match self {
            FamilySpec::Polynomial {
                k,
                n,
                arithmetic,
                interval: iv,
            } => {
                let mut fam = PolynomialFamily::new(*k, *n)?.with_arithmetic(match arithmetic {
                    ArithmeticSpec::Float => Arithmetic::Float,
                    ArithmeticSpec::Exact => Arithmetic::Exact,
                });
                if let Some(iv) = iv {
                    fam = fam.with_interval(interval(iv)?);
                }
                Built::Worldlines(fam.clone().into_family(), Kind::Polynomial(fam))
            }
            FamilySpec::Harmonic { interval: iv } => {
                let fam = match iv {
                    Some(iv) => HarmonicFamily::new(interval(iv)?)?,
                    None => HarmonicFamily::default(),
                };
                Built::Worldlines(fam.clone().into_family(), Kind::Harmonic(fam))
            }
            FamilySpec::Ode {
                rhs,
                constants,
                order,
                dim,
                t0,
                interval: iv,
                param_box,
            } => {
                let rhs = OdeRhs::catalog(rhs, constants, *order, *dim)?;
                let dim = rhs.k() * rhs.n();
                let interval = interval(iv)?;
                if !interval.contains(*t0) {
                    return Err(FlowError::Validation(format!("anchor {t0} lies outside {interval}")));
                }
                let param_box = param_box.clone().unwrap_or_else(|| ParamBox::unbounded(dim));
                ParamBox::new(param_box.lower.clone(), param_box.upper.clone())?;
                let chart = LocalChart::new(*t0, interval, param_box, solver.step)?;
                let fam = OdeFamily::new(rhs, chart)?;
                Built::Worldlines(fam.clone().into_family(), Kind::Ode(fam))
            }
            FamilySpec::Sincov { system } => Built::Sincov(match system {
                SystemSpec::Translation { drift } => SincovSystem::Real(RealSystem::translation(drift.clone())?),
                SystemSpec::Multiplicative { dim } => SincovSystem::Real(RealSystem::multiplicative(*dim)?),
                SystemSpec::Identity { dim } => {
                    if *dim == 0 {
                        return Err(FlowError::Validation("state dimension must be positive".into()));
                    }
                    SincovSystem::Real(RealSystem::identity(*dim))
                }
                SystemSpec::Affine { dim } => SincovSystem::Real(RealSystem::affine(*dim)?),
                SystemSpec::Cyclic { size, times } => {
                    SincovSystem::Finite(FiniteSystem::cyclic(*size, times.clone())?)
                }
            }),
            FamilySpec::Degenerate {} => Built::Worldlines(DegenerateFamily.into_family(), Kind::Degenerate),
        })
    }
}
