//! Flows with limited intersection and their `k`-frontal embeddings.
//!
//! A family `G(t, w)` of worldlines is `k`-frontal when any `k` samples of a
//! worldline determine its parameter `w`. Inverting that projection gives a
//! flow: `k` points in, a whole worldline out. This crate provides the flow
//! machinery ([`flow`], [`embedding`]), closed-form families ([`families`]),
//! families induced by ODEs ([`ode`]) and the Jacobian test ([`frontal`]).

pub mod embedding;
pub mod error;
pub mod families;
pub mod flow;
pub mod frontal;
pub mod newton;
pub mod ode;

pub use embedding::{
    anchor_residuals, flow_apply, invert_omega_beta, omega, omega_beta, Family, FlowMap, FlowOutcome, Inversion,
    InversionMethod, ParamBox,
};
pub use error::{FlowError, Result};
pub use flow::{
    intersection_count, restrict, verify_flow_axioms, AxiomReport, IntersectionCount, IntersectionReport,
    IntersectionVerdict, Interval, Restriction, TimeSet, Worldline,
};
pub use frontal::{k_closed, k_recursive, lemma_jacobian, DerivativeSource, JacobianOptions, LemmaJacobian, RecursionOptions};
pub use newton::NewtonSettings;
pub use ode::{integrate_cauchy, localize_chart, ode_G, shoot_multipoint, ChartRequest, ChartSearch, LocalChart, OdeFamily, OdeRhs};
