//! Closed-form worldline families and the `k = 1` / `k = 2` solution schemes.

pub mod chladek;
pub mod degenerate;
pub mod harmonic;
pub mod polynomial;
pub mod sincov;

pub use chladek::{chladek_F, chladek_consistency, chladek_solve, ChladekProblem};
pub use degenerate::DegenerateFamily;
pub use harmonic::{goniometric_identity, harmonic_flow, sine_quotient, HarmonicFamily};
pub use polynomial::{
    count_real_roots, exact_flow_residuals, lagrange_flow, lagrange_flow_exact,
    lagrange_summation_identity, lagrange_summation_identity_exact, Arithmetic, ExactRestriction,
    Polynomial, PolynomialFamily,
};
pub use sincov::{
    autonomous_F, sincov_F, sincov_check, translation_check, FiniteSystem, Point, RealSystem,
    SincovSample, SincovSystem, TranslationSample,
};
