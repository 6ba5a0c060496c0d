//! q-additive scaling laws for resource quantifiers.
//!
//! A quantifier is q-additive on the lattice `N = a^n` when its value on `N`
//! copies is a fixed linear combination `E^(N) = Σ_m η^m(N) e_m` of its values
//! `e_m` at `1, a, …, a^{q-1}` copies. Consistency under regrouping copies
//! forces `η_n = Q η_{n-1}` with a companion matrix `Q`, whose eigenvalues
//! `λ_k = a^{ν_k}` give closed forms `Σ_k C^m_k N^{ν_k}`.
//!
//! The crate provides the exact recurrence ([`oracle`]), the spectral closed
//! forms ([`spectrum`], [`coefficients`], [`closed_form`]), hybrid Fibonacci
//! polynomials for the two-term case ([`fibonacci`]), feasibility and
//! large-N analysis ([`analysis`]), fitting ([`fit`]) and file formats ([`io`]).

pub mod analysis;
pub mod cli;
pub mod closed_form;
pub mod coefficients;
pub mod error;
pub mod fibonacci;
pub mod fit;
pub mod io;
pub mod lattice;
pub mod model;
pub mod oracle;
mod poly;
mod precise;
pub mod spectrum;

pub use analysis::{
    asymptote, build_osd_model, builtin_osd_cases, check_2additive_feasibility,
    check_osd_consistency, regularized_curve, AsymptoteKind, AsymptoteReport, FeasibilityReport,
    OsdModelSpec,
};
pub use closed_form::{
    closed_form_2additive, closed_form_3additive, closed_form_eval, degenerate_2additive,
    degenerate_3additive, ClosedForm,
};
pub use coefficients::{solve_coefficients, CoefficientTable};
pub use error::{Error, Result};
pub use fibonacci::{binet_check, fibonacci_2additive_eval, fibonacci_hybrid, HybridFibonacci};
pub use fit::{fit_evector, fit_exponents, hypothesis_residual, ExponentSearch, FitProblem, FitResult};
pub use io::{emit_figure_data, load_dataset, DataPoint, Dataset, ModelFile};
pub use lattice::CopyLattice;
pub use model::{build_companion, closure_from_exponents, ClosureSpec, EVector, ScalingModel};
pub use oracle::{oracle_eval, recurrence_oracle, scalability_consistency_check};
pub use spectrum::{eigen_spectrum, Spectrum, SpectrumOptions};
