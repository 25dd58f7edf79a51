//! Durrmeyer-type generalized Szász–Mirakjan operators.
//!
//! The operator with index `n` and step `alpha` acts on a function `f` of
//! exponential type as
//!
//! ```text
//! U(f; x) = n * sum_i r_i(x) * int_0^inf e^{-nu} (nu)^i / i! f(u) du
//! ```
//!
//! where `r_i(x)` is a negative binomial mass with mean `n x`. The crate
//! evaluates the operator stably, exposes its closed-form moments, estimates
//! the smoothness functionals that quantitative error bounds consume, and
//! reproduces a set of convergence experiments.
//!
//! ```
//! use durrmeyer::{apply, OperatorParams, QuadraturePolicy, SeriesPolicy, TargetFunction};
//!
//! let params = OperatorParams::new(10, 0.05).unwrap();
//! let out = apply(
//!     &params,
//!     &TargetFunction::Monomial(1),
//!     1.0,
//!     &SeriesPolicy::default(),
//!     &QuadraturePolicy::default(),
//! )
//! .unwrap();
//! assert!((out.value - 1.1).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod function;
pub mod kernel_bv;
pub mod moments;
pub mod operator;
pub mod quadrature;
pub mod smoothness;
pub mod special;
pub mod stat_conv;

pub use error::{Error, Result};
pub use function::{ExpPoly, ExpPolyTerm, Growth, SampledFunction, TargetFunction};
pub use operator::{
    apply, apply_grid, basis_weight, basis_weights_truncated, kernel_integral, BasisWeightSet, Evaluation,
    OperatorParams, SeriesPolicy,
};
pub use quadrature::QuadraturePolicy;
