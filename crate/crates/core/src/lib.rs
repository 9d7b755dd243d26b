//! Rao-Blackwellization of e-variables and e-processes.
//!
//! An e-variable for a null hypothesis is a nonnegative random variable with
//! expectation at most 1 under every null distribution. Conditioning an
//! e-variable on a sufficient statistic yields another e-variable whose
//! expected utility, for any concave utility function, is at least as large
//! under every parameter. This crate implements that construction and the
//! machinery needed to verify it numerically:
//!
//! - [`extreal`]: arithmetic on `[-inf, inf]` and generalized expectations
//!   that may be infinite or undefined.
//! - [`utility`]: concave utilities on `(0, inf)` extended to the boundary by
//!   limits (log, power, piecewise-linear).
//! - [`finite_space`]: exact computation on finite probability spaces —
//!   sufficiency checking, conditional expectation given a statistic,
//!   e-variable validation, and per-level Jensen gaps.
//! - [`evar`]: seeded Monte Carlo evaluation for models without finite
//!   support, including paired comparisons and permutation averaging.
//! - [`bernoulli`] / [`cauchy`]: closed-form worked constructions (a naive
//!   first-observation bet and its conditioning on the success count; the
//!   normal-vs-Cauchy pair conditioned on `|X|`).
//! - [`regression`]: the log-optimal e-variable for fixed-design Gaussian
//!   linear regression with known variance.
//! - [`pareto`]: the worst-case-growth-optimal e-variable for the Pareto
//!   shape parameter with unknown scale.
//! - [`sequential`]: wealth processes, stopping rules, burn-in conditioning,
//!   compound e-variables, and e-BH multiple testing.

// `!(x > 0.0)`-style validation is used on purpose: unlike `x <= 0.0` it
// also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernoulli;
pub mod cauchy;
pub mod evar;
pub mod extreal;
pub mod finite_space;
pub mod math;
pub mod pareto;
pub mod regression;
pub mod sequential;
pub mod utility;

pub use extreal::{ExtReal, GenExpectation};
pub use utility::ConcaveUtility;
