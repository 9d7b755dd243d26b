//! Extended-real arithmetic and generalized expectations.
//!
//! Utilities and expectations throughout this crate take values in the
//! extended real line `[-inf, inf]`. Infinities are explicit enum states, not
//! IEEE overflow artifacts, and the division conventions `0/0 = 0` and
//! `inf/inf = 1` are applied where ratios of e-variables are formed.
//!
//! An expectation `E[X]` is *defined* when `E[X+]` or `E[X-]` is finite, in
//! which case `E[X] = E[X+] - E[X-]` is an unambiguous element of
//! `[-inf, inf]`. [`GenExpectation`] carries both parts so that undefined
//! cases (both parts infinite) are reported rather than silently collapsed.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for probability-vector sums: round-off budget for up to 2^20
/// atoms in double precision.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Errors from extended-real arithmetic and generalized expectations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtRealError {
    /// `(+inf) + (-inf)` has no value.
    #[error("indeterminate sum: (+inf) + (-inf)")]
    IndeterminateSum,
    /// Nonnegative division received a negative operand.
    #[error("negative operand {0} in nonnegative division")]
    NegativeOperand(f64),
    /// A weight vector failed validation.
    #[error("bad distribution: {0}")]
    BadDistribution(String),
}

/// A value in the extended real line `[-inf, inf]`.
///
/// The derived order is total: `-inf < finite < +inf`, with finite values
/// ordered as reals. `NaN` is excluded by construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Wraps an ordinary `f64`, mapping IEEE infinities to the sentinel
    /// states.
    ///
    /// Panics on `NaN`: no operation in this crate produces one, so a `NaN`
    /// input is a caller bug.
    pub fn from_f64(x: f64) -> Self {
        if x.is_nan() {
            panic!("ExtReal::from_f64 called with NaN");
        }
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    /// The IEEE representation (`+-inf` for the sentinel states).
    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_nonneg(self) -> bool {
        match self {
            ExtReal::NegInf => false,
            ExtReal::Finite(x) => x >= 0.0,
            ExtReal::PosInf => true,
        }
    }

    /// Extended addition. `(+inf) + (-inf)` is an error, not a NaN: silent
    /// propagation would mask undefined-expectation cases that callers must
    /// report.
    pub fn checked_add(self, rhs: Self) -> Result<Self, ExtRealError> {
        use ExtReal::*;
        match (self, rhs) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(ExtRealError::IndeterminateSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(ExtReal::from_f64(a + b)),
        }
    }

    /// Extended subtraction; `inf - inf` (same sign) is an error.
    pub fn checked_sub(self, rhs: Self) -> Result<Self, ExtRealError> {
        self.checked_add(-rhs)
    }

    /// Total-order comparison (valid because `NaN` is excluded).
    pub fn total_cmp(self, rhs: Self) -> Ordering {
        self.partial_cmp(&rhs).expect("ExtReal order is total")
    }

    pub fn max(self, rhs: Self) -> Self {
        if self.total_cmp(rhs) == Ordering::Less {
            rhs
        } else {
            self
        }
    }

    pub fn min(self, rhs: Self) -> Self {
        if self.total_cmp(rhs) == Ordering::Greater {
            rhs
        } else {
            self
        }
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> Self {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

// Serialized as the strings "inf" / "-inf" or a shortest-round-trip decimal,
// so that re-reading a report reproduces values bit-exactly.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_ext_real(&s).map_err(D::Error::custom)
    }
}

/// Parses the string form produced by [`ExtReal`]'s `Display`/`Serialize`.
pub fn parse_ext_real(s: &str) -> Result<ExtReal, String> {
    match s {
        "inf" | "+inf" => Ok(ExtReal::PosInf),
        "-inf" => Ok(ExtReal::NegInf),
        _ => {
            let x: f64 = s
                .parse()
                .map_err(|e| format!("bad extended real {s:?}: {e}"))?;
            if x.is_nan() || x.is_infinite() {
                return Err(format!("bad extended real {s:?}"));
            }
            Ok(ExtReal::Finite(x))
        }
    }
}

/// Division of nonnegative extended reals with the conventions `0/0 = 0` and
/// `inf/inf = 1`.
///
/// A positive finite numerator over zero gives `+inf`, and a finite numerator
/// over `+inf` gives `0`; otherwise ordinary division applies. Negative
/// operands are rejected.
pub fn ext_div(a: ExtReal, b: ExtReal) -> Result<ExtReal, ExtRealError> {
    for v in [a, b] {
        if !v.is_nonneg() {
            return Err(ExtRealError::NegativeOperand(v.as_f64()));
        }
    }
    use ExtReal::*;
    Ok(match (a, b) {
        (PosInf, PosInf) => Finite(1.0),
        (PosInf, _) => PosInf,
        (_, PosInf) => Finite(0.0),
        (Finite(x), Finite(y)) => {
            if y == 0.0 {
                if x == 0.0 {
                    Finite(0.0)
                } else {
                    PosInf
                }
            } else {
                ExtReal::from_f64(x / y)
            }
        }
        (NegInf, _) | (_, NegInf) => unreachable!("negative operands rejected above"),
    })
}

/// State of a generalized expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationStatus {
    Defined(ExtReal),
    Undefined,
}

/// A generalized expectation, carried as the pair `(E[X+], E[X-])`.
///
/// The expectation is defined iff at least one part is finite, in which case
/// its value is the difference of the parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenExpectation {
    pos_part: ExtReal,
    neg_part: ExtReal,
}

impl GenExpectation {
    /// Builds an expectation from its positive and negative parts. Both must
    /// be nonnegative.
    pub fn from_parts(pos_part: ExtReal, neg_part: ExtReal) -> Result<Self, ExtRealError> {
        if !pos_part.is_nonneg() || !neg_part.is_nonneg() {
            return Err(ExtRealError::BadDistribution(
                "expectation parts must be nonnegative".into(),
            ));
        }
        Ok(GenExpectation { pos_part, neg_part })
    }

    pub fn pos_part(&self) -> ExtReal {
        self.pos_part
    }

    pub fn neg_part(&self) -> ExtReal {
        self.neg_part
    }

    pub fn is_defined(&self) -> bool {
        self.pos_part.is_finite() || self.neg_part.is_finite()
    }

    pub fn status(&self) -> ExpectationStatus {
        match self.value() {
            Some(v) => ExpectationStatus::Defined(v),
            None => ExpectationStatus::Undefined,
        }
    }

    /// The value `E[X+] - E[X-]` when defined.
    pub fn value(&self) -> Option<ExtReal> {
        self.pos_part.checked_sub(self.neg_part).ok()
    }
}

/// Generalized expectation of a finite list of extended-real values under a
/// probability vector.
///
/// Zero-probability atoms contribute nothing even when their value is
/// infinite (the measure-theoretic convention `0 * (+-inf) = 0`). Weights
/// must be nonnegative and sum to 1 within [`WEIGHT_SUM_TOL`].
pub fn gen_expectation(
    values: &[ExtReal],
    weights: &[f64],
) -> Result<GenExpectation, ExtRealError> {
    if values.len() != weights.len() {
        return Err(ExtRealError::BadDistribution(format!(
            "{} values vs {} weights",
            values.len(),
            weights.len()
        )));
    }
    let mut sum = 0.0;
    for &w in weights {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(ExtRealError::BadDistribution(format!("bad weight {w}")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(ExtRealError::BadDistribution(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    Ok(weighted_parts(values, weights))
}

/// Shared core for expectation-like sums: computes `(E[X+], E[X-])` with the
/// `0 * inf = 0` convention, without validating the weight sum. Used both for
/// full expectations and for conditional (renormalized) ones.
pub(crate) fn weighted_parts(values: &[ExtReal], weights: &[f64]) -> GenExpectation {
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    let mut pos_inf = false;
    let mut neg_inf = false;
    for (&v, &w) in values.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        match v {
            ExtReal::PosInf => pos_inf = true,
            ExtReal::NegInf => neg_inf = true,
            ExtReal::Finite(x) => {
                if x >= 0.0 {
                    pos += w * x;
                } else {
                    neg += w * (-x);
                }
            }
        }
    }
    let pos_part = if pos_inf {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(pos)
    };
    let neg_part = if neg_inf {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(neg)
    };
    GenExpectation { pos_part, neg_part }
}
