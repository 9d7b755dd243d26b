//! Concave utility functions on `(0, inf)`, extended to `[0, inf]` by
//! one-sided limits.
//!
//! A utility here is a concave `f: (0, inf) -> R` with `f(0)` and `f(inf)`
//! defined as the limits `x -> 0+` and `x -> inf`, which always exist in
//! `[-inf, inf]` by concavity. Built-ins:
//!
//! - `Log`: `f(x) = log x`, unbounded on both sides.
//! - `Power(gamma)`, `gamma > 1`: `f(x) = x^(1-gamma) / (1-gamma)`, bounded
//!   above by 0, so its expectation is always defined.
//! - `PiecewiseLinear`: continuous with nonincreasing slopes; used as a rich
//!   random family in property tests.

use rand::Rng;
use thiserror::Error;

use crate::extreal::ExtReal;

/// Midpoint-concavity slack absorbing double rounding over the probed range.
pub const CONCAVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UtilityError {
    /// Power utilities require `gamma > 1`.
    #[error("power utility requires gamma > 1, got {0}")]
    InvalidGamma(f64),
    /// Piecewise-linear breakpoints must be positive, strictly increasing,
    /// with nonincreasing slopes.
    #[error("bad piecewise-linear utility: {0}")]
    BadBreakpoints(String),
}

/// A continuous piecewise-linear function on `(0, inf)`.
///
/// Anchored by its value at the first breakpoint; the first slope extends
/// left toward 0 and the last slope extends right toward infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    /// `(x_i, slope on [x_i, x_{i+1}))`, `x` strictly increasing, `x_0 > 0`.
    breakpoints: Vec<(f64, f64)>,
    /// Function value at `x_0`.
    anchor_value: f64,
    /// Cumulative values at each breakpoint, precomputed.
    values: Vec<f64>,
}

impl PiecewiseLinear {
    /// Validating constructor: rejects non-concave slope sequences.
    pub fn new(breakpoints: Vec<(f64, f64)>, anchor_value: f64) -> Result<Self, UtilityError> {
        let pl = Self::new_unchecked(breakpoints, anchor_value)?;
        for w in pl.breakpoints.windows(2) {
            if w[1].1 > w[0].1 {
                return Err(UtilityError::BadBreakpoints(format!(
                    "slope increases from {} to {}",
                    w[0].1, w[1].1
                )));
            }
        }
        Ok(pl)
    }

    /// Constructor without the concavity check, for probing arbitrary (e.g.
    /// deliberately convex) piecewise functions.
    pub fn new_unchecked(
        breakpoints: Vec<(f64, f64)>,
        anchor_value: f64,
    ) -> Result<Self, UtilityError> {
        if breakpoints.is_empty() {
            return Err(UtilityError::BadBreakpoints("no breakpoints".into()));
        }
        if breakpoints[0].0 <= 0.0 {
            return Err(UtilityError::BadBreakpoints(format!(
                "first breakpoint {} must be positive",
                breakpoints[0].0
            )));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(UtilityError::BadBreakpoints(format!(
                    "breakpoints not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if !anchor_value.is_finite()
            || breakpoints
                .iter()
                .any(|(x, s)| !x.is_finite() || !s.is_finite())
        {
            return Err(UtilityError::BadBreakpoints("non-finite parameter".into()));
        }
        let mut values = Vec::with_capacity(breakpoints.len());
        let mut v = anchor_value;
        values.push(v);
        for w in breakpoints.windows(2) {
            v += w[0].1 * (w[1].0 - w[0].0);
            values.push(v);
        }
        Ok(PiecewiseLinear {
            breakpoints,
            anchor_value,
            values,
        })
    }

    fn eval_finite(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0 && x.is_finite());
        let first = self.breakpoints[0].0;
        if x <= first {
            return self.anchor_value - self.breakpoints[0].1 * (first - x);
        }
        // Last segment whose start is <= x.
        let idx = match self
            .breakpoints
            .binary_search_by(|(bx, _)| bx.partial_cmp(&x).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.values[idx] + self.breakpoints[idx].1 * (x - self.breakpoints[idx].0)
    }

    fn limit_at_zero(&self) -> ExtReal {
        let (x0, s0) = self.breakpoints[0];
        ExtReal::Finite(self.anchor_value - s0 * x0)
    }

    fn limit_at_infinity(&self) -> ExtReal {
        let (_, last_slope) = *self.breakpoints.last().unwrap();
        if last_slope > 0.0 {
            ExtReal::PosInf
        } else if last_slope < 0.0 {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(*self.values.last().unwrap())
        }
    }
}

/// A concave utility function extended to `[0, inf]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConcaveUtility {
    Log,
    Power { gamma: f64 },
    PiecewiseLinear(PiecewiseLinear),
}

/// `f(x) = log x`, with `f(0) = -inf` and `f(inf) = +inf`.
pub fn log_utility() -> ConcaveUtility {
    ConcaveUtility::Log
}

/// `f(x) = x^(1-gamma) / (1-gamma)` for `gamma > 1`, with `f(0) = -inf` and
/// `f(inf) = 0`. Bounded above by 0.
pub fn power_utility(gamma: f64) -> Result<ConcaveUtility, UtilityError> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(UtilityError::InvalidGamma(gamma));
    }
    Ok(ConcaveUtility::Power { gamma })
}

impl ConcaveUtility {
    pub fn piecewise_linear(
        breakpoints: Vec<(f64, f64)>,
        anchor_value: f64,
    ) -> Result<Self, UtilityError> {
        Ok(ConcaveUtility::PiecewiseLinear(PiecewiseLinear::new(
            breakpoints,
            anchor_value,
        )?))
    }

    /// Short label for reports and test output.
    pub fn label(&self) -> String {
        match self {
            ConcaveUtility::Log => "log".into(),
            ConcaveUtility::Power { gamma } => format!("power({gamma})"),
            ConcaveUtility::PiecewiseLinear(pl) => {
                format!("pwl({} segments)", pl.breakpoints.len())
            }
        }
    }

    /// Evaluates the utility at a point of `[0, inf]`.
    ///
    /// Panics on negative input: callers are expected to feed nonnegative
    /// random variables only.
    pub fn eval(&self, x: ExtReal) -> ExtReal {
        assert!(x.is_nonneg(), "utility evaluated at negative {x}");
        match self {
            ConcaveUtility::Log => match x {
                ExtReal::Finite(v) if v == 0.0 => ExtReal::NegInf,
                ExtReal::Finite(v) => ExtReal::Finite(v.ln()),
                ExtReal::PosInf => ExtReal::PosInf,
                ExtReal::NegInf => unreachable!(),
            },
            ConcaveUtility::Power { gamma } => match x {
                ExtReal::Finite(v) if v == 0.0 => ExtReal::NegInf,
                ExtReal::Finite(v) => ExtReal::Finite(v.powf(1.0 - gamma) / (1.0 - gamma)),
                ExtReal::PosInf => ExtReal::Finite(0.0),
                ExtReal::NegInf => unreachable!(),
            },
            ConcaveUtility::PiecewiseLinear(pl) => match x {
                ExtReal::Finite(v) if v == 0.0 => pl.limit_at_zero(),
                ExtReal::Finite(v) => ExtReal::Finite(pl.eval_finite(v)),
                ExtReal::PosInf => pl.limit_at_infinity(),
                ExtReal::NegInf => unreachable!(),
            },
        }
    }

    /// Convenience for finite nonnegative arguments.
    pub fn eval_f64(&self, x: f64) -> ExtReal {
        self.eval(ExtReal::from_f64(x))
    }
}

/// Midpoint-concavity probe: samples pairs `x, y` in `(0, 1e6)` (log-uniform,
/// so kinks at every scale are straddled) and checks
/// `f((x+y)/2) >= (f(x)+f(y))/2 - CONCAVITY_TOL`.
///
/// Returns `false` on the first sampled violation. Deterministic given the
/// seed.
pub fn concavity_probe(f: &ConcaveUtility, trials: usize, seed: u64) -> bool {
    use rand::SeedableRng;
    assert!(trials >= 1);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let lo = 1e-6f64.ln();
    let hi = 1e6f64.ln();
    for _ in 0..trials {
        let x = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let y = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let mid = 0.5 * (x + y);
        let fx = f.eval_f64(x);
        let fy = f.eval_f64(y);
        let fmid = f.eval_f64(mid);
        // All built-ins are finite on (0, 1e6); compare in f64.
        let lhs = fmid.as_f64();
        let rhs = 0.5 * (fx.as_f64() + fy.as_f64());
        if lhs < rhs - CONCAVITY_TOL {
            return false;
        }
    }
    true
}

/// Draws a random concave piecewise-linear utility with at least one
/// genuine kink (strictly decreasing slopes across 2..=max_segments
/// breakpoints, log-uniform in `(0.01, 100)`).
///
/// Used by property suites that quantify over "all concave utilities"; a
/// single-segment function would be affine and useless for strictness
/// checks.
pub fn random_concave_pwl<R: Rng>(rng: &mut R, max_segments: usize) -> ConcaveUtility {
    let k = 2 + rng.random_range(0..max_segments.max(2) - 1);
    let lo = 0.01f64.ln();
    let hi = 100f64.ln();
    let mut xs: Vec<f64> = (0..k)
        .map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp())
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    while xs.len() < 2 {
        let last = *xs.last().unwrap();
        xs.push(last * 3.0);
    }
    let mut slope = -2.0 + 6.0 * rng.random::<f64>();
    let mut breakpoints = Vec::with_capacity(xs.len());
    for x in xs {
        breakpoints.push((x, slope));
        slope -= 0.05 + 1.45 * rng.random::<f64>();
    }
    let anchor = -3.0 + 6.0 * rng.random::<f64>();
    ConcaveUtility::PiecewiseLinear(
        PiecewiseLinear::new(breakpoints, anchor).expect("constructed concave"),
    )
}
