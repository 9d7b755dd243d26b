//! The naive Bernoulli bet and its conditioning on the success count.
//!
//! For `n` i.i.d. Bernoulli(p) draws with simple null `p = p0`, the bet
//! `E = exp(lambda X_1 - psi(lambda))` with `psi(lambda) = log(p0 e^lambda +
//! 1 - p0)` looks only at the first observation and has null mean exactly 1.
//! Conditioning on the success count `S = sum X_i` (exchangeability makes
//! the arrangement uniform given `S`) gives the closed form
//!
//! ```text
//! G(S) = exp(-psi(lambda)) * (1 + (e^lambda - 1) * S / n),
//! ```
//!
//! again with null mean 1, and with strictly larger expected utility than
//! `E` under every `p` in `(0, 1)` for strictly concave utilities.

use thiserror::Error;

use crate::extreal::ExtReal;
use crate::utility::ConcaveUtility;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BernoulliError {
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("success count {k} exceeds sample size {n}")]
    CountOutOfRange { k: usize, n: usize },
    #[error("enumeration too large: n={0} > 20")]
    EnumerationTooLarge(usize),
    #[error("p={0} outside (0,1)")]
    BadProbability(f64),
}

/// Parameters of the naive first-observation bet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernNaiveSpec {
    p0: f64,
    lambda: f64,
    n: usize,
}

impl BernNaiveSpec {
    pub fn new(p0: f64, lambda: f64, n: usize) -> Result<Self, BernoulliError> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(BernoulliError::BadSpec(format!("p0={p0} outside (0,1)")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(BernoulliError::BadSpec(format!(
                "lambda={lambda} must be positive and finite"
            )));
        }
        if n == 0 {
            return Err(BernoulliError::BadSpec("n must be at least 1".into()));
        }
        Ok(BernNaiveSpec { p0, lambda, n })
    }

    /// Convenience constructor from `e^lambda` (the per-success growth
    /// factor), which is how bets are usually quoted.
    pub fn from_growth_factor(p0: f64, lambda_exp: f64, n: usize) -> Result<Self, BernoulliError> {
        if !(lambda_exp > 1.0) || !lambda_exp.is_finite() {
            return Err(BernoulliError::BadSpec(format!(
                "growth factor {lambda_exp} must exceed 1"
            )));
        }
        Self::new(p0, lambda_exp.ln(), n)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `psi(lambda) = log(p0 e^lambda + 1 - p0)`, the null log moment
    /// generating function.
    pub fn psi(&self) -> f64 {
        (self.p0 * self.lambda.exp() + 1.0 - self.p0).ln()
    }
}

/// The naive bet at the first observation: `exp(lambda x1 - psi)`.
pub fn bern_naive_e(spec: &BernNaiveSpec, x1: u8) -> f64 {
    debug_assert!(x1 <= 1);
    (spec.lambda * x1 as f64 - spec.psi()).exp()
}

/// The conditioned bet evaluated at success count `k`.
pub fn bern_rb_g(spec: &BernNaiveSpec, k: usize) -> Result<f64, BernoulliError> {
    if k > spec.n {
        return Err(BernoulliError::CountOutOfRange { k, n: spec.n });
    }
    let frac = k as f64 / spec.n as f64;
    Ok((-spec.psi()).exp() * (1.0 + (spec.lambda.exp() - 1.0) * frac))
}

/// Exact expected-utility gap `E_p[f(G)] - E_p[f(E)]` by enumeration over
/// all `2^n` outcomes, and whether it is strictly positive.
///
/// Strict positivity holds for strictly concave `f` and every `p` in (0,1)
/// because interior success counts occur with positive probability; for
/// affine `f` the gap vanishes.
pub fn bern_exact_improvement(
    spec: &BernNaiveSpec,
    p: f64,
    f: &ConcaveUtility,
) -> Result<(ExtReal, bool), BernoulliError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BernoulliError::BadProbability(p));
    }
    if spec.n > 20 {
        return Err(BernoulliError::EnumerationTooLarge(spec.n));
    }
    let n = spec.n;
    let mut utility_e = 0.0f64;
    let mut utility_g = 0.0f64;
    for word in 0..(1usize << n) {
        let k = word.count_ones() as usize;
        // Bit n-1 is the first draw.
        let x1 = ((word >> (n - 1)) & 1) as u8;
        let prob = p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        let fe = f.eval_f64(bern_naive_e(spec, x1));
        let fg = f.eval_f64(bern_rb_g(spec, k)?);
        // Both bets are strictly positive, so every utility is finite.
        utility_e += prob * fe.as_f64();
        utility_g += prob * fg.as_f64();
    }
    let gap = utility_g - utility_e;
    Ok((ExtReal::from_f64(gap), gap > 0.0))
}
