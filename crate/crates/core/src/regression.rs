//! The log-optimal e-variable for fixed-design Gaussian linear regression
//! with known variance.
//!
//! With `Y ~ N(X theta, sigma^2 I)` and `theta = (theta_a, theta_b)` split
//! into a tested block of size `d` and a nuisance block, the null is
//! `theta_a = 0` and the alternative a point `theta*`. The least-squares
//! estimate is sufficient for the union, which reduces the problem to a
//! Gaussian location test with shared covariance `Sigma = sigma^2 (X^T X)^-1`.
//! The log-optimal e-variable for the reduced problem is the density ratio
//!
//! ```text
//! H(theta_hat) = rho(theta_hat; theta*, Sigma) / rho(theta_hat; theta_bar, Sigma),
//! ```
//!
//! where `theta_bar` is the closest null element in the KL geometry, i.e.
//! the minimizer over the null of `(theta* - theta)^T X^T X (theta* - theta)`.
//! Everything is evaluated in log space as a difference of quadratic forms:
//! the normalizing constants share `Sigma` and cancel, and direct density
//! evaluation would underflow for moderate dimension.

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evar::models::StdNormal;
use crate::evar::Model;

mod linalg;

use linalg::{chol_solve, cholesky, Mat, Qr};

/// Relative rank threshold on the QR diagnostics.
pub const RANK_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error("bad design: {0}")]
    BadDesign(String),
    #[error("design matrix is numerically rank deficient")]
    SingularDesign,
    #[error("nuisance block of X^T X is singular")]
    SingularNuisanceBlock,
    #[error("bad hypotheses: {0}")]
    BadHypotheses(String),
    #[error("response length {got} does not match design rows {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// A fixed design: regressor matrix, noise variance, and the size of the
/// tested coefficient block.
#[derive(Debug, Clone)]
pub struct FixedDesign {
    x: Mat,
    sigma2: f64,
    d: usize,
    qr: Qr,
    gram: Mat,
}

impl FixedDesign {
    /// Validates rank via the QR diagnostics (relative threshold
    /// [`RANK_REL_TOL`]) and precomputes the factorization.
    pub fn new(rows: &[Vec<f64>], sigma2: f64, d: usize) -> Result<Self, RegressionError> {
        let x = Mat::from_rows(rows)
            .ok_or_else(|| RegressionError::BadDesign("empty or ragged matrix".into()))?;
        if x.data.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::BadDesign("non-finite entry".into()));
        }
        if x.rows < x.cols {
            return Err(RegressionError::BadDesign(format!(
                "need rows >= cols, got {}x{}",
                x.rows, x.cols
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(RegressionError::BadDesign(format!("sigma2={sigma2}")));
        }
        if d == 0 || d > x.cols {
            return Err(RegressionError::BadDesign(format!(
                "tested block size d={d} outside 1..={}",
                x.cols
            )));
        }
        let qr = Qr::factor(&x);
        if !qr.is_full_rank(RANK_REL_TOL) {
            return Err(RegressionError::SingularDesign);
        }
        let gram = x.gram();
        Ok(FixedDesign {
            x,
            sigma2,
            d,
            qr,
            gram,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows
    }

    pub fn k(&self) -> usize {
        self.x.cols
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `x^T (X^T X) x`, the squared design norm of a coefficient vector.
    fn gram_quad(&self, v: &[f64]) -> f64 {
        let gv = self.gram.mul_vec(v);
        v.iter().zip(&gv).map(|(a, b)| a * b).sum()
    }

    /// Mean response `X theta`.
    pub fn mean_response(&self, theta: &[f64]) -> Vec<f64> {
        self.x.mul_vec(theta)
    }
}

/// A point alternative with the leading `d` coordinates not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionHypotheses {
    theta_star: Vec<f64>,
}

impl RegressionHypotheses {
    pub fn new(design: &FixedDesign, theta_star: Vec<f64>) -> Result<Self, RegressionError> {
        if theta_star.len() != design.k() {
            return Err(RegressionError::BadHypotheses(format!(
                "theta_star has {} coordinates for k={}",
                theta_star.len(),
                design.k()
            )));
        }
        if theta_star.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::BadHypotheses(
                "non-finite coordinate".into(),
            ));
        }
        if theta_star[..design.d()].iter().all(|&v| v == 0.0) {
            return Err(RegressionError::BadHypotheses(
                "tested block of theta_star must not vanish".into(),
            ));
        }
        Ok(RegressionHypotheses { theta_star })
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }
}

/// Least-squares estimate via the stable orthogonal factorization (the
/// explicit inverse of `X^T X` is never formed).
pub fn mle(design: &FixedDesign, y: &[f64]) -> Result<Vec<f64>, RegressionError> {
    if y.len() != design.n() {
        return Err(RegressionError::LengthMismatch {
            got: y.len(),
            want: design.n(),
        });
    }
    design.qr.solve_ls(y).ok_or(RegressionError::SingularDesign)
}

/// The closest null element to `theta*` in the design geometry: the
/// minimizer of `(theta* - theta)^T X^T X (theta* - theta)` over
/// `theta = (0, theta_b)`.
///
/// The minimizer zeros the tested block and satisfies the block normal
/// equation `A_bb (theta_bar_b - theta_b*) = A_ba theta_a*` with
/// `A = X^T X`; solved by Cholesky on the nuisance block.
pub fn kl_projection(
    design: &FixedDesign,
    hyp: &RegressionHypotheses,
) -> Result<Vec<f64>, RegressionError> {
    let k = design.k();
    let d = design.d();
    let theta_star = hyp.theta_star();
    let mut out = vec![0.0; k];
    if d == k {
        return Ok(out);
    }
    let nb = k - d;
    let mut a_bb = Mat::zeros(nb, nb);
    for i in 0..nb {
        for j in 0..nb {
            *a_bb.at_mut(i, j) = design.gram.at(d + i, d + j);
        }
    }
    // rhs = A_ba theta_a*.
    let rhs: Vec<f64> = (0..nb)
        .map(|i| {
            (0..d)
                .map(|j| design.gram.at(d + i, j) * theta_star[j])
                .sum()
        })
        .collect();
    let l = cholesky(&a_bb).ok_or(RegressionError::SingularNuisanceBlock)?;
    let shift = chol_solve(&l, &rhs);
    for i in 0..nb {
        out[d + i] = theta_star[d + i] + shift[i];
    }
    Ok(out)
}

/// Log of the reduced-problem density ratio at the estimate `theta_hat`:
/// half the difference of the two quadratic forms, with the shared
/// normalizing constants cancelled.
pub fn log_density_ratio(
    design: &FixedDesign,
    theta_hat: &[f64],
    numerator_mean: &[f64],
    denominator_mean: &[f64],
) -> f64 {
    let diff = |m: &[f64]| -> f64 {
        let v: Vec<f64> = theta_hat.iter().zip(m).map(|(a, b)| a - b).collect();
        design.gram_quad(&v)
    };
    0.5 * (diff(denominator_mean) - diff(numerator_mean)) / design.sigma2()
}

/// `log H(theta_hat(y))`: the log-optimal e-variable in log space.
pub fn log_gro_evariable(
    design: &FixedDesign,
    hyp: &RegressionHypotheses,
    y: &[f64],
) -> Result<f64, RegressionError> {
    let theta_hat = mle(design, y)?;
    let theta_bar = kl_projection(design, hyp)?;
    Ok(log_density_ratio(
        design,
        &theta_hat,
        hyp.theta_star(),
        &theta_bar,
    ))
}

/// `H(theta_hat(y))` on the natural scale.
pub fn gro_evariable(
    design: &FixedDesign,
    hyp: &RegressionHypotheses,
    y: &[f64],
) -> Result<f64, RegressionError> {
    Ok(log_gro_evariable(design, hyp, y)?.exp())
}

/// Expected log of the e-variable under the alternative, in closed form:
/// `(theta* - theta_bar)^T X^T X (theta* - theta_bar) / (2 sigma^2)`, the KL
/// divergence between the two reduced-problem Gaussians.
pub fn gro_value(design: &FixedDesign, hyp: &RegressionHypotheses) -> Result<f64, RegressionError> {
    let theta_bar = kl_projection(design, hyp)?;
    let diff: Vec<f64> = hyp
        .theta_star()
        .iter()
        .zip(&theta_bar)
        .map(|(a, b)| a - b)
        .collect();
    Ok(0.5 * design.gram_quad(&diff) / design.sigma2())
}

/// Sampled responses `Y ~ N(X theta, sigma^2 I)` for a fixed truth.
pub struct ResponseModel<'a> {
    design: &'a FixedDesign,
    mean: Vec<f64>,
    label: String,
}

impl<'a> ResponseModel<'a> {
    pub fn new(design: &'a FixedDesign, theta_truth: &[f64]) -> Self {
        let mean = design.mean_response(theta_truth);
        let label = format!(
            "regression(theta={theta_truth:?},sigma2={})",
            design.sigma2()
        );
        ResponseModel {
            design,
            mean,
            label,
        }
    }
}

impl Model for ResponseModel<'_> {
    type Point = Vec<f64>;

    fn label(&self) -> String {
        self.label.clone()
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        let sd = self.design.sigma2().sqrt();
        self.mean
            .iter()
            .map(|m| m + sd * StdNormal.draw(rng))
            .collect()
    }
}

/// On-disk problem description consumed by the command-line runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDoc {
    /// Row-major design matrix.
    pub x: Vec<Vec<f64>>,
    pub sigma2: f64,
    /// Size of the tested coefficient block (leading coordinates).
    pub d: usize,
    pub theta_star: Vec<f64>,
}

impl RegressionDoc {
    pub fn build(&self) -> Result<(FixedDesign, RegressionHypotheses), RegressionError> {
        let design = FixedDesign::new(&self.x, self.sigma2, self.d)?;
        let hyp = RegressionHypotheses::new(&design, self.theta_star.clone())?;
        Ok((design, hyp))
    }
}
