//! Built-in sampled models.

use rand_chacha::ChaCha12Rng;

use super::seeding::open_unit;
use super::Model;

/// Standard normal via Box-Muller (one draw per pair, deterministic).
#[derive(Debug, Clone, Copy)]
pub struct StdNormal;

impl Model for StdNormal {
    type Point = f64;

    fn label(&self) -> String {
        "normal(0,1)".into()
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        let u1 = open_unit(rng);
        let u2: f64 = rand::Rng::random(rng);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn log_density(&self, x: &f64) -> Option<f64> {
        Some(-0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln())
    }
}

/// Standard Cauchy via the inverse CDF.
#[derive(Debug, Clone, Copy)]
pub struct StdCauchy;

impl Model for StdCauchy {
    type Point = f64;

    fn label(&self) -> String {
        "cauchy(0,1)".into()
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        let u = open_unit(rng);
        (std::f64::consts::PI * (u - 0.5)).tan()
    }

    fn log_density(&self, x: &f64) -> Option<f64> {
        Some(-(std::f64::consts::PI * (1.0 + x * x)).ln())
    }
}

/// `n` i.i.d. Bernoulli draws, reported as 0.0/1.0 coordinates.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliTuple {
    pub p: f64,
    pub n: usize,
}

impl Model for BernoulliTuple {
    type Point = Vec<f64>;

    fn label(&self) -> String {
        format!("bernoulli(p={},n={})", self.p, self.n)
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        (0..self.n)
            .map(|_| {
                let u: f64 = rand::Rng::random(rng);
                if u < self.p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evar::sample_model;
    use crate::math::adaptive_simpson;

    #[test]
    fn normal_moments() {
        let xs = sample_model(&StdNormal, 200_000, 17);
        let n = xs.len() as f64;
        let mean: f64 = xs.iter().sum::<f64>() / n;
        let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt() * 1.1, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn cauchy_median_and_quartiles() {
        let mut xs = sample_model(&StdCauchy, 200_000, 19);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |f: f64| xs[(f * xs.len() as f64) as usize];
        assert!(q(0.5).abs() < 0.02);
        // Quartiles of the standard Cauchy sit at +-1.
        assert!((q(0.25) + 1.0).abs() < 0.03);
        assert!((q(0.75) - 1.0).abs() < 0.03);
    }

    #[test]
    fn log_densities_integrate_to_one() {
        let fnorm = |x: f64| StdNormal.log_density(&x).unwrap().exp();
        assert!((adaptive_simpson(&fnorm, -30.0, 30.0, 1e-10) - 1.0).abs() < 1e-8);
        // Cauchy needs the tangent substitution to cover the tails.
        let fc = |u: f64| {
            let x = u.tan();
            StdCauchy.log_density(&x).unwrap().exp() * (1.0 + x * x)
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        let v = adaptive_simpson(&fc, -half_pi + 1e-9, half_pi - 1e-9, 1e-10);
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bernoulli_tuple_frequencies() {
        let model = BernoulliTuple { p: 0.8, n: 3 };
        let xs = sample_model(&model, 100_000, 23);
        let total: f64 = xs.iter().map(|t| t.iter().sum::<f64>()).sum();
        let freq = total / (3.0 * xs.len() as f64);
        assert!((freq - 0.8).abs() < 0.005);
    }
}
