//! The normal-versus-Cauchy pair conditioned on `|X|`.
//!
//! Testing `N(0, 1)` against `Cauchy(0, 1)`, both symmetric about zero, the
//! statistic `S = |X|` is sufficient and conditioning averages a function
//! over the sign flip. The bet `E = exp(X - 1/2)` has unit mean under the
//! null; its conditioning is `G = (exp(X - 1/2) + exp(-X - 1/2)) / 2`, and
//! the ratio collapses to
//!
//! ```text
//! E / G = 2 / (1 + exp(-2X)) <= 2.
//! ```
//!
//! Under the Cauchy alternative `E[log E]` does not exist (both tails are
//! infinite) while `E[log G] = +inf`, so expected-log comparison fails; the
//! ratio comparison still works, and the truncated integral of `log(E/G)`
//! against the Cauchy density decreases without bound as the truncation
//! grows.

use crate::math::{adaptive_simpson, ln_one_plus_exp};

/// `E(x) = exp(x - 1/2)`.
pub fn cauchy_e(x: f64) -> f64 {
    (x - 0.5).exp()
}

/// `G(x) = (exp(x - 1/2) + exp(-x - 1/2)) / 2`, the sign-averaged bet.
pub fn cauchy_g(x: f64) -> f64 {
    0.5 * ((x - 0.5).exp() + (-x - 0.5).exp())
}

/// `E(x) / G(x) = 2 / (1 + exp(-2x))`, computed in closed form.
pub fn cauchy_ratio(x: f64) -> f64 {
    2.0 / (1.0 + (-2.0 * x).exp())
}

/// `log(E(x) / G(x)) = log 2 - log(1 + exp(-2x))`, stable for large `|x|`.
pub fn cauchy_log_ratio(x: f64) -> f64 {
    std::f64::consts::LN_2 - ln_one_plus_exp(-2.0 * x)
}

/// Density of the standard Cauchy distribution.
pub fn cauchy_density(x: f64) -> f64 {
    1.0 / (std::f64::consts::PI * (1.0 + x * x))
}

/// Truncated expectation `int_{-T}^{T} log(E/G) dCauchy`, by quadrature
/// under the substitution `x = tan(u)` (which absorbs the density and keeps
/// the integrand smooth at any truncation level).
///
/// Decreasing in `T` once the negative tail dominates, and unbounded below:
/// the integrand is at most `(log 2 + 2x) / (pi (1 + x^2))` on `x <= 0`.
pub fn cauchy_truncated_logratio(t: f64) -> f64 {
    assert!(t > 0.0, "truncation level must be positive");
    let u_max = t.atan();
    let integrand = |u: f64| cauchy_log_ratio(u.tan()) / std::f64::consts::PI;
    adaptive_simpson(&integrand, -u_max, u_max, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evar::models::StdNormal;
    use crate::evar::Model;

    #[test]
    fn ratio_at_origin_and_symmetry_point() {
        assert!((cauchy_ratio(0.0) - 1.0).abs() < 1e-15);
        assert!(cauchy_log_ratio(0.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_ratio_diagnostics_order_the_pair() {
        use crate::evar::models::StdCauchy;
        use crate::evar::{ratio_check, EVariableFn};
        use crate::extreal::ExtReal;
        let e_fn = || EVariableFn::new("E", |x: &f64| ExtReal::from_f64(cauchy_e(*x)));
        let g_fn = || EVariableFn::new("G", |x: &f64| ExtReal::from_f64(cauchy_g(*x)));

        let (ratio_null, _) = ratio_check(&StdNormal, &e_fn(), &g_fn(), 1_000_000, 31);
        let m = ratio_null.mean.as_f64();
        assert!(m <= 1.0 + 3.0 * ratio_null.std_error, "null ratio mean {m}");

        let (ratio_alt, log_alt) = ratio_check(&StdCauchy, &e_fn(), &g_fn(), 1_000_000, 31);
        let m = ratio_alt.mean.as_f64();
        assert!(m <= 1.0 + 3.0 * ratio_alt.std_error, "alt ratio mean {m}");
        // Deep-tail underflow sends the sampled log ratio to -inf, which
        // sits below any fixed bound.
        assert!(
            log_alt.mean < ExtReal::Finite(-10.0),
            "alt log ratio {:?}",
            log_alt.mean
        );
    }

    #[test]
    fn g_at_origin() {
        assert!((cauchy_g(0.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(((-0.5f64).exp() - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn ratio_closed_form_matches_quotient() {
        let mut x = -50.0;
        while x <= 50.0 {
            let direct = cauchy_e(x) / cauchy_g(x);
            let closed = cauchy_ratio(x);
            assert!(
                (direct - closed).abs() <= 1e-12 * closed.max(1.0),
                "x={x}: {direct} vs {closed}"
            );
            assert!(closed <= 2.0 + 1e-15, "bound violated at {x}");
            x += 0.25;
        }
    }

    #[test]
    fn g_is_the_sign_average_of_e() {
        for x in [-3.0, -0.4, 0.0, 1.7, 12.0] {
            let avg = 0.5 * (cauchy_e(x) + cauchy_e(-x));
            assert!((cauchy_g(x) - avg).abs() < 1e-15 * avg.max(1.0));
        }
    }

    #[test]
    fn g_has_unit_mean_under_the_null_by_quadrature() {
        let f = |x: f64| cauchy_g(x) * StdNormal.log_density(&x).unwrap().exp();
        let v = adaptive_simpson(&f, -40.0, 40.0, 1e-11);
        assert!((v - 1.0).abs() < 1e-8, "integral {v}");
    }

    #[test]
    fn truncated_logratio_decreases_and_diverges() {
        let at = |t: f64| cauchy_truncated_logratio(t);
        assert!(at(100.0) < at(1.0), "{} vs {}", at(100.0), at(1.0));
        let deep = at(1e4);
        assert!(deep < -4.0, "T=1e4 gives {deep}");
        // Integrand vanishes at the symmetry point.
        assert_eq!(cauchy_log_ratio(0.0), 0.0);
    }

    #[test]
    fn truncated_logratio_agrees_with_direct_quadrature() {
        // Independent route: integrate on the x axis without substitution.
        for t in [1.0, 10.0, 100.0] {
            let direct = adaptive_simpson(
                &|x: f64| cauchy_log_ratio(x) * cauchy_density(x),
                -t,
                t,
                1e-11,
            );
            let substituted = cauchy_truncated_logratio(t);
            assert!(
                (direct - substituted).abs() < 1e-7,
                "T={t}: {direct} vs {substituted}"
            );
        }
    }

    #[test]
    fn truncated_logratio_tracks_the_tail_envelope() {
        // For large T the integral behaves like -(1/pi) log(1 + T^2) plus a
        // bounded positive contribution.
        let t: f64 = 1e4;
        let envelope = -(1.0 + t * t).ln() / std::f64::consts::PI;
        let v = cauchy_truncated_logratio(t);
        assert!(
            v > envelope - 0.5 && v < envelope + 1.0,
            "{v} vs {envelope}"
        );
    }

    #[test]
    fn log_g_diverges_under_the_alternative_by_quadrature() {
        // Truncated integral of log G against the Cauchy density exceeds any
        // fixed bound for large truncation: evidence that E[log G] = +inf.
        let log_g = |x: f64| {
            // log G = -1/2 + log cosh x computed stably.
            -0.5 + x.abs() - std::f64::consts::LN_2 + ln_one_plus_exp(-2.0 * x.abs())
        };
        let truncated = |t: f64| {
            let u_max = t.atan();
            adaptive_simpson(
                &|u: f64| log_g(u.tan()) / std::f64::consts::PI,
                -u_max,
                u_max,
                1e-10,
            )
        };
        let small = truncated(10.0);
        let big = truncated(1e8);
        assert!(big > small);
        assert!(big > 10.0, "T=1e8 gives {big}");
    }
}
