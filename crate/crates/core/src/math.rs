//! Small numeric helpers shared across modules: stable log-domain sums,
//! log-binomials, and an adaptive Simpson integrator.

/// `log(exp(a) + exp(b))` without overflow.
pub fn logsumexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log(1 + exp(y))`, stable for large `|y|`.
pub fn ln_one_plus_exp(y: f64) -> f64 {
    if y > 36.0 {
        // 1 is below the rounding threshold of exp(y).
        y
    } else if y < -36.0 {
        y.exp()
    } else {
        y.exp().ln_1p()
    }
}

/// `log n!` by direct summation (desk-scale integer factorials).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `log C(n, k)` by summing log ratios; exact enough for `n <= 64`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    assert!(k <= n, "ln_choose: k={k} > n={n}");
    let k = k.min(n - k);
    (1..=k)
        .map(|i| (((n - k + i) as f64) / (i as f64)).ln())
        .sum()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`.
///
/// The integrand must be finite on the closed interval. Recursion depth is
/// capped; the final estimate carries the usual Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive_in_range() {
        let v = logsumexp(1.0, 2.0);
        assert!((v - (1f64.exp() + 2f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn logsumexp_survives_large_arguments() {
        let v = logsumexp(1000.0, 1001.0);
        assert!((v - (1001.0 + (-1.0f64).exp().ln_1p())).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_neg_infinity_identity() {
        assert_eq!(logsumexp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(
            logsumexp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn ln_choose_small_values() {
        assert!((ln_choose(4, 2) - 6.0f64.ln()).abs() < 1e-14);
        assert!((ln_choose(10, 3) - 120.0f64.ln()).abs() < 1e-13);
        assert_eq!(ln_choose(7, 0), 0.0);
        assert_eq!(ln_choose(7, 7), 0.0);
    }

    #[test]
    fn ln_one_plus_exp_extremes() {
        assert_eq!(ln_one_plus_exp(500.0), 500.0);
        assert!(ln_one_plus_exp(-500.0).abs() < 1e-200);
        assert!((ln_one_plus_exp(0.0) - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn simpson_polynomial_and_transcendental() {
        let cube = |x: f64| x * x * x;
        assert!((adaptive_simpson(&cube, 0.0, 2.0, 1e-12) - 4.0).abs() < 1e-10);
        let gauss = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((adaptive_simpson(&gauss, -10.0, 10.0, 1e-12) - 1.0).abs() < 1e-10);
    }
}
