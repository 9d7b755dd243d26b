//! Frozen reference values recomputed with an independent implementation
//! of the same formulas (separate code path, separate language). Guards the
//! numerics against same-source regressions.

use rb_evalues::cauchy::cauchy_truncated_logratio;
use rb_evalues::pareto::gamma_kl;
use rb_evalues::sequential::{
    exact_fixed_time_summary, geometric_bets, log_burnin_estimate, BettingProcessSpec, BurnInSpec,
};

#[test]
fn frozen_reference_values() {
    // Conditional wealth estimate after a 4-step burn-in with two
    // successes, geometric bets at base 1.2.
    let spec = BettingProcessSpec::new(0.5, geometric_bets(1.2, 10)).unwrap();
    let ehat = log_burnin_estimate(&spec, 4, 2).exp();
    assert!((ehat - 0.44254756060036193).abs() < 1e-13, "{ehat}");

    // Truncated log-ratio integral at T = 1e4 (two quadratures agree to
    // their mutual end-panel uncertainty).
    let v = cauchy_truncated_logratio(1e4);
    assert!((v - (-5.373338414055592)).abs() < 1e-6, "{v}");

    // Same-shape Gamma divergence.
    assert!((gamma_kl(4, 2.0, 1.0) - 0.7725887222397811).abs() < 1e-15);

    // Exact expected log gap of the conditioned over the raw wealth at the
    // horizon, under the alternative.
    let burn = BurnInSpec::new(4, &spec).unwrap();
    let exact = exact_fixed_time_summary(&spec, &burn, 0.8, 10).unwrap();
    assert!(
        (exact["log_gap_alt"] - 0.023223217402022392).abs() < 1e-12,
        "{}",
        exact["log_gap_alt"]
    );
}
