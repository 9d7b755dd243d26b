//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS/FAIL line with its runtime. Tolerances are pinned here, in code.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

// `!(x <= bound)`-style checks are used on purpose: they also catch NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::Instant;

use rb_evalues::bernoulli::{bern_exact_improvement, bern_naive_e, bern_rb_g, BernNaiveSpec};
use rb_evalues::cauchy::{cauchy_e, cauchy_g, cauchy_truncated_logratio};
use rb_evalues::evar::models::{StdCauchy, StdNormal};
use rb_evalues::evar::seeding::labeled_rng;
use rb_evalues::evar::{mc_mean, ratio_check, sample_model, EVariableFn, MeanAcc};
use rb_evalues::extreal::{ext_div, gen_expectation, ExtReal};
use rb_evalues::finite_space::synth::{
    bernoulli_product_space, random_rv_table, random_sufficient_space, SynthSpace,
};
use rb_evalues::finite_space::{
    expected_utility, jensen_gap, mean_under, rao_blackwellize, RVTable, StatisticTable,
};
use rb_evalues::pareto::{gamma_kl, grow_value_check, wu_bound};
use rb_evalues::regression::{
    gro_evariable, gro_value, log_gro_evariable, FixedDesign, RegressionHypotheses, ResponseModel,
};
use rb_evalues::sequential::{
    ebh, enumerate_wealth_space, exact_fixed_time_summary, geometric_bets, log_burnin_rb_path,
    optional_stopping_audit, BettingProcessSpec, BurnInSpec, CompoundFinite, StoppingRule,
};
use rb_evalues::utility::{log_utility, power_utility, random_concave_pwl, ConcaveUtility};

const SUITE_SEED: u64 = 20_240_817;

fn report(criterion: usize, name: &str, failures: &[String], started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < budget_s;
    println!(
        "acceptance {criterion:02} {name}: {} ({elapsed:.2}s, budget {budget_s}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        failures.is_empty(),
        "criterion {criterion} failed:\n{}",
        failures.join("\n")
    );
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded budget: {elapsed:.2}s >= {budget_s}s"
    );
}

/// The eight utilities quantified over by the brute-force suites.
fn suite_utilities() -> Vec<ConcaveUtility> {
    let mut rng = labeled_rng(SUITE_SEED, "suite-utilities");
    let mut fs = vec![
        log_utility(),
        power_utility(2.0).unwrap(),
        power_utility(3.0).unwrap(),
    ];
    for _ in 0..5 {
        fs.push(random_concave_pwl(&mut rng, 5));
    }
    fs
}

/// Instances shared by criteria 1, 2 and 4: random space, random
/// nonnegative table (with occasional zero and infinite atoms), and its
/// conditioning.
fn suite1_instances(count: usize) -> Vec<(SynthSpace, RVTable, RVTable)> {
    let mut rng = labeled_rng(SUITE_SEED, "suite1-spaces");
    (0..count)
        .map(|_| {
            let inst = random_sufficient_space(&mut rng);
            let e = random_rv_table(&mut rng, &inst.space, 0.08, 0.03);
            let g = rao_blackwellize(&inst.space, &e, &inst.statistic, 0, true)
                .expect("synth statistic is sufficient");
            (inst, e, g)
        })
        .collect()
}

#[test]
fn criterion_01_utility_improvement_brute_force() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let utilities = suite_utilities();
    let mut strict_counts = vec![0usize; utilities.len()];
    let mut checked = 0usize;
    for (idx, (inst, e, g)) in suite1_instances(200).iter().enumerate() {
        for theta in 0..inst.space.n_theta() {
            for (ui, f) in utilities.iter().enumerate() {
                let ue = expected_utility(&inst.space, theta, e, f).unwrap();
                let ug = expected_utility(&inst.space, theta, g, f).unwrap();
                // Bounded-above utilities always have defined expectations.
                if matches!(f, ConcaveUtility::Power { .. })
                    && !(ue.is_defined() && ug.is_defined())
                {
                    failures.push(format!(
                        "space {idx} theta {theta} {}: undefined expectation",
                        f.label()
                    ));
                }
                let (Some(ve), Some(vg)) = (ue.value(), ug.value()) else {
                    continue;
                };
                checked += 1;
                let ok = match (vg, ve) {
                    (ExtReal::PosInf, _) => true,
                    (_, ExtReal::NegInf) => true,
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => a >= b - 1e-9,
                    _ => false,
                };
                if !ok {
                    failures.push(format!(
                        "space {idx} theta {theta} {}: f(G)={vg} < f(E)={ve}",
                        f.label()
                    ));
                }
                let strict = match (vg, ve) {
                    (ExtReal::PosInf, ExtReal::Finite(_) | ExtReal::NegInf) => true,
                    (ExtReal::Finite(_), ExtReal::NegInf) => true,
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => a > b + 1e-12,
                    _ => false,
                };
                if strict {
                    strict_counts[ui] += 1;
                }
            }
        }
    }
    if checked < 1000 {
        failures.push(format!("only {checked} defined comparisons"));
    }
    for (ui, f) in utilities.iter().enumerate() {
        if strict_counts[ui] == 0 {
            failures.push(format!("no strict improvement observed for {}", f.label()));
        }
    }
    report(
        1,
        "utility improvement on random spaces",
        &failures,
        started,
        30.0,
    );
}

#[test]
fn criterion_02_tower_identity() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for (idx, (inst, e, g)) in suite1_instances(200).iter().enumerate() {
        for theta in 0..inst.space.n_theta() {
            let me = mean_under(&inst.space, theta, e);
            let mg = mean_under(&inst.space, theta, g);
            let ok = match (me, mg) {
                (ExtReal::PosInf, ExtReal::PosInf) => true,
                (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= 1e-12,
                _ => false,
            };
            if !ok {
                failures.push(format!("space {idx} theta {theta}: {me} vs {mg}"));
            }
        }
    }
    report(2, "tower identity", &failures, started, 30.0);
}

#[test]
fn criterion_03_bernoulli_exact() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=12usize {
        let spec = BernNaiveSpec::from_growth_factor(0.5, 2.0, n).unwrap();
        let (space, statistic) = bernoulli_product_space(&[0.5, 0.7], &[0], &[1], n).unwrap();
        let e_table = RVTable::from_f64(
            space
                .atoms()
                .iter()
                .map(|a| {
                    let x1 = a.as_bytes()[0] - b'0';
                    bern_naive_e(&spec, x1)
                })
                .collect(),
        );
        let g_table = rao_blackwellize(&space, &e_table, &statistic, 0, true).unwrap();
        // Closed form versus brute force, atom by atom.
        for (i, label) in statistic.labels().iter().enumerate() {
            let k: usize = label.parse().unwrap();
            let closed = bern_rb_g(&spec, k).unwrap();
            let brute = g_table.values()[i].as_f64();
            if (closed - brute).abs() > 1e-12 {
                failures.push(format!("n={n} atom {i}: closed {closed} vs brute {brute}"));
            }
        }
        // Null means of both bets are 1.
        for (name, table) in [("E", &e_table), ("G", &g_table)] {
            let mean = mean_under(&space, 0, table).as_f64();
            if (mean - 1.0).abs() > 1e-12 {
                failures.push(format!("n={n}: null mean of {name} is {mean}"));
            }
        }
        // Strict log gap across the alternative grid.
        for tenths in 1..=9usize {
            let p = tenths as f64 / 10.0;
            let (gap, strict) = bern_exact_improvement(&spec, p, &log_utility()).unwrap();
            if !strict || gap.as_f64() <= 0.0 {
                failures.push(format!("n={n} p={p}: gap {gap} not strictly positive"));
            }
        }
    }
    report(3, "first-observation bet, exact", &failures, started, 10.0);
}

#[test]
fn criterion_04_ratio_bounds() {
    let started = Instant::now();
    let mut failures = Vec::new();
    // Finite spaces: exact ratio and log-ratio bounds under every theta.
    for (idx, (inst, e, g)) in suite1_instances(200).iter().enumerate() {
        let ratio: Vec<ExtReal> = e
            .values()
            .iter()
            .zip(g.values())
            .map(|(&ev, &gv)| ext_div(ev, gv).unwrap())
            .collect();
        let log_ratio: Vec<ExtReal> = ratio
            .iter()
            .map(|r| match r {
                ExtReal::PosInf => ExtReal::PosInf,
                ExtReal::Finite(v) if *v == 0.0 => ExtReal::NegInf,
                ExtReal::Finite(v) => ExtReal::Finite(v.ln()),
                ExtReal::NegInf => unreachable!(),
            })
            .collect();
        for theta in 0..inst.space.n_theta() {
            let table = inst.space.table(theta);
            let mean_ratio = gen_expectation(&ratio, table).unwrap().value();
            match mean_ratio {
                Some(ExtReal::Finite(v)) if v <= 1.0 + 1e-12 => {}
                other => failures.push(format!("space {idx} theta {theta}: ratio mean {other:?}")),
            }
            let mean_log = gen_expectation(&log_ratio, table).unwrap().value();
            match mean_log {
                Some(v) if v <= ExtReal::Finite(1e-12) => {}
                other => failures.push(format!(
                    "space {idx} theta {theta}: log-ratio mean {other:?}"
                )),
            }
        }
    }
    // The normal-vs-Cauchy pair at one million draws.
    let e_fn = || EVariableFn::new("E", |x: &f64| ExtReal::from_f64(cauchy_e(*x)));
    let g_fn = || EVariableFn::new("G", |x: &f64| ExtReal::from_f64(cauchy_g(*x)));
    let (ratio_null, log_null) = ratio_check(&StdNormal, &e_fn(), &g_fn(), 1_000_000, SUITE_SEED);
    let (ratio_alt, log_alt) = ratio_check(&StdCauchy, &e_fn(), &g_fn(), 1_000_000, SUITE_SEED);
    for (label, r) in [("null", &ratio_null), ("alternative", &ratio_alt)] {
        let m = r.mean.as_f64();
        if !(m <= 1.0 + 3.0 * r.std_error) {
            failures.push(format!(
                "cauchy pair {label}: ratio mean {m} se {}",
                r.std_error
            ));
        }
    }
    for (label, r) in [("null", &log_null), ("alternative", &log_alt)] {
        let ok = match r.mean {
            ExtReal::NegInf => true,
            ExtReal::Finite(v) => v <= 3.0 * r.std_error.max(1e-12),
            ExtReal::PosInf => false,
        };
        if !ok || r.undefined {
            failures.push(format!("cauchy pair {label}: log-ratio mean {:?}", r.mean));
        }
    }
    let tail = cauchy_truncated_logratio(1e4);
    if !(tail < -4.0) {
        failures.push(format!("truncated log-ratio at 1e4 is {tail}"));
    }
    report(4, "ratio comparison bounds", &failures, started, 60.0);
}

#[test]
fn criterion_05_regression_gro() {
    let started = Instant::now();
    let mut failures = Vec::new();
    // Identity-Gram design padded with a zero row so the residual space is
    // nontrivial: X^T X = I_2, sigma = 1, theta* = (1, 0), d = 1.
    let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
    let design = FixedDesign::new(&rows, 1.0, 1).unwrap();
    let hyp = RegressionHypotheses::new(&design, vec![1.0, 0.0]).unwrap();
    let value = gro_value(&design, &hyp).unwrap();
    if value != 0.5 {
        failures.push(format!("gro value {value} != 0.5"));
    }
    // Expected log under the alternative at 1e5 draws.
    let alt = ResponseModel::new(&design, &[1.0, 0.0]);
    let mut acc = MeanAcc::new();
    for y in sample_model(&alt, 100_000, SUITE_SEED) {
        acc.push(ExtReal::from_f64(
            log_gro_evariable(&design, &hyp, &y).unwrap(),
        ));
    }
    let r = acc.report();
    let err = (r.mean.as_f64() - 0.5).abs();
    if !(err <= 3.0 * r.std_error) {
        failures.push(format!("alt log mean {} se {}", r.mean, r.std_error));
    }
    // Null calibration across a nuisance grid.
    for nuisance in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let null_model = ResponseModel::new(&design, &[0.0, nuisance]);
        let e = {
            let design = FixedDesign::new(&rows, 1.0, 1).unwrap();
            let hyp = RegressionHypotheses::new(&design, vec![1.0, 0.0]).unwrap();
            EVariableFn::new("gro", move |y: &Vec<f64>| {
                ExtReal::from_f64(gro_evariable(&design, &hyp, y).unwrap())
            })
        };
        let r = mc_mean(&null_model, &e, 100_000, SUITE_SEED);
        let m = r.mean.as_f64();
        if !(m <= 1.0 + 3.0 * r.std_error) {
            failures.push(format!(
                "null mean at nuisance {nuisance}: {m} se {}",
                r.std_error
            ));
        }
    }
    // Residual-space perturbation leaves the e-value bit-identical.
    let y = vec![0.37, -1.12, 4.5];
    let y2 = vec![0.37, -1.12, -2.25];
    let h1 = gro_evariable(&design, &hyp, &y).unwrap();
    let h2 = gro_evariable(&design, &hyp, &y2).unwrap();
    if h1.to_bits() != h2.to_bits() {
        failures.push(format!("perturbation changed the e-value: {h1} vs {h2}"));
    }
    report(5, "regression growth optimality", &failures, started, 30.0);
}

#[test]
fn criterion_06_pareto_grow() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let target = gamma_kl(4, 2.0, 1.0);
    if (target - (4.0 * 2.0f64.ln() - 2.0)).abs() > 1e-14 {
        failures.push(format!("closed-form value {target}"));
    }
    // Independent quadrature oracle for the same-shape Gamma divergence.
    let oracle = {
        let k = 4usize;
        let (a1, a0) = (2.0f64, 1.0f64);
        let ln_fact3 = (1..=3).map(|i| (i as f64).ln()).sum::<f64>();
        let log_density = |t: f64, rate: f64| {
            (k as f64) * rate.ln() + (k as f64 - 1.0) * t.ln() - rate * t - ln_fact3
        };
        let integrand = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let l1 = log_density(t, a1);
            l1.exp() * (l1 - log_density(t, a0))
        };
        let panels = 64;
        let upper = 240.0;
        let step = upper / panels as f64;
        (0..panels)
            .map(|i| {
                rb_evalues::math::adaptive_simpson(
                    &integrand,
                    1e-12 + i as f64 * step,
                    1e-12 + (i + 1) as f64 * step,
                    1e-12,
                )
            })
            .sum::<f64>()
    };
    if (target - oracle).abs() > 1e-8 {
        failures.push(format!("closed form {target} vs quadrature {oracle}"));
    }
    // Growth estimates across scales: within tolerance and bit-identical.
    let mut reports = Vec::new();
    for m in [0.5, 1.0, 10.0] {
        let r = grow_value_check(1.0, 2.0, m, 5, 100_000, SUITE_SEED).unwrap();
        let err = (r.mean.as_f64() - target).abs();
        if !(err <= 3.0 * r.std_error) {
            failures.push(format!("m={m}: mean {} se {}", r.mean, r.std_error));
        }
        reports.push(r);
    }
    if !(reports[0] == reports[1] && reports[1] == reports[2]) {
        failures.push("paired-seed estimates differ across scales".into());
    }
    // Prior-bound behaviour near zero.
    let near_zero = wu_bound(1e-8, 5, 1.0, 2.0).unwrap();
    if !(near_zero < 1e-6) {
        failures.push(format!("bound at u=1e-8 is {near_zero}"));
    }
    let grid: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&u| wu_bound(u, 5, 1.0, 2.0).unwrap())
        .collect();
    if !grid.windows(2).all(|w| w[1] < w[0]) {
        failures.push(format!("bound not decreasing: {grid:?}"));
    }
    report(6, "heavy-tail growth optimality", &failures, started, 30.0);
}

#[test]
fn criterion_07_eprocess_audit() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let spec = BettingProcessSpec::new(0.5, geometric_bets(1.2, 10)).unwrap();
    let burn = BurnInSpec::new(4, &spec).unwrap();
    // Brute force over the full outcome space, in log space.
    for t in 4..=10usize {
        let (space, sview, wealth) = enumerate_wealth_space(&spec, &burn, 0.8, t).unwrap();
        let g = rao_blackwellize(&space, &wealth, &sview, 0, true).unwrap();
        let bits = rb_evalues::finite_space::synth::bernoulli_atom_bits(t);
        for (atom, pattern) in bits.iter().enumerate() {
            let mut outcomes = pattern.clone();
            outcomes.resize(10, 0);
            let log_g = log_burnin_rb_path(&spec, &burn, &outcomes).unwrap();
            let brute = g.values()[atom].as_f64().ln();
            if (log_g[t - 4] - brute).abs() > 1e-10 {
                failures.push(format!(
                    "t={t} atom {atom}: path {} vs brute {brute}",
                    log_g[t - 4]
                ));
            }
        }
    }
    let rules = vec![
        StoppingRule::FixedTime(4),
        StoppingRule::FixedTime(10),
        StoppingRule::ThresholdCross(5.0),
    ];
    // Null: the conditioned process is safe at every adapted rule.
    let audits = optional_stopping_audit(&spec, &burn, &rules, 0.5, 100_000, SUITE_SEED).unwrap();
    for audit in &audits {
        let m = audit.mean_g_at_stop.mean.as_f64();
        let se = audit.mean_g_at_stop.std_error;
        if !(m <= 1.0 + 3.0 * se) {
            failures.push(format!("null {}: mean {m} se {se}", audit.rule));
        }
    }
    // Alternative: the paired log gap is nonnegative within noise and
    // strictly positive by exact enumeration.
    let audits = optional_stopping_audit(&spec, &burn, &rules, 0.8, 100_000, SUITE_SEED).unwrap();
    for audit in &audits {
        let gap = audit.log_gap.mean.as_f64();
        let se = audit.log_gap.std_error;
        if !(gap >= -3.0 * se) {
            failures.push(format!("alt {}: gap {gap} se {se}", audit.rule));
        }
        let ratio = audit.ratio_e_over_g.mean.as_f64();
        let rse = audit.ratio_e_over_g.std_error;
        if !(ratio <= 1.0 + 3.0 * rse) {
            failures.push(format!("alt {}: ratio {ratio} se {rse}", audit.rule));
        }
    }
    let exact = exact_fixed_time_summary(&spec, &burn, 0.8, 10).unwrap();
    if !(exact["log_gap_alt"] > 0.0) {
        failures.push(format!("exact gap {}", exact["log_gap_alt"]));
    }
    let fixed10 = audits.iter().find(|a| a.rule == "fixed:10").unwrap();
    let err = (fixed10.log_gap.mean.as_f64() - exact["log_gap_alt"]).abs();
    if !(err <= 3.0 * fixed10.log_gap.std_error) {
        failures.push(format!(
            "sampled gap {} vs exact {}",
            fixed10.log_gap.mean, exact["log_gap_alt"]
        ));
    }
    report(7, "stopped-process audit", &failures, started, 60.0);
}

#[test]
fn criterion_08_jensen_gaps() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let utilities = suite_utilities();
    let mut rng = labeled_rng(SUITE_SEED, "jensen-spaces");
    let mut undefined_levels = 0usize;
    let mut defined_levels = 0usize;
    let mut zero_atoms = 0usize;
    let mut inf_atoms = 0usize;
    for idx in 0..500usize {
        let inst = random_sufficient_space(&mut rng);
        let x = random_rv_table(&mut rng, &inst.space, 0.12, 0.06);
        zero_atoms += x
            .values()
            .iter()
            .filter(|v| **v == ExtReal::Finite(0.0))
            .count();
        inf_atoms += x.values().iter().filter(|v| **v == ExtReal::PosInf).count();
        for theta in 0..inst.space.n_theta() {
            for f in &utilities {
                let gaps = jensen_gap(&inst.space, theta, &x, &inst.statistic, f).unwrap();
                for level in gaps {
                    match level.gap {
                        None => undefined_levels += 1,
                        Some(gap) => {
                            defined_levels += 1;
                            let ok = match gap {
                                ExtReal::PosInf => true,
                                ExtReal::NegInf => false,
                                ExtReal::Finite(v) => v >= -1e-9,
                            };
                            if !ok {
                                failures.push(format!(
                                    "space {idx} theta {theta} {} level {}: gap {gap}",
                                    f.label(),
                                    level.level
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    if zero_atoms == 0 || inf_atoms == 0 {
        failures.push(format!(
            "generator produced {zero_atoms} zero atoms, {inf_atoms} infinite atoms"
        ));
    }
    if undefined_levels == 0 {
        failures.push("no indeterminate level was exercised".into());
    }
    if defined_levels < 10_000 {
        failures.push(format!("only {defined_levels} defined levels"));
    }
    report(8, "conditional concavity gaps", &failures, started, 30.0);
}

#[test]
fn criterion_09_compound_and_ebh() {
    let started = Instant::now();
    let mut failures = Vec::new();
    // Compound budget preserved exactly under per-component conditioning.
    let mut rng = labeled_rng(SUITE_SEED, "compound-spaces");
    for idx in 0..50usize {
        let inst = random_sufficient_space(&mut rng);
        let k = 1 + (idx % 3);
        let components: Vec<RVTable> = (0..k)
            .map(|_| random_rv_table(&mut rng, &inst.space, 0.05, 0.0))
            .collect();
        let membership: Vec<Vec<usize>> = (0..inst.space.n_theta())
            .map(|t| (0..k).filter(|j| (t + j) % 2 == 0 || k == 1).collect())
            .collect();
        let compound = CompoundFinite::new(&inst.space, components, membership).unwrap();
        // Refine the statistic for half the components: refinements of a
        // sufficient partition stay sufficient.
        let statistics: Vec<StatisticTable> = (0..k)
            .map(|j| {
                if j % 2 == 0 {
                    inst.statistic.clone()
                } else {
                    StatisticTable::new(
                        inst.statistic
                            .labels()
                            .iter()
                            .enumerate()
                            .map(|(atom, label)| format!("{label}/{}", atom % 2))
                            .collect(),
                    )
                }
            })
            .collect();
        let conditioned = compound
            .rao_blackwellize(&inst.space, &statistics, 0)
            .unwrap();
        for theta in 0..inst.space.n_theta() {
            let (before, _) = compound.check(&inst.space, theta).unwrap();
            let (after, _) = conditioned.check(&inst.space, theta).unwrap();
            let ok = match (before, after) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= 1e-12,
                (a, b) => a == b,
            };
            if !ok {
                failures.push(format!("space {idx} theta {theta}: {before} vs {after}"));
            }
        }
    }
    // Worked threshold arithmetic.
    if ebh(&[0.0, 0.0, 0.0], 0.05).unwrap() != Vec::<usize>::new() {
        failures.push("all-zero e-values must reject nothing".into());
    }
    if ebh(&[25.0], 0.05).unwrap() != vec![0] {
        failures.push("single e-value 25 at level 0.05 must be rejected".into());
    }
    if ebh(&[41.0, 39.0], 0.05).unwrap() != vec![0, 1] {
        failures.push("pair (41, 39) at level 0.05 must both be rejected".into());
    }
    // Monotonicity over random inputs.
    let mut rng = labeled_rng(SUITE_SEED, "ebh-monotonicity");
    for _ in 0..1000usize {
        let k = 1 + rand::Rng::random_range(&mut rng, 0..10usize);
        let values: Vec<f64> = (0..k)
            .map(|_| rand::Rng::random::<f64>(&mut rng) * 80.0)
            .collect();
        let alpha = 0.02 + 0.4 * rand::Rng::random::<f64>(&mut rng);
        let before = ebh(&values, alpha).unwrap();
        let mut bumped = values.clone();
        let j = rand::Rng::random_range(&mut rng, 0..k);
        bumped[j] += rand::Rng::random::<f64>(&mut rng) * 50.0;
        let after = ebh(&bumped, alpha).unwrap();
        if after.len() < before.len() {
            failures.push(format!("rejections shrank: {values:?} -> {bumped:?}"));
        }
        for idx in before {
            if idx != j && !after.contains(&idx) && !after.contains(&j) {
                failures.push(format!("index {idx} lost after enlarging {j}"));
            }
        }
    }
    report(9, "compound budget and e-BH", &failures, started, 10.0);
}
