//! Resolved run specifications and their executors.
//!
//! A [`RunConfig`] is the exact, self-contained description of one run:
//! re-executing it reproduces every estimate bit for bit. Randomness flows
//! from the single `seed` through named streams, so adding a check never
//! perturbs existing ones.

use serde::{Deserialize, Serialize};

use rb_evalues::bernoulli::{bern_exact_improvement, bern_naive_e, bern_rb_g, BernNaiveSpec};
use rb_evalues::cauchy::{
    cauchy_e, cauchy_g, cauchy_log_ratio, cauchy_ratio, cauchy_truncated_logratio,
};
use rb_evalues::evar::models::{StdCauchy, StdNormal};
use rb_evalues::evar::seeding::labeled_rng;
use rb_evalues::evar::{mc_mean, ratio_check, sample_model, EVariableFn, MeanAcc};
use rb_evalues::extreal::ExtReal;
use rb_evalues::finite_space::synth::{
    bernoulli_product_space, random_rv_table, random_sufficient_space,
};
use rb_evalues::finite_space::{jensen_gap, mean_under, rao_blackwellize, RVTable, StatisticTable};
use rb_evalues::math::adaptive_simpson;
use rb_evalues::pareto::{
    gamma_kl, grow_null_calibration, grow_value_check, suff_law_check, wu_bound, ParetoSpec,
};
use rb_evalues::regression::{gro_value, log_gro_evariable, mle, RegressionDoc, ResponseModel};
use rb_evalues::sequential::{
    ebh, enumerate_wealth_space, exact_fixed_time_summary, log_burnin_rb_path,
    optional_stopping_audit, parse_rules, BettingProcessSpec, BurnInSpec, CompoundFinite,
};
use rb_evalues::utility::{log_utility, power_utility, random_concave_pwl};

use crate::report::{CheckRow, CmpKind, Format, Report};

/// One fully resolved run: output format plus the subcommand parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format: Format,
    #[serde(flatten)]
    pub spec: RunSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "snake_case")]
pub enum RunSpec {
    Bernoulli {
        p0: f64,
        lambda_exp: f64,
        n: usize,
        p: f64,
    },
    Cauchy {
        draws: usize,
        seed: u64,
    },
    Regression {
        design: RegressionDoc,
        draws: usize,
        seed: u64,
    },
    Pareto {
        alpha0: f64,
        alpha1: f64,
        m: f64,
        n: usize,
        draws: usize,
        seed: u64,
    },
    Eprocess {
        p0: f64,
        p: f64,
        bets: Vec<f64>,
        burnin: usize,
        rules: String,
        paths: usize,
        seed: u64,
    },
    Jensen {
        spaces: usize,
        seed: u64,
    },
    Compound {
        spaces: usize,
        seed: u64,
    },
    Ebh {
        evalues: Vec<f64>,
        alpha: f64,
    },
}

/// Executes a run config into a report (without timing).
pub fn execute(config: &RunConfig) -> Result<Report, String> {
    let rows = match &config.spec {
        RunSpec::Bernoulli {
            p0,
            lambda_exp,
            n,
            p,
        } => run_bernoulli(*p0, *lambda_exp, *n, *p)?,
        RunSpec::Cauchy { draws, seed } => run_cauchy(*draws, *seed)?,
        RunSpec::Regression {
            design,
            draws,
            seed,
        } => run_regression(design, *draws, *seed)?,
        RunSpec::Pareto {
            alpha0,
            alpha1,
            m,
            n,
            draws,
            seed,
        } => run_pareto(*alpha0, *alpha1, *m, *n, *draws, *seed)?,
        RunSpec::Eprocess {
            p0,
            p,
            bets,
            burnin,
            rules,
            paths,
            seed,
        } => run_eprocess(*p0, *p, bets, *burnin, rules, *paths, *seed)?,
        RunSpec::Jensen { spaces, seed } => run_jensen(*spaces, *seed)?,
        RunSpec::Compound { spaces, seed } => run_compound(*spaces, *seed)?,
        RunSpec::Ebh { evalues, alpha } => run_ebh(evalues, *alpha)?,
    };
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(config).map_err(|e| e.to_string())?,
        rows,
        duration_ms: 0,
    })
}

fn run_bernoulli(p0: f64, lambda_exp: f64, n: usize, p: f64) -> Result<Vec<CheckRow>, String> {
    let spec = BernNaiveSpec::from_growth_factor(p0, lambda_exp, n).map_err(|e| e.to_string())?;
    if n > 16 {
        return Err(format!(
            "enumeration over 2^{n} outcomes refused; use n <= 16"
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("p={p} outside (0,1)"));
    }
    let (space, statistic) =
        bernoulli_product_space(&[p0, p], &[0], &[1], n).map_err(|e| e.to_string())?;
    let e_table = RVTable::from_f64(
        space
            .atoms()
            .iter()
            .map(|a| bern_naive_e(&spec, a.as_bytes()[0] - b'0'))
            .collect(),
    );
    let g_table =
        rao_blackwellize(&space, &e_table, &statistic, 0, true).map_err(|e| e.to_string())?;
    let mut max_diff = 0.0f64;
    for (i, label) in statistic.labels().iter().enumerate() {
        let k: usize = label.parse().unwrap();
        let closed = bern_rb_g(&spec, k).map_err(|e| e.to_string())?;
        max_diff = max_diff.max((closed - g_table.values()[i].as_f64()).abs());
    }
    let mut rows = vec![
        CheckRow::numeric(
            "closed_vs_brute_max_abs_diff",
            max_diff,
            None,
            0.0,
            1e-12,
            CmpKind::AbsLe,
        ),
        CheckRow::numeric(
            "null_mean_naive",
            mean_under(&space, 0, &e_table).as_f64(),
            None,
            1.0,
            1e-12,
            CmpKind::AbsLe,
        ),
        CheckRow::numeric(
            "null_mean_conditioned",
            mean_under(&space, 0, &g_table).as_f64(),
            None,
            1.0,
            1e-12,
            CmpKind::AbsLe,
        ),
    ];
    let (gap, _) = bern_exact_improvement(&spec, p, &log_utility()).map_err(|e| e.to_string())?;
    rows.push(CheckRow::numeric(
        "log_gap_exact",
        gap.as_f64(),
        None,
        0.0,
        0.0,
        CmpKind::Gt,
    ));
    let (gap2, _) = bern_exact_improvement(&spec, p, &power_utility(2.0).unwrap())
        .map_err(|e| e.to_string())?;
    rows.push(CheckRow::numeric(
        "power2_gap_exact",
        gap2.as_f64(),
        None,
        0.0,
        0.0,
        CmpKind::Gt,
    ));
    Ok(rows)
}

fn run_cauchy(draws: usize, seed: u64) -> Result<Vec<CheckRow>, String> {
    if draws < 1000 {
        return Err("cauchy needs --draws >= 1000".into());
    }
    let mut rows = Vec::new();
    let quad = adaptive_simpson(
        &|x: f64| cauchy_g(x) * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        -40.0,
        40.0,
        1e-11,
    );
    rows.push(CheckRow::numeric(
        "g_null_mean_quadrature",
        quad,
        None,
        1.0,
        1e-8,
        CmpKind::AbsLe,
    ));
    let mut ratio_sup = f64::NEG_INFINITY;
    let mut x = -50.0;
    while x <= 50.0 {
        ratio_sup = ratio_sup.max(cauchy_ratio(x));
        x += 0.125;
    }
    rows.push(CheckRow::numeric(
        "ratio_sup_on_grid",
        ratio_sup,
        None,
        2.0,
        1e-12,
        CmpKind::Le,
    ));
    let e_fn = || EVariableFn::new("E", |x: &f64| ExtReal::from_f64(cauchy_e(*x)));
    let g_fn = || EVariableFn::new("G", |x: &f64| ExtReal::from_f64(cauchy_g(*x)));
    let (ratio_null, _) = ratio_check(&StdNormal, &e_fn(), &g_fn(), draws, seed);
    rows.push(CheckRow::numeric(
        "mc_ratio_mean_null",
        ratio_null.mean.as_f64(),
        Some(ratio_null.std_error),
        1.0,
        3.0 * ratio_null.std_error,
        CmpKind::Le,
    ));
    let (ratio_alt, log_alt) = ratio_check(&StdCauchy, &e_fn(), &g_fn(), draws, seed);
    rows.push(CheckRow::numeric(
        "mc_ratio_mean_alt",
        ratio_alt.mean.as_f64(),
        Some(ratio_alt.std_error),
        1.0,
        3.0 * ratio_alt.std_error,
        CmpKind::Le,
    ));
    rows.push(CheckRow::numeric(
        "mc_log_ratio_mean_alt",
        log_alt.mean.as_f64(),
        Some(log_alt.std_error),
        0.0,
        3.0 * log_alt.std_error,
        CmpKind::Le,
    ));
    rows.push(CheckRow::numeric(
        "truncated_logratio_1e4",
        cauchy_truncated_logratio(1e4),
        None,
        -4.0,
        0.0,
        CmpKind::Le,
    ));
    // The log ratio vanishes at the symmetry point.
    rows.push(CheckRow::numeric(
        "log_ratio_at_origin",
        cauchy_log_ratio(0.0),
        None,
        0.0,
        1e-15,
        CmpKind::AbsLe,
    ));
    Ok(rows)
}

fn run_regression(doc: &RegressionDoc, draws: usize, seed: u64) -> Result<Vec<CheckRow>, String> {
    if draws < 1000 {
        return Err("regression needs --draws >= 1000".into());
    }
    let (design, hyp) = doc.build().map_err(|e| e.to_string())?;
    let value = gro_value(&design, &hyp).map_err(|e| e.to_string())?;
    let mut rows = vec![CheckRow::numeric(
        "gro_value",
        value,
        None,
        0.0,
        0.0,
        CmpKind::Ge,
    )];
    // Expected log under the alternative.
    let alt = ResponseModel::new(&design, hyp.theta_star());
    let mut acc = MeanAcc::new();
    for y in sample_model(&alt, draws, seed) {
        acc.push(ExtReal::from_f64(
            log_gro_evariable(&design, &hyp, &y).map_err(|e| e.to_string())?,
        ));
    }
    let r = acc.report();
    rows.push(CheckRow::numeric(
        "mc_log_mean_alt",
        r.mean.as_f64(),
        Some(r.std_error),
        value,
        3.0 * r.std_error,
        CmpKind::AbsLe,
    ));
    // Null grid along the projected nuisance direction.
    let theta_bar =
        rb_evalues::regression::kl_projection(&design, &hyp).map_err(|e| e.to_string())?;
    for scale in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let mut theta_null = vec![0.0; design.k()];
        for j in design.d()..design.k() {
            theta_null[j] = scale * theta_bar[j];
        }
        let model = ResponseModel::new(&design, &theta_null);
        let (design2, hyp2) = doc.build().map_err(|e| e.to_string())?;
        let e = EVariableFn::new("gro", move |y: &Vec<f64>| {
            ExtReal::from_f64(
                rb_evalues::regression::gro_evariable(&design2, &hyp2, y).expect("valid design"),
            )
        });
        let r = mc_mean(&model, &e, draws, seed);
        rows.push(CheckRow::numeric(
            format!("null_mean[scale={scale}]"),
            r.mean.as_f64(),
            Some(r.std_error),
            1.0,
            3.0 * r.std_error,
            CmpKind::Le,
        ));
    }
    // Sufficiency reduction: responses with the same fit give the same
    // e-value up to rounding of the factorization.
    let probe: Vec<f64> = (0..design.n())
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let fit = mle(&design, &probe).map_err(|e| e.to_string())?;
    let fitted = design.mean_response(&fit);
    let residual: Vec<f64> = probe.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let y0: Vec<f64> = design
        .mean_response(hyp.theta_star())
        .iter()
        .enumerate()
        .map(|(i, v)| v + 0.37 * (i as f64 + 1.0))
        .collect();
    let y1: Vec<f64> = y0.iter().zip(&residual).map(|(a, r)| a + r).collect();
    let h0 = log_gro_evariable(&design, &hyp, &y0).map_err(|e| e.to_string())?;
    let h1 = log_gro_evariable(&design, &hyp, &y1).map_err(|e| e.to_string())?;
    rows.push(CheckRow::numeric(
        "residual_perturbation_log_shift",
        (h0 - h1).abs(),
        None,
        0.0,
        1e-9,
        CmpKind::AbsLe,
    ));
    Ok(rows)
}

fn run_pareto(
    alpha0: f64,
    alpha1: f64,
    m: f64,
    n: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<CheckRow>, String> {
    if draws < 1000 {
        return Err("pareto needs --draws >= 1000".into());
    }
    if n < 2 {
        return Err("pareto needs --n >= 2".into());
    }
    let target = gamma_kl(n - 1, alpha1, alpha0);
    let grow = grow_value_check(alpha0, alpha1, m, n, draws, seed).map_err(|e| e.to_string())?;
    let mut rows = vec![CheckRow::numeric(
        "grow_log_mean",
        grow.mean.as_f64(),
        Some(grow.std_error),
        target,
        3.0 * grow.std_error,
        CmpKind::AbsLe,
    )];
    let null =
        grow_null_calibration(alpha0, alpha1, m, n, draws, seed).map_err(|e| e.to_string())?;
    rows.push(CheckRow::numeric(
        "null_calibration",
        null.mean.as_f64(),
        Some(null.std_error),
        1.0,
        3.0 * null.std_error,
        CmpKind::AbsLe,
    ));
    let scaled_up =
        grow_value_check(alpha0, alpha1, m * 10.0, n, draws, seed).map_err(|e| e.to_string())?;
    let scaled_down =
        grow_value_check(alpha0, alpha1, m * 0.5, n, draws, seed).map_err(|e| e.to_string())?;
    rows.push(CheckRow::boolean(
        "scale_invariance_bitwise",
        grow == scaled_up && grow == scaled_down,
    ));
    if n as f64 * alpha1 > 1.0 {
        rows.push(CheckRow::numeric(
            "wu_bound_near_zero",
            wu_bound(1e-8, n, alpha0, alpha1).map_err(|e| e.to_string())?,
            None,
            1e-6,
            0.0,
            CmpKind::Le,
        ));
        let grid: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
            .iter()
            .map(|&u| wu_bound(u, n, alpha0, alpha1))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        rows.push(CheckRow::boolean(
            "wu_bound_decreasing",
            grid.windows(2).all(|w| w[1] < w[0]),
        ));
    }
    let spec = ParetoSpec::new(m, alpha1, n).map_err(|e| e.to_string())?;
    let law = suff_law_check(&spec, draws.max(1000), seed);
    rows.push(CheckRow::boolean("suff_stat_law_moments", law.pass));
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_eprocess(
    p0: f64,
    p: f64,
    bets: &[f64],
    burnin: usize,
    rules_text: &str,
    paths: usize,
    seed: u64,
) -> Result<Vec<CheckRow>, String> {
    if paths < 1000 {
        return Err("eprocess needs --paths >= 1000".into());
    }
    let spec = BettingProcessSpec::new(p0, bets.to_vec()).map_err(|e| e.to_string())?;
    let burn = BurnInSpec::new(burnin, &spec).map_err(|e| e.to_string())?;
    let rules = parse_rules(rules_text).map_err(|e| e.to_string())?;
    if rules.is_empty() {
        return Err("no stopping rules supplied".into());
    }
    let mut rows = Vec::new();
    let null_audit = optional_stopping_audit(&spec, &burn, &rules, p0, paths, seed)
        .map_err(|e| e.to_string())?;
    for audit in &null_audit {
        rows.push(CheckRow::numeric(
            format!("null_mean_g[{}]", audit.rule),
            audit.mean_g_at_stop.mean.as_f64(),
            Some(audit.mean_g_at_stop.std_error),
            1.0,
            3.0 * audit.mean_g_at_stop.std_error,
            CmpKind::Le,
        ));
    }
    let alt_audit =
        optional_stopping_audit(&spec, &burn, &rules, p, paths, seed).map_err(|e| e.to_string())?;
    for audit in &alt_audit {
        rows.push(CheckRow::numeric(
            format!("alt_log_gap[{}]", audit.rule),
            audit.log_gap.mean.as_f64(),
            Some(audit.log_gap.std_error),
            0.0,
            3.0 * audit.log_gap.std_error,
            CmpKind::Ge,
        ));
        rows.push(CheckRow::numeric(
            format!("alt_ratio_e_over_g[{}]", audit.rule),
            audit.ratio_e_over_g.mean.as_f64(),
            Some(audit.ratio_e_over_g.std_error),
            1.0,
            3.0 * audit.ratio_e_over_g.std_error,
            CmpKind::Le,
        ));
    }
    if spec.horizon() <= 12 {
        let mut max_diff = 0.0f64;
        for t in burn.m()..=spec.horizon() {
            let (space, sview, wealth) =
                enumerate_wealth_space(&spec, &burn, p, t).map_err(|e| e.to_string())?;
            let g =
                rao_blackwellize(&space, &wealth, &sview, 0, true).map_err(|e| e.to_string())?;
            let bits = rb_evalues::finite_space::synth::bernoulli_atom_bits(t);
            for (atom, pattern) in bits.iter().enumerate() {
                let mut outcomes = pattern.clone();
                outcomes.resize(spec.horizon(), 0);
                let log_g =
                    log_burnin_rb_path(&spec, &burn, &outcomes).map_err(|e| e.to_string())?;
                let brute = g.values()[atom].as_f64().ln();
                max_diff = max_diff.max((log_g[t - burn.m()] - brute).abs());
            }
        }
        rows.push(CheckRow::numeric(
            "brute_force_log_max_diff",
            max_diff,
            None,
            0.0,
            1e-10,
            CmpKind::AbsLe,
        ));
        let exact =
            exact_fixed_time_summary(&spec, &burn, p, spec.horizon()).map_err(|e| e.to_string())?;
        rows.push(CheckRow::numeric(
            "exact_log_gap_alt",
            exact["log_gap_alt"],
            None,
            0.0,
            0.0,
            CmpKind::Ge,
        ));
    }
    Ok(rows)
}

fn run_jensen(spaces: usize, seed: u64) -> Result<Vec<CheckRow>, String> {
    if spaces == 0 {
        return Err("jensen needs --spaces >= 1".into());
    }
    let mut utilities = vec![
        log_utility(),
        power_utility(2.0).unwrap(),
        power_utility(3.0).unwrap(),
    ];
    let mut pwl_rng = labeled_rng(seed, "pwl-utilities");
    for _ in 0..5 {
        utilities.push(random_concave_pwl(&mut pwl_rng, 5));
    }
    let mut rng = labeled_rng(seed, "jensen-spaces");
    let mut min_gap = f64::INFINITY;
    let mut defined = 0usize;
    let mut undefined = 0usize;
    for _ in 0..spaces {
        let inst = random_sufficient_space(&mut rng);
        let x = random_rv_table(&mut rng, &inst.space, 0.12, 0.06);
        for theta in 0..inst.space.n_theta() {
            for f in &utilities {
                let gaps = jensen_gap(&inst.space, theta, &x, &inst.statistic, f)
                    .map_err(|e| e.to_string())?;
                for level in gaps {
                    match level.gap {
                        None => undefined += 1,
                        Some(ExtReal::PosInf) => defined += 1,
                        Some(g) => {
                            defined += 1;
                            min_gap = min_gap.min(g.as_f64());
                        }
                    }
                }
            }
        }
    }
    Ok(vec![
        CheckRow::numeric("min_defined_gap", min_gap, None, 0.0, 1e-9, CmpKind::Ge),
        CheckRow::numeric(
            "defined_levels",
            defined as f64,
            None,
            1.0,
            0.0,
            CmpKind::Ge,
        ),
        CheckRow::numeric(
            "undefined_levels_reported",
            undefined as f64,
            None,
            0.0,
            0.0,
            CmpKind::Ge,
        ),
    ])
}

fn run_compound(spaces: usize, seed: u64) -> Result<Vec<CheckRow>, String> {
    if spaces == 0 {
        return Err("compound needs --spaces >= 1".into());
    }
    let mut rng = labeled_rng(seed, "compound-spaces");
    let mut max_drift = 0.0f64;
    let mut unit_budget_ok = true;
    for idx in 0..spaces {
        let inst = random_sufficient_space(&mut rng);
        let k = 1 + idx % 3;
        let components: Vec<RVTable> = (0..k)
            .map(|_| random_rv_table(&mut rng, &inst.space, 0.05, 0.0))
            .collect();
        let membership: Vec<Vec<usize>> = (0..inst.space.n_theta())
            .map(|t| (0..k).filter(|j| (t + j) % 2 == 0 || k == 1).collect())
            .collect();
        let compound = CompoundFinite::new(&inst.space, components, membership.clone())
            .map_err(|e| e.to_string())?;
        let statistics: Vec<StatisticTable> = (0..k).map(|_| inst.statistic.clone()).collect();
        let conditioned = compound
            .rao_blackwellize(&inst.space, &statistics, 0)
            .map_err(|e| e.to_string())?;
        for theta in 0..inst.space.n_theta() {
            let (before, _) = compound
                .check(&inst.space, theta)
                .map_err(|e| e.to_string())?;
            let (after, _) = conditioned
                .check(&inst.space, theta)
                .map_err(|e| e.to_string())?;
            max_drift = max_drift.max((before.as_f64() - after.as_f64()).abs());
        }
        // A bona fide compound of unit e-variables stays within budget
        // before and after conditioning.
        let units: Vec<RVTable> = (0..k)
            .map(|_| RVTable::constant(1.0, inst.space.n_atoms()))
            .collect();
        let unit_compound =
            CompoundFinite::new(&inst.space, units, membership).map_err(|e| e.to_string())?;
        let unit_conditioned = unit_compound
            .rao_blackwellize(&inst.space, &statistics, 0)
            .map_err(|e| e.to_string())?;
        for theta in 0..inst.space.n_theta() {
            let (_, ok1) = unit_compound
                .check(&inst.space, theta)
                .map_err(|e| e.to_string())?;
            let (_, ok2) = unit_conditioned
                .check(&inst.space, theta)
                .map_err(|e| e.to_string())?;
            unit_budget_ok &= ok1 && ok2;
        }
    }
    Ok(vec![
        CheckRow::numeric(
            "max_budget_drift_after_rb",
            max_drift,
            None,
            0.0,
            1e-12,
            CmpKind::AbsLe,
        ),
        CheckRow::boolean("unit_compound_within_budget", unit_budget_ok),
    ])
}

fn run_ebh(evalues: &[f64], alpha: f64) -> Result<Vec<CheckRow>, String> {
    if evalues.is_empty() {
        return Err("ebh needs at least one e-value".into());
    }
    if evalues.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err("e-values must be nonnegative".into());
    }
    let rejected = ebh(evalues, alpha).map_err(|e| e.to_string())?;
    let kk = evalues.len();
    // Recompute the largest feasible rank directly.
    let mut sorted: Vec<f64> = evalues.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best = 0;
    for rank in 1..=kk {
        if sorted[rank - 1] >= kk as f64 / (alpha * rank as f64) {
            best = rank;
        }
    }
    let consistent = rejected.len() == best
        && rejected
            .iter()
            .all(|&i| evalues[i] >= kk as f64 / (alpha * best.max(1) as f64));
    Ok(vec![
        CheckRow::numeric(
            "rejection_count",
            rejected.len() as f64,
            None,
            0.0,
            0.0,
            CmpKind::Ge,
        ),
        CheckRow::boolean("threshold_consistency", consistent),
    ])
}
