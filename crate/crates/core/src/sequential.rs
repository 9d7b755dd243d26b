//! E-processes under coarsened filtrations: Bernoulli wealth paths, the
//! burn-in conditioning, stopping rules, compound e-variables, and e-BH.
//!
//! A betting process against the null `p = p0` multiplies a factor
//! `exp(lambda_t x_t - psi(lambda_t))` per observation. Conditioning the
//! wealth on the view that reveals only the running success counts from a
//! burn-in time `M` onward replaces the first `M` factors by their exact
//! conditional expectation given the burn-in count: the first `M` bits are
//! exchangeable given their sum, so the average of `exp(sum lambda_i x_i)`
//! over arrangements is an elementary symmetric polynomial ratio,
//!
//! ```text
//! Ehat(k) = exp(-sum psi_i) * e_k(e^lambda_1, ..., e^lambda_M) / C(M, k).
//! ```
//!
//! Everything after `M` is measurable in the coarsened view and passes
//! through unchanged. The conditioned process is an e-process for the
//! coarsened filtration: its value at any stopping rule that inspects only
//! the running counts has null mean at most 1.
//!
//! Stopping rules evaluate path prefixes only, so a rule used on the
//! coarsened view cannot peek at per-observation detail; adaptedness is
//! structural rather than checked at run time.
//!
//! The running-count view is a sufficient filtration here because the
//! finite-horizon Bernoulli family is dominated by counting measure, which
//! this module relies on but does not (and could not, for arbitrary
//! user-supplied models) verify at run time.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::evar::seeding::block_rng;
use crate::evar::{MCReport, MeanAcc, BLOCK};
use crate::extreal::{ext_div, ExtReal};
use crate::finite_space::{
    mean_under, rao_blackwellize, FiniteSpace, RVTable, SpaceError, StatisticTable,
};
use crate::math::{ln_choose, logsumexp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequentialError {
    #[error("bad betting spec: {0}")]
    BadSpec(String),
    #[error("burn-in {m} outside 1..={horizon}")]
    BadBurnIn { m: usize, horizon: usize },
    #[error("outcome length {got} does not match horizon {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("bad compound spec: {0}")]
    BadCompound(String),
    #[error("alpha={0} outside (0,1)")]
    BadLevel(f64),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A predictable betting sequence against a Bernoulli null: the bets are
/// fixed in advance, one per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct BettingProcessSpec {
    p0: f64,
    bets: Vec<f64>,
}

impl BettingProcessSpec {
    pub fn new(p0: f64, bets: Vec<f64>) -> Result<Self, SequentialError> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(SequentialError::BadSpec(format!("p0={p0} outside (0,1)")));
        }
        if bets.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(SequentialError::BadSpec(
                "all bets must be positive and finite".into(),
            ));
        }
        Ok(BettingProcessSpec { p0, bets })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn bets(&self) -> &[f64] {
        &self.bets
    }

    pub fn horizon(&self) -> usize {
        self.bets.len()
    }

    /// `psi(lambda_t) = log(p0 e^lambda + 1 - p0)` for step `t` (0-based).
    pub fn psi(&self, t: usize) -> f64 {
        (self.p0 * self.bets[t].exp() + 1.0 - self.p0).ln()
    }

    fn check_outcomes(&self, outcomes: &[u8]) -> Result<(), SequentialError> {
        if outcomes.len() != self.horizon() {
            return Err(SequentialError::LengthMismatch {
                got: outcomes.len(),
                want: self.horizon(),
            });
        }
        Ok(())
    }
}

/// Bets in geometric progression: `base^0, base^1, ...`.
pub fn geometric_bets(base: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| base.powi(i as i32)).collect()
}

/// Log wealth after each step: entry `t` is `log E_t`, with `log E_0 = 0`.
pub fn log_wealth_path(
    spec: &BettingProcessSpec,
    outcomes: &[u8],
) -> Result<Vec<f64>, SequentialError> {
    spec.check_outcomes(outcomes)?;
    let mut path = Vec::with_capacity(spec.horizon() + 1);
    let mut acc = 0.0;
    path.push(acc);
    for (t, &x) in outcomes.iter().enumerate() {
        debug_assert!(x <= 1);
        acc += spec.bets[t] * x as f64 - spec.psi(t);
        path.push(acc);
    }
    Ok(path)
}

/// Wealth after each step on the natural scale, starting from 1.
pub fn wealth_path(
    spec: &BettingProcessSpec,
    outcomes: &[u8],
) -> Result<Vec<f64>, SequentialError> {
    Ok(log_wealth_path(spec, outcomes)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// Burn-in length: the coarsened view reveals the running sums from time
/// `M` onward only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurnInSpec {
    m: usize,
}

impl BurnInSpec {
    pub fn new(m: usize, spec: &BettingProcessSpec) -> Result<Self, SequentialError> {
        if m == 0 || m > spec.horizon() {
            return Err(SequentialError::BadBurnIn {
                m,
                horizon: spec.horizon(),
            });
        }
        Ok(BurnInSpec { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Log elementary symmetric polynomials of `exp(lambda_i)`: entry `k` is
/// `log e_k(e^{lambda_1}, ..., e^{lambda_M})`, by the stable
/// dynamic-programming recurrence in log space.
pub fn log_elementary_symmetric(lambdas: &[f64]) -> Vec<f64> {
    let m = lambdas.len();
    let mut le = vec![f64::NEG_INFINITY; m + 1];
    le[0] = 0.0;
    for (j, &lam) in lambdas.iter().enumerate() {
        for k in (1..=(j + 1)).rev() {
            le[k] = logsumexp(le[k], lam + le[k - 1]);
        }
    }
    le
}

/// Log of the burn-in conditional expectation of the time-`M` wealth given
/// `k` burn-in successes.
pub fn log_burnin_estimate(spec: &BettingProcessSpec, m: usize, k: usize) -> f64 {
    debug_assert!(m >= 1 && m <= spec.horizon() && k <= m);
    let psi_sum: f64 = (0..m).map(|t| spec.psi(t)).sum();
    let le = log_elementary_symmetric(&spec.bets[..m]);
    -psi_sum + le[k] - ln_choose(m, k)
}

/// Log of the conditioned wealth path from the burn-in time onward: entry
/// `i` is `log G_{M+i}` for `i = 0..=horizon-M`.
///
/// With a single-step burn-in, or with identical burn-in bets, the
/// conditioning reveals the wealth already and `G = E`.
pub fn log_burnin_rb_path(
    spec: &BettingProcessSpec,
    burn: &BurnInSpec,
    outcomes: &[u8],
) -> Result<Vec<f64>, SequentialError> {
    spec.check_outcomes(outcomes)?;
    let m = burn.m();
    let k: usize = outcomes[..m].iter().map(|&x| x as usize).sum();
    let base = log_burnin_estimate(spec, m, k);
    let mut path = Vec::with_capacity(spec.horizon() - m + 1);
    let mut acc = base;
    path.push(acc);
    for t in m..spec.horizon() {
        acc += spec.bets[t] * outcomes[t] as f64 - spec.psi(t);
        path.push(acc);
    }
    Ok(path)
}

/// The conditioned wealth path on the natural scale.
pub fn burnin_rb_path(
    spec: &BettingProcessSpec,
    burn: &BurnInSpec,
    outcomes: &[u8],
) -> Result<Vec<f64>, SequentialError> {
    Ok(log_burnin_rb_path(spec, burn, outcomes)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// A stopping rule over a path; rules see prefixes only.
#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// Stop at a fixed time (clamped into the path's time range).
    FixedTime(usize),
    /// Stop the first time the path value reaches the level.
    ThresholdCross(f64),
    /// Stop when any sub-rule fires.
    FirstOf(Vec<StoppingRule>),
}

impl StoppingRule {
    /// Whether the rule fires at the last point of `prefix`, which covers
    /// times `t0..=t0 + prefix.len() - 1`.
    fn fires(&self, prefix: &[f64], t0: usize) -> bool {
        let t = t0 + prefix.len() - 1;
        match self {
            StoppingRule::FixedTime(at) => t >= *at,
            StoppingRule::ThresholdCross(level) => *prefix.last().unwrap() >= *level,
            StoppingRule::FirstOf(rules) => rules.iter().any(|r| r.fires(prefix, t0)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StoppingRule::FixedTime(t) => format!("fixed:{t}"),
            StoppingRule::ThresholdCross(level) => format!("cross:{level}"),
            StoppingRule::FirstOf(rules) => {
                let inner: Vec<String> = rules.iter().map(|r| r.label()).collect();
                format!("first-of({})", inner.join(","))
            }
        }
    }
}

/// Runs a rule over a path whose entry `i` is the value at time `t0 + i`:
/// returns the stopping time and the path value there. Falls back to the
/// final time when the rule never fires.
pub fn run_stopped(path: &[f64], t0: usize, rule: &StoppingRule) -> (usize, f64) {
    assert!(!path.is_empty());
    for i in 0..path.len() {
        if rule.fires(&path[..=i], t0) {
            return (t0 + i, path[i]);
        }
    }
    (t0 + path.len() - 1, *path.last().unwrap())
}

/// Audit of one stopping rule over simulated paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleAudit {
    pub rule: String,
    /// Mean of the conditioned wealth at the stop.
    pub mean_g_at_stop: MCReport,
    /// Mean of `E_tau / G_tau` under the division conventions.
    pub ratio_e_over_g: MCReport,
    /// Mean of `log G_tau - log E_tau` on paired paths.
    pub log_gap: MCReport,
}

/// Simulates Bernoulli(`p`) paths and audits each rule against the
/// conditioned process.
///
/// Rules are evaluated on the conditioned path only (times `M..=horizon`),
/// so they are stopping times of the coarsened filtration by construction.
pub fn optional_stopping_audit(
    spec: &BettingProcessSpec,
    burn: &BurnInSpec,
    rules: &[StoppingRule],
    p: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<RuleAudit>, SequentialError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SequentialError::BadSpec(format!("p={p} outside (0,1)")));
    }
    assert!(n_paths >= 2);
    let horizon = spec.horizon();
    let m = burn.m();
    let label = format!("eprocess(p={p},horizon={horizon})");
    let blocks = n_paths.div_ceil(BLOCK);
    let mut g_shards: Vec<Vec<(usize, MeanAcc)>> = vec![Vec::new(); rules.len()];
    let mut r_shards: Vec<Vec<(usize, MeanAcc)>> = vec![Vec::new(); rules.len()];
    let mut gap_shards: Vec<Vec<(usize, MeanAcc)>> = vec![Vec::new(); rules.len()];
    let mut outcomes = vec![0u8; horizon];
    for b in 0..blocks {
        let mut rng = block_rng(seed, &label, b as u64);
        let count = BLOCK.min(n_paths - b * BLOCK);
        let mut g_accs: Vec<MeanAcc> = rules.iter().map(|_| MeanAcc::new()).collect();
        let mut r_accs: Vec<MeanAcc> = rules.iter().map(|_| MeanAcc::new()).collect();
        let mut gap_accs: Vec<MeanAcc> = rules.iter().map(|_| MeanAcc::new()).collect();
        for _ in 0..count {
            for x in outcomes.iter_mut() {
                let u: f64 = rand::Rng::random(&mut rng);
                *x = if u < p { 1 } else { 0 };
            }
            let log_e = log_wealth_path(spec, &outcomes)?;
            let log_g = log_burnin_rb_path(spec, burn, &outcomes)?;
            for (j, rule) in rules.iter().enumerate() {
                let (tau, log_g_tau) = run_stopped(&log_g, m, rule);
                let log_e_tau = log_e[tau];
                g_accs[j].push(ExtReal::from_f64(log_g_tau.exp()));
                let ratio = ext_div(
                    ExtReal::from_f64(log_e_tau.exp()),
                    ExtReal::from_f64(log_g_tau.exp()),
                )
                .expect("wealths are nonnegative");
                r_accs[j].push(ratio);
                gap_accs[j].push(ExtReal::from_f64(log_g_tau - log_e_tau));
            }
        }
        for j in 0..rules.len() {
            g_shards[j].push((b, std::mem::take(&mut g_accs[j])));
            r_shards[j].push((b, std::mem::take(&mut r_accs[j])));
            gap_shards[j].push((b, std::mem::take(&mut gap_accs[j])));
        }
    }
    Ok(rules
        .iter()
        .enumerate()
        .map(|(j, rule)| RuleAudit {
            rule: rule.label(),
            mean_g_at_stop: MeanAcc::merge_ordered(std::mem::take(&mut g_shards[j])).report(),
            ratio_e_over_g: MeanAcc::merge_ordered(std::mem::take(&mut r_shards[j])).report(),
            log_gap: MeanAcc::merge_ordered(std::mem::take(&mut gap_shards[j])).report(),
        })
        .collect())
}

/// The product-Bernoulli space of all length-`t` outcome prefixes under the
/// null `p0` and an alternative `p`, together with the coarsened-view
/// statistic `(S_M, ..., S_t)` and the wealth table `E_t`. The brute-force
/// counterpart of [`log_burnin_rb_path`] for small horizons.
pub fn enumerate_wealth_space(
    spec: &BettingProcessSpec,
    burn: &BurnInSpec,
    p_alt: f64,
    t: usize,
) -> Result<(FiniteSpace, StatisticTable, RVTable), SequentialError> {
    if t < burn.m() || t > spec.horizon() {
        return Err(SequentialError::BadSpec(format!(
            "time {t} outside burn-in..=horizon"
        )));
    }
    if t > 20 {
        return Err(SequentialError::BadSpec(format!(
            "enumeration over 2^{t} outcomes is too large"
        )));
    }
    let (space, _) =
        crate::finite_space::synth::bernoulli_product_space(&[spec.p0(), p_alt], &[0], &[1], t)?;
    let bits = crate::finite_space::synth::bernoulli_atom_bits(t);
    let mut sview = Vec::with_capacity(bits.len());
    let mut wealth = Vec::with_capacity(bits.len());
    let m = burn.m();
    for pattern in &bits {
        let mut sums = Vec::with_capacity(t - m + 1);
        let mut running: usize = pattern[..m].iter().map(|&b| b as usize).sum();
        sums.push(running);
        for &b in &pattern[m..t] {
            running += b as usize;
            sums.push(running);
        }
        let label: Vec<String> = sums.iter().map(|s| s.to_string()).collect();
        sview.push(label.join("|"));
        let log_e: f64 = pattern
            .iter()
            .enumerate()
            .map(|(i, &b)| spec.bets[i] * b as f64 - spec.psi(i))
            .sum();
        wealth.push(ExtReal::from_f64(log_e.exp()));
    }
    Ok((space, StatisticTable::new(sview), RVTable::new(wealth)))
}

/// A compound e-variable on a finite space: component tables plus, for each
/// parameter, the set of components whose null includes it.
#[derive(Debug, Clone)]
pub struct CompoundFinite {
    components: Vec<RVTable>,
    /// `membership[theta]` lists the component indices whose null contains
    /// that parameter.
    membership: Vec<Vec<usize>>,
}

impl CompoundFinite {
    pub fn new(
        space: &FiniteSpace,
        components: Vec<RVTable>,
        membership: Vec<Vec<usize>>,
    ) -> Result<Self, SequentialError> {
        if components.is_empty() {
            return Err(SequentialError::BadCompound("no components".into()));
        }
        if membership.len() != space.n_theta() {
            return Err(SequentialError::BadCompound(format!(
                "membership for {} parameters, space has {}",
                membership.len(),
                space.n_theta()
            )));
        }
        let k = components.len();
        for table in &components {
            if table.len() != space.n_atoms() {
                return Err(SequentialError::BadCompound(
                    "component length mismatch".into(),
                ));
            }
        }
        for sets in &membership {
            if sets.iter().any(|&j| j >= k) {
                return Err(SequentialError::BadCompound(
                    "membership index out of range".into(),
                ));
            }
        }
        Ok(CompoundFinite {
            components,
            membership,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[RVTable] {
        &self.components
    }

    /// Sum over active components of `E_theta[E_k]`, and whether it
    /// respects the compound budget `K` (exact arithmetic, 1e-12 slack).
    pub fn check(
        &self,
        space: &FiniteSpace,
        theta: usize,
    ) -> Result<(ExtReal, bool), SequentialError> {
        if theta >= space.n_theta() {
            return Err(SequentialError::BadCompound(format!(
                "parameter {theta} out of range"
            )));
        }
        let mut sum = ExtReal::Finite(0.0);
        for &j in &self.membership[theta] {
            sum = sum
                .checked_add(mean_under(space, theta, &self.components[j]))
                .expect("nonnegative means");
        }
        let ok = sum <= ExtReal::Finite(self.k() as f64 + 1e-12);
        Ok((sum, ok))
    }

    /// Conditions every component on its own statistic; the compound budget
    /// is preserved exactly, component by component.
    pub fn rao_blackwellize(
        &self,
        space: &FiniteSpace,
        statistics: &[StatisticTable],
        theta_ref: usize,
    ) -> Result<CompoundFinite, SequentialError> {
        if statistics.len() != self.k() {
            return Err(SequentialError::BadCompound(format!(
                "{} statistics for {} components",
                statistics.len(),
                self.k()
            )));
        }
        let conditioned = self
            .components
            .iter()
            .zip(statistics)
            .map(|(e, s)| rao_blackwellize(space, e, s, theta_ref, true))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CompoundFinite {
            components: conditioned,
            membership: self.membership.clone(),
        })
    }
}

/// Monte Carlo counterpart of [`CompoundFinite::check`] for sampled models:
/// estimates the mean of the sum of the active components and accepts at
/// three standard errors of the budget `K`.
pub fn compound_check_mc<M: crate::evar::Model>(
    model: &M,
    components: &[crate::evar::EVariableFn<M::Point>],
    active: &[usize],
    n: usize,
    seed: u64,
) -> Result<(MCReport, bool), SequentialError> {
    if components.is_empty() {
        return Err(SequentialError::BadCompound("no components".into()));
    }
    if active.iter().any(|&j| j >= components.len()) {
        return Err(SequentialError::BadCompound(
            "active index out of range".into(),
        ));
    }
    assert!(n >= 2);
    let label = format!("compound/{}", model.label());
    let blocks = n.div_ceil(BLOCK);
    let mut shards = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let mut rng = block_rng(seed, &label, b as u64);
        let count = BLOCK.min(n - b * BLOCK);
        let mut acc = MeanAcc::new();
        for _ in 0..count {
            let x = model.draw(&mut rng);
            let mut sum = ExtReal::Finite(0.0);
            for &j in active {
                sum = sum
                    .checked_add(components[j].evaluate(&x))
                    .expect("nonnegative components");
            }
            acc.push(sum);
        }
        shards.push((b, acc));
    }
    let report = MeanAcc::merge_ordered(shards).report();
    let k = components.len() as f64;
    let ok = match report.mean {
        ExtReal::Finite(m) => m <= k + 3.0 * report.std_error,
        ExtReal::NegInf => true,
        ExtReal::PosInf => false,
    };
    Ok((report, ok))
}

/// The e-BH rejection set: the `k` hypotheses with the largest e-values,
/// for the largest `k` whose `k`-th order statistic is at least
/// `K / (alpha k)`. Ties break deterministically by index.
pub fn ebh(e_values: &[f64], alpha: f64) -> Result<Vec<usize>, SequentialError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SequentialError::BadLevel(alpha));
    }
    assert!(
        e_values.iter().all(|v| !v.is_nan()),
        "e-values must not be NaN"
    );
    let kk = e_values.len();
    let mut order: Vec<usize> = (0..kk).collect();
    order.sort_by(|&a, &b| {
        e_values[b]
            .partial_cmp(&e_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut best = 0;
    for rank in 1..=kk {
        let value = e_values[order[rank - 1]];
        if value >= kk as f64 / (alpha * rank as f64) {
            best = rank;
        }
    }
    let mut rejected: Vec<usize> = order[..best].to_vec();
    rejected.sort_unstable();
    Ok(rejected)
}

/// One paired estimate used by [`asymptotic_wrapper`]: means of a sequence
/// member and of its conditioned version, with the standard error of their
/// paired difference (zero for exact computations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEstimate {
    pub mean_e: ExtReal,
    pub mean_g: ExtReal,
    pub gap_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRow {
    pub n: usize,
    pub model: String,
    pub estimate: PairEstimate,
    /// Conditioning did not hurt the null mean: `mean_g <= mean_e + 3 se`.
    pub rb_not_worse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
    /// Per grid point: the worst (largest) mean over the supplied null
    /// models, for the original and conditioned sequences. The limit
    /// behaviour itself is reported, never asserted: no finite run can
    /// decide a limsup.
    pub trend: Vec<(usize, f64, f64)>,
    pub all_rb_not_worse: bool,
}

/// Evaluates a sequence of e-variables and their conditioned versions over
/// a growing sample-size grid and a set of null models, asserting only the
/// per-point comparison and reporting the worst-case trend.
pub fn asymptotic_wrapper(
    n_grid: &[usize],
    model_labels: &[String],
    mut estimate: impl FnMut(usize, usize) -> PairEstimate,
) -> Result<AsymptoticReport, SequentialError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SequentialError::BadSpec(
            "sample-size grid must be strictly increasing".into(),
        ));
    }
    if model_labels.is_empty() {
        return Err(SequentialError::BadSpec("no null models".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len() * model_labels.len());
    let mut trend = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut worst_e = f64::NEG_INFINITY;
        let mut worst_g = f64::NEG_INFINITY;
        for (mi, label) in model_labels.iter().enumerate() {
            let est = estimate(n, mi);
            let rb_not_worse = match (est.mean_g, est.mean_e) {
                (ExtReal::Finite(g), ExtReal::Finite(e)) => g <= e + 3.0 * est.gap_se + 1e-12,
                (g, e) => g <= e,
            };
            worst_e = worst_e.max(est.mean_e.as_f64());
            worst_g = worst_g.max(est.mean_g.as_f64());
            rows.push(AsymptoticRow {
                n,
                model: label.clone(),
                estimate: est,
                rb_not_worse,
            });
        }
        trend.push((n, worst_e, worst_g));
    }
    let all_rb_not_worse = rows.iter().all(|r| r.rb_not_worse);
    Ok(AsymptoticReport {
        rows,
        trend,
        all_rb_not_worse,
    })
}

/// Parses a bets argument: either a comma list of positive reals or
/// `geometric:base,count`.
pub fn parse_bets(text: &str) -> Result<Vec<f64>, SequentialError> {
    if let Some(rest) = text.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(SequentialError::BadSpec(format!(
                "expected geometric:base,count, got {text:?}"
            )));
        }
        let base: f64 = parts[0]
            .parse()
            .map_err(|e| SequentialError::BadSpec(format!("bad base: {e}")))?;
        let count: usize = parts[1]
            .parse()
            .map_err(|e| SequentialError::BadSpec(format!("bad count: {e}")))?;
        if !(base > 0.0) || count == 0 {
            return Err(SequentialError::BadSpec(
                "geometric bets need base > 0 and count >= 1".into(),
            ));
        }
        return Ok(geometric_bets(base, count));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| SequentialError::BadSpec(format!("bad bet {s:?}: {e}")))
        })
        .collect()
}

/// Parses a rules argument: comma list of `fixed:T` and `cross:LEVEL`.
pub fn parse_rules(text: &str) -> Result<Vec<StoppingRule>, SequentialError> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            if let Some(t) = item.strip_prefix("fixed:") {
                let at: usize = t
                    .parse()
                    .map_err(|e| SequentialError::BadSpec(format!("bad fixed time: {e}")))?;
                Ok(StoppingRule::FixedTime(at))
            } else if let Some(level) = item.strip_prefix("cross:") {
                let level: f64 = level
                    .parse()
                    .map_err(|e| SequentialError::BadSpec(format!("bad level: {e}")))?;
                Ok(StoppingRule::ThresholdCross(level))
            } else {
                Err(SequentialError::BadSpec(format!(
                    "unknown rule {item:?}; expected fixed:T or cross:LEVEL"
                )))
            }
        })
        .collect()
}

/// Exact mean of the conditioned wealth at a fixed time under a parameter,
/// by full enumeration; the oracle behind the sampled audits.
pub fn exact_fixed_time_summary(
    spec: &BettingProcessSpec,
    burn: &BurnInSpec,
    p_alt: f64,
    t: usize,
) -> Result<BTreeMap<&'static str, f64>, SequentialError> {
    let (space, sview, wealth) = enumerate_wealth_space(spec, burn, p_alt, t)?;
    let g = rao_blackwellize(&space, &wealth, &sview, 0, true)?;
    let mut out = BTreeMap::new();
    out.insert("mean_e_null", mean_under(&space, 0, &wealth).as_f64());
    out.insert("mean_g_null", mean_under(&space, 0, &g).as_f64());
    let log_gap_alt: f64 = space
        .table(1)
        .iter()
        .enumerate()
        .map(|(i, &prob)| prob * (g.values()[i].as_f64().ln() - wealth.values()[i].as_f64().ln()))
        .sum();
    out.insert("log_gap_alt", log_gap_alt);
    Ok(out)
}
