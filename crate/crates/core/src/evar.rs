//! Seeded Monte Carlo evaluation of e-variables on sampled models.
//!
//! Everything here is deterministic given `(model, n, seed)`. Draws are
//! organized into fixed-size blocks; block `b` is generated from the seed
//! derived for label `"block/b"`, and block accumulators are merged in block
//! order. Sharding work across workers therefore cannot change a result:
//! the block layout is a function of `n` alone, and [`MeanAcc::merge_ordered`]
//! canonicalizes the merge order.
//!
//! Infinite evaluations are tracked per sign rather than averaged: a report
//! whose draws hit `+inf` only has mean `+inf`, one that hits both signs is
//! flagged undefined.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extreal::{ext_div, ExtReal};

pub mod models;
pub mod seeding;

use seeding::block_rng;

/// Draws per block; the unit of deterministic sharding.
pub const BLOCK: usize = 8192;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvarError {
    /// Exact permutation averaging is capped at 8 coordinates.
    #[error("too many permutations: n={0} > 8 in exact mode")]
    TooManyPermutations(usize),
    #[error("sampled permutation mode requires k >= 1")]
    EmptyPermutationSample,
}

/// A sampled model: a deterministic seeded sampler over an outcome type.
pub trait Model {
    type Point;

    /// Stable label used in reports and seed derivation.
    fn label(&self) -> String;

    /// Draws one outcome.
    fn draw(&self, rng: &mut ChaCha12Rng) -> Self::Point;

    /// Log-density at a point, when the family has one.
    fn log_density(&self, _x: &Self::Point) -> Option<f64> {
        None
    }
}

/// Samples `n` outcomes in the canonical block layout.
pub fn sample_model<M: Model>(model: &M, n: usize, seed: u64) -> Vec<M::Point> {
    let mut out = Vec::with_capacity(n);
    let blocks = n.div_ceil(BLOCK);
    for b in 0..blocks {
        let mut rng = block_rng(seed, &model.label(), b as u64);
        let count = BLOCK.min(n - b * BLOCK);
        for _ in 0..count {
            out.push(model.draw(&mut rng));
        }
    }
    out
}

/// A nonnegative e-variable evaluator over outcomes of type `P`.
pub struct EVariableFn<P: ?Sized> {
    label: String,
    eval: Box<dyn Fn(&P) -> ExtReal + Send + Sync>,
}

impl<P: ?Sized> EVariableFn<P> {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&P) -> ExtReal + Send + Sync + 'static,
    ) -> Self {
        EVariableFn {
            label: label.into(),
            eval: Box::new(eval),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates at an outcome; panics on a negative value, which would
    /// violate the e-variable contract.
    pub fn evaluate(&self, x: &P) -> ExtReal {
        // Normalize IEEE infinities that user closures may produce (e.g. an
        // overflowed exp) into the sentinel states.
        let v = ExtReal::from_f64((self.eval)(x).as_f64());
        assert!(v.is_nonneg(), "{} produced negative value {v}", self.label);
        v
    }
}

/// A Monte Carlo estimate with extended-real bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    /// Mean over all draws: `+-inf` when infinite draws of a single sign
    /// occurred, otherwise the mean of the finite draws.
    pub mean: ExtReal,
    /// Sample standard deviation of the finite draws divided by sqrt of
    /// their count.
    pub std_error: f64,
    /// Total number of draws.
    pub n: u64,
    pub minus_inf_count: u64,
    pub plus_inf_count: u64,
    /// Set when draws hit both `+inf` and `-inf` (or a single draw was an
    /// indeterminate difference), so no mean can be assigned.
    pub undefined: bool,
}

/// Streaming mean/variance accumulator with infinity counters.
///
/// Merging follows Chan's parallel combination; [`MeanAcc::merge_ordered`]
/// sorts shards by block index so any merge schedule yields identical bits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeanAcc {
    n_finite: u64,
    mean: f64,
    m2: f64,
    plus_inf: u64,
    minus_inf: u64,
    indeterminate: u64,
    total: u64,
}

impl MeanAcc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: ExtReal) {
        self.total += 1;
        match v {
            ExtReal::PosInf => self.plus_inf += 1,
            ExtReal::NegInf => self.minus_inf += 1,
            ExtReal::Finite(x) => {
                self.n_finite += 1;
                let delta = x - self.mean;
                self.mean += delta / self.n_finite as f64;
                self.m2 += delta * (x - self.mean);
            }
        }
    }

    /// Records a draw whose value is an indeterminate form.
    pub fn push_indeterminate(&mut self) {
        self.total += 1;
        self.indeterminate += 1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n_finite == 0 {
            let mut out = other.clone();
            out.plus_inf += self.plus_inf;
            out.minus_inf += self.minus_inf;
            out.indeterminate += self.indeterminate;
            out.total += self.total;
            return out;
        }
        if other.n_finite == 0 {
            return other.merge(self);
        }
        let n1 = self.n_finite as f64;
        let n2 = other.n_finite as f64;
        let delta = other.mean - self.mean;
        let n = n1 + n2;
        MeanAcc {
            n_finite: self.n_finite + other.n_finite,
            mean: self.mean + delta * n2 / n,
            m2: self.m2 + other.m2 + delta * delta * n1 * n2 / n,
            plus_inf: self.plus_inf + other.plus_inf,
            minus_inf: self.minus_inf + other.minus_inf,
            indeterminate: self.indeterminate + other.indeterminate,
            total: self.total + other.total,
        }
    }

    /// Merges shard accumulators in ascending block order, independent of
    /// the order supplied.
    pub fn merge_ordered(mut shards: Vec<(usize, MeanAcc)>) -> MeanAcc {
        shards.sort_by_key(|(b, _)| *b);
        shards
            .into_iter()
            .fold(MeanAcc::new(), |acc, (_, s)| acc.merge(&s))
    }

    pub fn report(&self) -> MCReport {
        let undefined = self.indeterminate > 0 || (self.plus_inf > 0 && self.minus_inf > 0);
        let mean = if !undefined && self.plus_inf > 0 {
            ExtReal::PosInf
        } else if !undefined && self.minus_inf > 0 {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(self.mean)
        };
        let std_error = if self.n_finite >= 2 {
            (self.m2 / (self.n_finite as f64 - 1.0)).sqrt() / (self.n_finite as f64).sqrt()
        } else {
            0.0
        };
        MCReport {
            mean,
            std_error,
            n: self.total,
            minus_inf_count: self.minus_inf,
            plus_inf_count: self.plus_inf,
            undefined,
        }
    }
}

/// Folds `values(rng, out)` block by block through an accumulator.
fn accumulate_blocks<M, F>(model: &M, n: usize, seed: u64, mut eval: F) -> MeanAcc
where
    M: Model,
    F: FnMut(&M::Point, &mut MeanAcc),
{
    let blocks = n.div_ceil(BLOCK);
    let mut shards = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let mut rng = block_rng(seed, &model.label(), b as u64);
        let count = BLOCK.min(n - b * BLOCK);
        let mut acc = MeanAcc::new();
        for _ in 0..count {
            let x = model.draw(&mut rng);
            eval(&x, &mut acc);
        }
        shards.push((b, acc));
    }
    MeanAcc::merge_ordered(shards)
}

/// Sample mean of an e-variable over `n` draws.
pub fn mc_mean<M: Model>(model: &M, e: &EVariableFn<M::Point>, n: usize, seed: u64) -> MCReport {
    assert!(n >= 2, "mc_mean requires n >= 2");
    accumulate_blocks(model, n, seed, |x, acc| acc.push(e.evaluate(x))).report()
}

/// Sample mean of `f(E)` over `n` draws.
pub fn mc_expected_utility<M: Model>(
    model: &M,
    e: &EVariableFn<M::Point>,
    f: &crate::utility::ConcaveUtility,
    n: usize,
    seed: u64,
) -> MCReport {
    assert!(n >= 2, "mc_expected_utility requires n >= 2");
    accumulate_blocks(model, n, seed, |x, acc| acc.push(f.eval(e.evaluate(x)))).report()
}

/// Paired ratio diagnostics for two e-variables on shared draws: reports for
/// `E/G` (with the `0/0` and `inf/inf` conventions) and `log(E/G)`.
pub fn ratio_check<M: Model>(
    model: &M,
    e: &EVariableFn<M::Point>,
    g: &EVariableFn<M::Point>,
    n: usize,
    seed: u64,
) -> (MCReport, MCReport) {
    assert!(n >= 2, "ratio_check requires n >= 2");
    let blocks = n.div_ceil(BLOCK);
    let mut ratio_shards = Vec::with_capacity(blocks);
    let mut log_shards = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let mut rng = block_rng(seed, &model.label(), b as u64);
        let count = BLOCK.min(n - b * BLOCK);
        let mut racc = MeanAcc::new();
        let mut lacc = MeanAcc::new();
        for _ in 0..count {
            let x = model.draw(&mut rng);
            let r = ext_div(e.evaluate(&x), g.evaluate(&x)).expect("nonnegative ratio");
            racc.push(r);
            lacc.push(match r {
                ExtReal::PosInf => ExtReal::PosInf,
                ExtReal::Finite(v) if v == 0.0 => ExtReal::NegInf,
                ExtReal::Finite(v) => ExtReal::Finite(v.ln()),
                ExtReal::NegInf => unreachable!(),
            });
        }
        ratio_shards.push((b, racc));
        log_shards.push((b, lacc));
    }
    (
        MeanAcc::merge_ordered(ratio_shards).report(),
        MeanAcc::merge_ordered(log_shards).report(),
    )
}

/// Mean and standard error of the per-draw utility gap `f(G) - f(E)` on
/// shared draws.
///
/// Pairing removes the common noise, so strict-improvement claims resolve at
/// modest sample sizes. Draws where both utilities are infinite of the same
/// sign have an indeterminate gap and force the undefined flag.
pub fn paired_utility_comparison<M: Model>(
    model: &M,
    e: &EVariableFn<M::Point>,
    g: &EVariableFn<M::Point>,
    f: &crate::utility::ConcaveUtility,
    n: usize,
    seed: u64,
) -> MCReport {
    assert!(n >= 2, "paired_utility_comparison requires n >= 2");
    accumulate_blocks(model, n, seed, |x, acc| {
        let fe = f.eval(e.evaluate(x));
        let fg = f.eval(g.evaluate(x));
        match fg.checked_sub(fe) {
            Ok(gap) => acc.push(gap),
            Err(_) => acc.push_indeterminate(),
        }
    })
    .report()
}

/// Permutation averaging mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PermutationMode {
    /// Average over all `n!` permutations (requires `n <= 8`).
    Exact,
    /// Average over `k` uniformly drawn permutations (with replacement).
    Sampled { k: usize, seed: u64 },
}

/// Averages an e-variable over permutations of the coordinates of `x`: the
/// conditional expectation given the order statistics when the data are
/// exchangeable.
///
/// Returns the average and whether it is the exact `n!` average. The sampled
/// mode is an unbiased randomized version: the permutation draw is
/// independent of the data, so the average remains an e-variable in the
/// joint randomness.
pub fn permutation_rb(
    e: &EVariableFn<[f64]>,
    x: &[f64],
    mode: PermutationMode,
) -> Result<(ExtReal, bool), EvarError> {
    match mode {
        PermutationMode::Exact => {
            let n = x.len();
            if n > 8 {
                return Err(EvarError::TooManyPermutations(n));
            }
            let mut buf = x.to_vec();
            let mut acc = MeanAcc::new();
            permute_heap(&mut buf, n, &mut |perm| acc.push(e.evaluate(perm)));
            Ok((mean_of_nonneg(&acc), true))
        }
        PermutationMode::Sampled { k, seed } => {
            if k == 0 {
                return Err(EvarError::EmptyPermutationSample);
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seeding::derive_seed(seed, "permutation_rb"));
            let mut buf = x.to_vec();
            let mut acc = MeanAcc::new();
            for _ in 0..k {
                buf.copy_from_slice(x);
                // Fisher-Yates.
                for i in (1..buf.len()).rev() {
                    let j = rand::Rng::random_range(&mut rng, 0..=i);
                    buf.swap(i, j);
                }
                acc.push(e.evaluate(&buf));
            }
            Ok((mean_of_nonneg(&acc), false))
        }
    }
}

fn mean_of_nonneg(acc: &MeanAcc) -> ExtReal {
    let r = acc.report();
    debug_assert!(!r.undefined, "nonnegative values cannot be undefined");
    r.mean
}

fn permute_heap(buf: &mut [f64], k: usize, visit: &mut impl FnMut(&[f64])) {
    if k <= 1 {
        visit(buf);
        return;
    }
    for i in 0..k {
        permute_heap(buf, k - 1, visit);
        if k % 2 == 0 {
            buf.swap(i, k - 1);
        } else {
            buf.swap(0, k - 1);
        }
    }
}

/// Estimates of `mean(f(E))` at a doubling schedule of sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rows: Vec<(usize, MCReport)>,
    /// Advisory flag: adjacent estimates disagreed by more than five
    /// combined standard errors, or a mean was infinite/undefined. Monte
    /// Carlo can flag a non-existent expectation, not prove it.
    pub nonconvergence_flagged: bool,
}

/// Runs `mc_expected_utility` over a doubling schedule and flags apparent
/// nonconvergence.
pub fn mc_utility_stability<M: Model>(
    model: &M,
    e: &EVariableFn<M::Point>,
    f: &crate::utility::ConcaveUtility,
    n_start: usize,
    doublings: usize,
    seed: u64,
) -> StabilityReport {
    assert!(n_start >= 2);
    let mut rows = Vec::with_capacity(doublings + 1);
    let mut n = n_start;
    for _ in 0..=doublings {
        rows.push((n, mc_expected_utility(model, e, f, n, seed)));
        n *= 2;
    }
    let mut flagged = false;
    for w in rows.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        if a.undefined || b.undefined {
            flagged = true;
            continue;
        }
        match (a.mean, b.mean) {
            (ExtReal::Finite(ma), ExtReal::Finite(mb)) => {
                let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
                if (ma - mb).abs() > 5.0 * se {
                    flagged = true;
                }
            }
            _ => flagged = true,
        }
    }
    StabilityReport {
        rows,
        nonconvergence_flagged: flagged,
    }
}
