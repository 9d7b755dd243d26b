//! Exact computation on finite probability spaces.
//!
//! A [`FiniteSpace`] is a finite outcome set together with one probability
//! table per parameter, split into null and alternative index sets. On such
//! spaces everything is computable exactly: whether a statistic is
//! sufficient, the conditional expectation of a nonnegative random variable
//! given a statistic (the Rao-Blackwell operator), e-variable validity, and
//! per-level Jensen gaps in extended-real arithmetic.
//!
//! Statistics are per-atom labels; conditioning on a statistic means
//! averaging over each label level. Sufficiency on a finite space is the
//! partition property: within each level the conditional distribution over
//! atoms is the same for every parameter that gives the level positive mass.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::extreal::{gen_expectation, weighted_parts, ExtReal, GenExpectation};
use crate::utility::ConcaveUtility;

mod schema;
pub mod synth;

pub use schema::{FiniteSpaceDoc, SchemaError};

/// Per-atom probability round-off budget.
pub const PROB_TOL: f64 = 1e-12;
/// Conditional-distribution agreement tolerance for sufficiency checks.
pub const SUFFICIENCY_TOL: f64 = 1e-9;
/// E-variable mean slack.
pub const E_VALUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("bad space: {0}")]
    BadSpace(String),
    #[error("table length {got} does not match atom count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("negative value {value} at atom {atom}")]
    NegativeValue { atom: usize, value: f64 },
    #[error("statistic is not sufficient for the space")]
    NotSufficient,
    #[error("bad mixture: {0}")]
    BadMixture(String),
    #[error("unknown parameter index {0}")]
    BadThetaIndex(usize),
}

/// A finite outcome set with one probability table per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    atoms: Vec<String>,
    theta_labels: Vec<String>,
    /// `tables[theta][atom]`, each row nonnegative and summing to 1.
    tables: Vec<Vec<f64>>,
    theta_null: Vec<usize>,
    theta_alt: Vec<usize>,
}

impl FiniteSpace {
    /// Validates and builds a space. Null and alternative index sets must be
    /// nonempty and jointly cover every parameter (they may overlap, e.g.
    /// for a single-parameter model).
    pub fn new(
        atoms: Vec<String>,
        theta_labels: Vec<String>,
        tables: Vec<Vec<f64>>,
        theta_null: Vec<usize>,
        theta_alt: Vec<usize>,
    ) -> Result<Self, SpaceError> {
        if atoms.is_empty() {
            return Err(SpaceError::BadSpace("no atoms".into()));
        }
        if tables.len() != theta_labels.len() || tables.is_empty() {
            return Err(SpaceError::BadSpace(format!(
                "{} labels vs {} tables",
                theta_labels.len(),
                tables.len()
            )));
        }
        for (t, row) in tables.iter().enumerate() {
            if row.len() != atoms.len() {
                return Err(SpaceError::LengthMismatch {
                    got: row.len(),
                    want: atoms.len(),
                });
            }
            let mut sum = 0.0;
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(SpaceError::BadSpace(format!(
                        "bad probability {p} in table {t}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(SpaceError::BadSpace(format!(
                    "table {t} sums to {sum}, expected 1"
                )));
            }
        }
        // Labels key the serialized form; duplicates would collapse there.
        let mut seen = theta_labels.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpaceError::BadSpace("duplicate parameter label".into()));
        }
        if theta_null.is_empty() || theta_alt.is_empty() {
            return Err(SpaceError::BadSpace(
                "theta_null and theta_alt must be nonempty".into(),
            ));
        }
        let n_theta = tables.len();
        let mut covered = vec![false; n_theta];
        for &i in theta_null.iter().chain(theta_alt.iter()) {
            if i >= n_theta {
                return Err(SpaceError::BadThetaIndex(i));
            }
            covered[i] = true;
        }
        if covered.iter().any(|c| !c) {
            return Err(SpaceError::BadSpace(
                "null and alternative must cover all parameters".into(),
            ));
        }
        Ok(FiniteSpace {
            atoms,
            theta_labels,
            tables,
            theta_null,
            theta_alt,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_theta(&self) -> usize {
        self.tables.len()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn theta_labels(&self) -> &[String] {
        &self.theta_labels
    }

    pub fn theta_null(&self) -> &[usize] {
        &self.theta_null
    }

    pub fn theta_alt(&self) -> &[usize] {
        &self.theta_alt
    }

    /// Probability table of parameter `theta`.
    pub fn table(&self, theta: usize) -> &[f64] {
        &self.tables[theta]
    }
}

/// A statistic: one hashable label per atom. Atoms sharing a label form a
/// level of the induced partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticTable(Vec<String>);

impl StatisticTable {
    pub fn new(labels: Vec<String>) -> Self {
        StatisticTable(labels)
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Levels in first-appearance order, each with its member atom indices.
    pub fn levels(&self) -> Vec<(String, Vec<usize>)> {
        let mut order: Vec<String> = Vec::new();
        let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, label) in self.0.iter().enumerate() {
            if !members.contains_key(label) {
                order.push(label.clone());
            }
            members.entry(label.clone()).or_default().push(i);
        }
        order
            .into_iter()
            .map(|label| {
                let atoms = members[&label].clone();
                (label, atoms)
            })
            .collect()
    }
}

/// A random variable: one extended-real value per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RVTable(Vec<ExtReal>);

impl RVTable {
    pub fn new(values: Vec<ExtReal>) -> Self {
        RVTable(values)
    }

    pub fn from_f64(values: Vec<f64>) -> Self {
        RVTable(values.into_iter().map(ExtReal::from_f64).collect())
    }

    pub fn constant(value: f64, n: usize) -> Self {
        RVTable(vec![ExtReal::from_f64(value); n])
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_len(&self, space: &FiniteSpace) -> Result<(), SpaceError> {
        if self.len() != space.n_atoms() {
            return Err(SpaceError::LengthMismatch {
                got: self.len(),
                want: space.n_atoms(),
            });
        }
        Ok(())
    }

    fn check_nonneg(&self) -> Result<(), SpaceError> {
        for (i, v) in self.0.iter().enumerate() {
            if !v.is_nonneg() {
                return Err(SpaceError::NegativeValue {
                    atom: i,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// True iff `s` is sufficient for the space: on every level with positive
/// mass under two parameters, their conditional atom distributions agree
/// within [`SUFFICIENCY_TOL`] per atom.
pub fn sufficiency_check(space: &FiniteSpace, s: &StatisticTable) -> bool {
    if s.len() != space.n_atoms() {
        return false;
    }
    for (_, atoms) in s.levels() {
        let masses: Vec<f64> = (0..space.n_theta())
            .map(|t| atoms.iter().map(|&i| space.tables[t][i]).sum())
            .collect();
        let positive: Vec<usize> = (0..space.n_theta()).filter(|&t| masses[t] > 0.0).collect();
        for pair in positive.windows(2) {
            let (t0, t1) = (pair[0], pair[1]);
            for &i in &atoms {
                let c0 = space.tables[t0][i] / masses[t0];
                let c1 = space.tables[t1][i] / masses[t1];
                if (c0 - c1).abs() > SUFFICIENCY_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Conditional expectation of `e` given the statistic `s`: the
/// Rao-Blackwell operator.
///
/// The average over each level is computed under `theta_ref`; by sufficiency
/// the result is parameter-free, which `strict` verifies up front. Levels
/// with zero mass under `theta_ref` fall back to the first parameter giving
/// them positive mass, and to 0 when no parameter does — any value on a null
/// set preserves all expectations, and a fixed rule keeps output
/// deterministic. The result is constant on each level.
pub fn rao_blackwellize(
    space: &FiniteSpace,
    e: &RVTable,
    s: &StatisticTable,
    theta_ref: usize,
    strict: bool,
) -> Result<RVTable, SpaceError> {
    e.check_len(space)?;
    e.check_nonneg()?;
    if theta_ref >= space.n_theta() {
        return Err(SpaceError::BadThetaIndex(theta_ref));
    }
    if strict && !sufficiency_check(space, s) {
        return Err(SpaceError::NotSufficient);
    }
    let mut out = vec![ExtReal::Finite(0.0); space.n_atoms()];
    for (_, atoms) in s.levels() {
        let mut chosen: Option<usize> = None;
        for t in std::iter::once(theta_ref).chain(0..space.n_theta()) {
            let mass: f64 = atoms.iter().map(|&i| space.tables[t][i]).sum();
            if mass > 0.0 {
                chosen = Some(t);
                break;
            }
        }
        let value = match chosen {
            None => ExtReal::Finite(0.0),
            Some(t) => {
                let mass: f64 = atoms.iter().map(|&i| space.tables[t][i]).sum();
                let mut acc = 0.0f64;
                let mut infinite = false;
                for &i in &atoms {
                    let p = space.tables[t][i];
                    if p == 0.0 {
                        continue;
                    }
                    match e.0[i] {
                        ExtReal::PosInf => infinite = true,
                        ExtReal::Finite(v) => acc += v * p,
                        ExtReal::NegInf => unreachable!("nonnegativity checked"),
                    }
                }
                if infinite {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(acc / mass)
                }
            }
        };
        for &i in &atoms {
            out[i] = value;
        }
    }
    Ok(RVTable(out))
}

/// Mean of a nonnegative table under one parameter, in extended arithmetic.
pub fn mean_under(space: &FiniteSpace, theta: usize, e: &RVTable) -> ExtReal {
    let parts = weighted_parts(e.values(), space.table(theta));
    parts
        .value()
        .expect("nonnegative table has defined expectation")
}

/// Checks the e-variable property: the worst mean over the null is at most
/// `1 + E_VALUE_TOL`. Returns the flag together with the worst null mean.
pub fn check_e_variable(space: &FiniteSpace, e: &RVTable) -> Result<(bool, ExtReal), SpaceError> {
    e.check_len(space)?;
    e.check_nonneg()?;
    let mut worst = ExtReal::Finite(0.0);
    for &t in &space.theta_null {
        worst = worst.max(mean_under(space, t, e));
    }
    let is_e = worst <= ExtReal::Finite(1.0 + E_VALUE_TOL);
    Ok((is_e, worst))
}

/// Generalized expectation of `f(X)` under parameter `theta`.
///
/// Undefined expectations (both parts infinite) are reported through the
/// returned [`GenExpectation`], not as errors.
pub fn expected_utility(
    space: &FiniteSpace,
    theta: usize,
    x: &RVTable,
    f: &ConcaveUtility,
) -> Result<GenExpectation, SpaceError> {
    x.check_len(space)?;
    x.check_nonneg()?;
    if theta >= space.n_theta() {
        return Err(SpaceError::BadThetaIndex(theta));
    }
    let fx: Vec<ExtReal> = x.values().iter().map(|&v| f.eval(v)).collect();
    gen_expectation(&fx, space.table(theta))
        .map_err(|e| SpaceError::BadSpace(format!("expectation failed: {e}")))
}

/// One level of a Jensen-gap table.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGap {
    pub level: String,
    /// Mass of the level under the evaluated parameter.
    pub prob: f64,
    /// `f(E[X | level]) - E[f(X) | level]`; `None` when a side is an
    /// indeterminate sum, which is reported rather than treated as failure.
    pub gap: Option<ExtReal>,
}

/// Per-level Jensen gaps of a concave `f` applied to a nonnegative `x`,
/// conditioning on the levels of `s` under parameter `theta`.
///
/// Levels with zero mass are skipped. For every defined entry the gap is
/// nonnegative up to rounding, including levels where `x` takes the values 0
/// or `+inf`.
pub fn jensen_gap(
    space: &FiniteSpace,
    theta: usize,
    x: &RVTable,
    s: &StatisticTable,
    f: &ConcaveUtility,
) -> Result<Vec<LevelGap>, SpaceError> {
    x.check_len(space)?;
    x.check_nonneg()?;
    if theta >= space.n_theta() {
        return Err(SpaceError::BadThetaIndex(theta));
    }
    let table = space.table(theta);
    let mut out = Vec::new();
    for (level, atoms) in s.levels() {
        let mass: f64 = atoms.iter().map(|&i| table[i]).sum();
        if mass == 0.0 {
            continue;
        }
        let weights: Vec<f64> = atoms.iter().map(|&i| table[i] / mass).collect();
        let values: Vec<ExtReal> = atoms.iter().map(|&i| x.0[i]).collect();
        // Conditional mean of a nonnegative variable is always defined.
        let cond_mean = weighted_parts(&values, &weights)
            .value()
            .expect("nonnegative conditional mean");
        let lhs = f.eval(cond_mean);
        let fx: Vec<ExtReal> = values.iter().map(|&v| f.eval(v)).collect();
        let rhs = weighted_parts(&fx, &weights);
        let gap = match rhs.value() {
            None => None,
            Some(r) => lhs.checked_sub(r).ok(),
        };
        out.push(LevelGap {
            level,
            prob: mass,
            gap,
        });
    }
    Ok(out)
}

/// Builds the mixture `P' = sum w_theta P_theta` over null parameters and
/// returns `KL(P_alt || P')`, which is `+inf` exactly when `P_alt` charges an
/// atom the mixture misses. A finite value certifies that `E[log E]` is
/// defined under `P_alt` for every e-variable on this space.
///
/// Sub-probability mixtures are allowed: weights must be nonnegative with
/// sum at most 1.
pub fn kl_witness_check(
    space: &FiniteSpace,
    theta_alt: usize,
    mixture_weights: &[(usize, f64)],
) -> Result<(bool, ExtReal), SpaceError> {
    if theta_alt >= space.n_theta() {
        return Err(SpaceError::BadThetaIndex(theta_alt));
    }
    let mut total = 0.0;
    for &(idx, w) in mixture_weights {
        if !space.theta_null.contains(&idx) {
            return Err(SpaceError::BadMixture(format!(
                "index {idx} is not a null parameter"
            )));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(SpaceError::BadMixture(format!("bad weight {w}")));
        }
        total += w;
    }
    if total > 1.0 + PROB_TOL {
        return Err(SpaceError::BadMixture(format!(
            "weights sum to {total} > 1"
        )));
    }
    let mut mix = vec![0.0f64; space.n_atoms()];
    for &(idx, w) in mixture_weights {
        for (m, &p) in mix.iter_mut().zip(space.table(idx)) {
            *m += w * p;
        }
    }
    let alt = space.table(theta_alt);
    let mut kl = 0.0f64;
    for (&p, &q) in alt.iter().zip(&mix) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Ok((false, ExtReal::PosInf));
        }
        kl += p * (p / q).ln();
    }
    Ok((true, ExtReal::Finite(kl)))
}
