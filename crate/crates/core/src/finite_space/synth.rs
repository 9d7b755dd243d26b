//! Constructors for spaces used throughout the test and verification
//! suites: random finite spaces carrying a sufficient statistic by
//! construction, random nonnegative tables, and exact product-Bernoulli
//! spaces.

use rand::Rng;

use crate::extreal::ExtReal;

use super::{FiniteSpace, RVTable, SpaceError, StatisticTable};

/// A random space bundled with a statistic that is sufficient for it.
#[derive(Debug, Clone)]
pub struct SynthSpace {
    pub space: FiniteSpace,
    pub statistic: StatisticTable,
}

/// Draws a random finite space (at most 64 atoms, at most 4 measures) whose
/// statistic is sufficient by construction: the conditional law of the atoms
/// within each level is drawn once and shared across all parameters, while
/// the level marginals vary per parameter.
///
/// Occasionally zeroes out an atom's conditional mass or a parameter's level
/// marginal, to exercise null-set handling.
pub fn random_sufficient_space<R: Rng>(rng: &mut R) -> SynthSpace {
    let n_theta = 1 + rng.random_range(0..4usize);
    let n_atoms = 2 + rng.random_range(0..63usize);
    let n_levels = 1 + rng.random_range(0..n_atoms.min(8));

    // Assign atoms to levels, guaranteeing every level is nonempty.
    let mut level_of: Vec<usize> = (0..n_atoms)
        .map(|i| {
            if i < n_levels {
                i
            } else {
                rng.random_range(0..n_levels)
            }
        })
        .collect();
    // Shuffle so low-index atoms are not biased toward low levels.
    for i in (1..n_atoms).rev() {
        let j = rng.random_range(0..=i);
        level_of.swap(i, j);
    }

    // One conditional law per level, shared across parameters.
    let mut cond = vec![0.0f64; n_atoms];
    for level in 0..n_levels {
        let members: Vec<usize> = (0..n_atoms).filter(|&i| level_of[i] == level).collect();
        let mut raw: Vec<f64> = members.iter().map(|_| 0.05 + rng.random::<f64>()).collect();
        if members.len() >= 2 && rng.random::<f64>() < 0.10 {
            let k = rng.random_range(0..members.len());
            raw[k] = 0.0;
        }
        let total: f64 = raw.iter().sum();
        for (m, r) in members.iter().zip(raw) {
            cond[*m] = r / total;
        }
    }

    // Per-parameter level marginals, occasionally missing a level.
    let mut tables = Vec::with_capacity(n_theta);
    for _ in 0..n_theta {
        let mut marg: Vec<f64> = (0..n_levels).map(|_| 0.05 + rng.random::<f64>()).collect();
        if n_levels >= 2 && rng.random::<f64>() < 0.10 {
            let k = rng.random_range(0..n_levels);
            marg[k] = 0.0;
        }
        let total: f64 = marg.iter().sum();
        for m in marg.iter_mut() {
            *m /= total;
        }
        let table: Vec<f64> = (0..n_atoms).map(|i| marg[level_of[i]] * cond[i]).collect();
        tables.push(table);
    }

    let atoms = (0..n_atoms).map(|i| format!("w{i}")).collect();
    let theta_labels = (0..n_theta).map(|t| format!("theta{t}")).collect();
    let (theta_null, theta_alt) = if n_theta == 1 {
        (vec![0], vec![0])
    } else {
        let split = 1 + rng.random_range(0..(n_theta - 1));
        ((0..split).collect(), (split..n_theta).collect())
    };
    let space = FiniteSpace::new(atoms, theta_labels, tables, theta_null, theta_alt)
        .expect("synthesized space is valid");
    let statistic = StatisticTable::new(level_of.iter().map(|l| format!("s{l}")).collect());
    SynthSpace { space, statistic }
}

/// Draws a random nonnegative table: log-uniform magnitudes in roughly
/// `(0.05, 20)`, with atoms set to `0` with probability `zero_prob` and to
/// `+inf` with probability `inf_prob`.
pub fn random_rv_table<R: Rng>(
    rng: &mut R,
    space: &FiniteSpace,
    zero_prob: f64,
    inf_prob: f64,
) -> RVTable {
    let values = (0..space.n_atoms())
        .map(|_| {
            let u = rng.random::<f64>();
            if u < zero_prob {
                ExtReal::Finite(0.0)
            } else if u < zero_prob + inf_prob {
                ExtReal::PosInf
            } else {
                ExtReal::Finite((-3.0 + 6.0 * rng.random::<f64>()).exp())
            }
        })
        .collect();
    RVTable::new(values)
}

/// The product space of `n` i.i.d. Bernoulli draws for each success
/// probability in `ps`, with the success count as statistic.
///
/// Atoms are the bit strings in lexicographic order (`"00"`, `"01"`, ...);
/// probabilities are computed as `p^k (1-p)^(n-k)` so atoms with equal
/// success counts carry bitwise-identical mass.
pub fn bernoulli_product_space(
    ps: &[f64],
    theta_null: &[usize],
    theta_alt: &[usize],
    n: usize,
) -> Result<(FiniteSpace, StatisticTable), SpaceError> {
    if n == 0 || n > 20 {
        return Err(SpaceError::BadSpace(format!(
            "product space supports 1..=20 draws, got {n}"
        )));
    }
    for &p in ps {
        if !(p > 0.0 && p < 1.0) {
            return Err(SpaceError::BadSpace(format!("p={p} outside (0,1)")));
        }
    }
    let size = 1usize << n;
    let mut atoms = Vec::with_capacity(size);
    let mut counts = Vec::with_capacity(size);
    for word in 0..size {
        let mut label = String::with_capacity(n);
        let mut k = 0u32;
        // Bit i of the word is draw i, most significant first in the label.
        for i in (0..n).rev() {
            let bit = (word >> i) & 1;
            k += bit as u32;
            label.push(if bit == 1 { '1' } else { '0' });
        }
        atoms.push(label);
        counts.push(k);
    }
    let tables: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| {
            counts
                .iter()
                .map(|&k| p.powi(k as i32) * (1.0 - p).powi((n as u32 - k) as i32))
                .collect()
        })
        .collect();
    // Index prefix keeps labels unique when the same p appears twice.
    let theta_labels = ps
        .iter()
        .enumerate()
        .map(|(i, p)| format!("p{i}={p}"))
        .collect();
    let space = FiniteSpace::new(
        atoms,
        theta_labels,
        tables,
        theta_null.to_vec(),
        theta_alt.to_vec(),
    )?;
    let statistic = StatisticTable::new(counts.iter().map(|k| k.to_string()).collect());
    Ok((space, statistic))
}

/// Bit pattern of each atom of a [`bernoulli_product_space`], in atom order.
pub fn bernoulli_atom_bits(n: usize) -> Vec<Vec<u8>> {
    let size = 1usize << n;
    (0..size)
        .map(|word| (0..n).rev().map(|i| ((word >> i) & 1) as u8).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_space::sufficiency_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn synthesized_statistics_are_sufficient() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..100 {
            let inst = random_sufficient_space(&mut rng);
            assert!(sufficiency_check(&inst.space, &inst.statistic));
            assert!(inst.space.n_atoms() <= 64);
            assert!(inst.space.n_theta() <= 4);
        }
    }

    #[test]
    fn bernoulli_space_masses_match_binomial() {
        let (space, s) = bernoulli_product_space(&[0.3], &[0], &[0], 3).unwrap();
        let mut by_count = [0.0f64; 4];
        for (i, label) in s.labels().iter().enumerate() {
            let k: usize = label.parse().unwrap();
            by_count[k] += space.table(0)[i];
        }
        let p: f64 = 0.3;
        for (k, &mass) in by_count.iter().enumerate() {
            let choose = [1.0, 3.0, 3.0, 1.0][k];
            let expect = choose * p.powi(k as i32) * (1.0 - p).powi((3 - k) as i32);
            assert!((mass - expect).abs() < 1e-15);
        }
        assert!(sufficiency_check(&space, &s));
    }

    #[test]
    fn atom_bits_align_with_labels() {
        let (space, _) = bernoulli_product_space(&[0.5], &[0], &[0], 4).unwrap();
        let bits = bernoulli_atom_bits(4);
        for (label, pattern) in space.atoms().iter().zip(&bits) {
            let from_label: Vec<u8> = label.bytes().map(|b| b - b'0').collect();
            assert_eq!(&from_label, pattern);
        }
    }
}
