//! JSON serialization of finite spaces and their named tables.
//!
//! Probabilities and extended-real values are serialized as decimal strings
//! (shortest round-trip form, with `"inf"` / `"-inf"` for the infinities) so
//! that a re-read document reproduces every `f64` bit-exactly. Parameters are
//! keyed by label; `theta_null` / `theta_alt` list labels, and the in-memory
//! index order is the sorted label order of the `measures` map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extreal::parse_ext_real;

use super::{FiniteSpace, RVTable, SpaceError, StatisticTable};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad document: {0}")]
    BadDocument(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// On-disk form of a [`FiniteSpace`], with optional named statistic and
/// random-variable tables stored as parallel lists over the atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpaceDoc {
    pub atoms: Vec<String>,
    /// Parameter label -> per-atom probabilities as decimal strings.
    pub measures: BTreeMap<String, Vec<String>>,
    pub theta_null: Vec<String>,
    pub theta_alt: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub statistics: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rv_tables: BTreeMap<String, Vec<String>>,
}

impl FiniteSpaceDoc {
    pub fn from_space(space: &FiniteSpace) -> Self {
        let mut measures = BTreeMap::new();
        for (label, table) in space.theta_labels().iter().zip(0..space.n_theta()) {
            measures.insert(
                label.clone(),
                space.table(table).iter().map(|p| format!("{p}")).collect(),
            );
        }
        let label_of = |i: &usize| space.theta_labels()[*i].clone();
        FiniteSpaceDoc {
            atoms: space.atoms().to_vec(),
            measures,
            theta_null: space.theta_null().iter().map(label_of).collect(),
            theta_alt: space.theta_alt().iter().map(label_of).collect(),
            statistics: BTreeMap::new(),
            rv_tables: BTreeMap::new(),
        }
    }

    pub fn with_statistic(mut self, name: &str, s: &StatisticTable) -> Self {
        self.statistics.insert(name.into(), s.labels().to_vec());
        self
    }

    pub fn with_rv_table(mut self, name: &str, rv: &RVTable) -> Self {
        self.rv_tables.insert(
            name.into(),
            rv.values().iter().map(|v| v.to_string()).collect(),
        );
        self
    }

    /// Reconstructs the space; parameter indices follow the sorted label
    /// order of `measures`.
    pub fn to_space(&self) -> Result<FiniteSpace, SchemaError> {
        let theta_labels: Vec<String> = self.measures.keys().cloned().collect();
        let mut tables = Vec::with_capacity(theta_labels.len());
        for label in &theta_labels {
            let row = &self.measures[label];
            let mut parsed = Vec::with_capacity(row.len());
            for s in row {
                let p: f64 = s
                    .parse()
                    .map_err(|e| SchemaError::BadDocument(format!("bad probability {s:?}: {e}")))?;
                parsed.push(p);
            }
            tables.push(parsed);
        }
        let resolve = |labels: &[String]| -> Result<Vec<usize>, SchemaError> {
            labels
                .iter()
                .map(|l| {
                    theta_labels
                        .iter()
                        .position(|t| t == l)
                        .ok_or_else(|| SchemaError::BadDocument(format!("unknown parameter {l:?}")))
                })
                .collect()
        };
        let theta_null = resolve(&self.theta_null)?;
        let theta_alt = resolve(&self.theta_alt)?;
        Ok(FiniteSpace::new(
            self.atoms.clone(),
            theta_labels,
            tables,
            theta_null,
            theta_alt,
        )?)
    }

    pub fn statistic(&self, name: &str) -> Result<StatisticTable, SchemaError> {
        let labels = self
            .statistics
            .get(name)
            .ok_or_else(|| SchemaError::BadDocument(format!("no statistic {name:?}")))?;
        if labels.len() != self.atoms.len() {
            return Err(SchemaError::BadDocument(format!(
                "statistic {name:?} has {} entries for {} atoms",
                labels.len(),
                self.atoms.len()
            )));
        }
        Ok(StatisticTable::new(labels.clone()))
    }

    pub fn rv_table(&self, name: &str) -> Result<RVTable, SchemaError> {
        let raw = self
            .rv_tables
            .get(name)
            .ok_or_else(|| SchemaError::BadDocument(format!("no rv table {name:?}")))?;
        if raw.len() != self.atoms.len() {
            return Err(SchemaError::BadDocument(format!(
                "rv table {name:?} has {} entries for {} atoms",
                raw.len(),
                self.atoms.len()
            )));
        }
        let mut values = Vec::with_capacity(raw.len());
        for s in raw {
            values.push(parse_ext_real(s).map_err(SchemaError::BadDocument)?);
        }
        Ok(RVTable::new(values))
    }

    pub fn to_json(&self) -> Result<String, SchemaError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_space::synth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10 {
            let inst = synth::random_sufficient_space(&mut rng);
            let rv = synth::random_rv_table(&mut rng, &inst.space, 0.1, 0.1);
            let doc = FiniteSpaceDoc::from_space(&inst.space)
                .with_statistic("s", &inst.statistic)
                .with_rv_table("e", &rv);
            let text = doc.to_json().unwrap();
            let back = FiniteSpaceDoc::from_json(&text).unwrap();
            let space2 = back.to_space().unwrap();
            // Probability tables must re-read bit-exactly; label order is
            // sorted, so compare by label.
            for (i, label) in space2.theta_labels().iter().enumerate() {
                let j = inst
                    .space
                    .theta_labels()
                    .iter()
                    .position(|l| l == label)
                    .unwrap();
                assert_eq!(space2.table(i), inst.space.table(j));
            }
            assert_eq!(back.statistic("s").unwrap(), inst.statistic);
            assert_eq!(back.rv_table("e").unwrap(), rv);
        }
    }

    #[test]
    fn unknown_names_are_errors() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let inst = synth::random_sufficient_space(&mut rng);
        let doc = FiniteSpaceDoc::from_space(&inst.space);
        assert!(doc.statistic("missing").is_err());
        assert!(doc.rv_table("missing").is_err());
    }
}
