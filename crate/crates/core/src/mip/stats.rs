use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{CanonicalModel, VarKind};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelStatistics {
    pub variables: usize,
    pub binaries: usize,
    pub integers: usize,
    pub constraints: usize,
    pub nonzeros: usize,
    /// Constraint count per family tag such as `"15.2"`.
    pub per_family: BTreeMap<String, usize>,
    /// Variable count per name prefix.
    pub per_class: BTreeMap<String, usize>,
}

impl ModelStatistics {
    /// Total over all parts of a family number.
    pub fn family_total(&self, number: u8) -> usize {
        let exact = number.to_string();
        let dotted = format!("{number}.");
        self.per_family.iter().filter(|(k, _)| **k == exact || k.starts_with(&dotted)).map(|(_, v)| v).sum()
    }
}

pub fn model_statistics(model: &CanonicalModel) -> ModelStatistics {
    let mut s = ModelStatistics {
        variables: model.variables.len(),
        constraints: model.constraints.len(),
        ..Default::default()
    };
    for v in &model.variables {
        match v.kind {
            VarKind::Binary => s.binaries += 1,
            VarKind::Integer => s.integers += 1,
        }
        let prefix = v.name.split('[').next().unwrap_or_default().to_owned();
        *s.per_class.entry(prefix).or_default() += 1;
    }
    for c in &model.constraints {
        s.nonzeros += c.terms.len();
        *s.per_family.entry(c.family.to_string()).or_default() += 1;
    }
    s
}
