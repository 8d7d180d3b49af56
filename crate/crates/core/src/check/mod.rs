//! Independent roster checking: hard findings, soft recount, quality report.
//!
//! Nothing here reads the integer program; every quantity is recomputed
//! from the roster, the instance and the derived sets.

pub mod hard;
pub mod report;
pub mod soft;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::derive::DerivedSets;
use crate::model::RosterInstance;
use crate::solver::RosterSolution;

pub use hard::validate_hard;
pub use report::{compare_rosters, quality_report, render_report, IndicatorDelta, QualityReport, Timings};
pub use soft::{recount_soft, SoftTally};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingSeverity {
    Hard,
    Soft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationFinding {
    /// Constraint family tag such as `"15.1"`.
    pub family: String,
    pub subjects: Vec<String>,
    pub severity: FindingSeverity,
    pub magnitude: f64,
    pub message: String,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CheckError {
    #[error("roster references unknown physician {0}")]
    UnknownPhysician(String),
    #[error("roster references unknown instance {0}")]
    UnknownInstance(String),
}

/// A roster resolved to indices.
pub(crate) struct Held {
    /// Instances per physician.
    pub by_physician: Vec<BTreeSet<usize>>,
    /// Physicians per instance.
    pub by_instance: Vec<BTreeSet<usize>>,
}

impl Held {
    pub fn resolve(roster: &RosterSolution, inst: &RosterInstance, der: &DerivedSets) -> Result<Self, CheckError> {
        let pos: HashMap<&str, usize> = der.instances.iter().enumerate().map(|(i, x)| (x.id.as_str(), i)).collect();
        let mut by_physician = vec![BTreeSet::new(); inst.physicians.len()];
        let mut by_instance = vec![BTreeSet::new(); der.instances.len()];
        for a in &roster.assignments {
            let p = inst
                .physician_index(&a.physician)
                .ok_or_else(|| CheckError::UnknownPhysician(a.physician.to_string()))?;
            let i = *pos.get(a.instance.as_str()).ok_or_else(|| CheckError::UnknownInstance(a.instance.to_string()))?;
            by_physician[p].insert(i);
            by_instance[i].insert(p);
        }
        Ok(Self { by_physician, by_instance })
    }

    pub fn holds(&self, p: usize, i: usize) -> bool {
        self.by_physician[p].contains(&i)
    }

    pub fn holds_all(&self, p: usize, members: &[usize]) -> bool {
        members.iter().all(|&m| self.holds(p, m))
    }
}
