use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Backend, RawSolution, SolveError, SolveStatus, INTEGRALITY_TOL};
use crate::derive::DerivedSets;
use crate::mip::CanonicalModel;
use crate::model::{InstanceId, Kind, PhysicianId, RosterInstance};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub physician: PhysicianId,
    pub instance: InstanceId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftStaffing {
    pub shift: InstanceId,
    pub assigned: u32,
    pub min: u32,
    pub desired: u32,
    pub max: u32,
    pub desired_met: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveMetadata {
    pub backend: Option<Backend>,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub solver_seconds: f64,
    pub total_seconds: f64,
}

impl SolveMetadata {
    /// Metadata for a roster that did not come from a solver.
    pub fn manual() -> Self {
        Self {
            backend: None,
            status: SolveStatus::Feasible,
            objective: None,
            bound: None,
            gap: None,
            solver_seconds: 0.0,
            total_seconds: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RosterSolution {
    /// Sorted by physician, then instance position.
    pub assignments: Vec<Assignment>,
    /// Duties nobody holds.
    pub unassigned: Vec<InstanceId>,
    pub staffing: Vec<ShiftStaffing>,
    pub metadata: SolveMetadata,
}

impl RosterSolution {
    /// Builds the derived listings for a set of assignments; ids that the
    /// instance does not know are kept and left for validation to reject.
    pub fn from_assignments(
        assignments: impl IntoIterator<Item = Assignment>,
        inst: &RosterInstance,
        der: &DerivedSets,
        metadata: SolveMetadata,
    ) -> Self {
        let pos: HashMap<&InstanceId, usize> = der.instances.iter().enumerate().map(|(i, x)| (&x.id, i)).collect();
        let set: BTreeSet<Assignment> = assignments.into_iter().collect();
        let mut assignments: Vec<Assignment> = set.into_iter().collect();
        assignments.sort_by_key(|a| {
            (inst.physician_index(&a.physician).unwrap_or(usize::MAX), pos.get(&a.instance).copied().unwrap_or(usize::MAX))
        });
        let mut count = vec![0u32; der.instances.len()];
        for a in &assignments {
            if let Some(&i) = pos.get(&a.instance) {
                count[i] += 1;
            }
        }
        let unassigned = der.duties.iter().filter(|&&d| count[d] == 0).map(|&d| der.instances[d].id.clone()).collect();
        let staffing = der
            .shifts
            .iter()
            .map(|&s| {
                let x = &der.instances[s];
                let t = inst.shift_template(&x.template).expect("shift template");
                ShiftStaffing {
                    shift: x.id.clone(),
                    assigned: count[s],
                    min: t.min_staff,
                    desired: t.desired_min_staff,
                    max: t.max_staff,
                    desired_met: count[s] >= t.desired_min_staff,
                }
            })
            .collect();
        Self { assignments, unassigned, staffing, metadata }
    }

    pub fn of_physician<'a>(&'a self, p: &'a PhysicianId) -> impl Iterator<Item = &'a InstanceId> + 'a {
        self.assignments.iter().filter(move |a| &a.physician == p).map(|a| &a.instance)
    }
}

pub fn extract_roster(
    raw: &RawSolution,
    model: &CanonicalModel,
    inst: &RosterInstance,
    der: &DerivedSets,
) -> Result<RosterSolution, SolveError> {
    if !raw.status.has_solution() {
        return Err(SolveError::Integrality(format!("status {:?} carries no solution", raw.status)));
    }
    if raw.values.len() != model.variables.len() {
        return Err(SolveError::Integrality(format!(
            "{} values for {} variables",
            raw.values.len(),
            model.variables.len()
        )));
    }
    let index: HashMap<&str, usize> = model.variables.iter().enumerate().map(|(j, v)| (v.name.as_str(), j)).collect();
    let mut chosen = Vec::new();
    for (p, ph) in inst.physicians.iter().enumerate() {
        for x in &der.instances {
            let prefix = if x.kind == Kind::Duty { "x" } else { "y" };
            let name = format!("{prefix}[{},{}]", ph.id, x.id);
            let Some(&j) = index.get(name.as_str()) else { continue };
            let v = raw.values[j];
            if (v - v.round()).abs() > INTEGRALITY_TOL || !(-INTEGRALITY_TOL..=1.0 + INTEGRALITY_TOL).contains(&v) {
                return Err(SolveError::Integrality(format!("{name} = {v}")));
            }
            if v.round() == 1.0 {
                chosen.push(Assignment { physician: inst.physicians[p].id.clone(), instance: x.id.clone() });
            }
        }
    }
    let metadata = SolveMetadata {
        backend: None,
        status: raw.status,
        objective: raw.objective,
        bound: raw.bound,
        gap: raw.gap,
        solver_seconds: raw.solver_seconds,
        total_seconds: raw.solver_seconds,
    };
    Ok(RosterSolution::from_assignments(chosen, inst, der, metadata))
}
