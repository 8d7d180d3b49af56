//! Solving a [`CanonicalModel`]: the external MILP solver through MPS files,
//! or the exhaustive oracle for tiny models.

pub mod cbc;
pub mod extract;
pub mod mps;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::mip::{CanonicalModel, VarKind};
use crate::par::ExecMode;

pub use extract::{extract_roster, Assignment, RosterSolution, ShiftStaffing, SolveMetadata};
pub use mps::{emit_mps, parse_mps, MpsError, MpsFile, NameMap};
pub use oracle::{exhaustive_oracle, free_decisions, ORACLE_MAX_FREE};

/// Binary and integer values within this distance of an integer are rounded.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    External,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub gap: f64,
    pub time_limit_seconds: f64,
    pub backend: Backend,
}

impl Default for SolveRequest {
    fn default() -> Self {
        Self { gap: 0.03, time_limit_seconds: 600.0, backend: Backend::External }
    }
}

impl SolveRequest {
    pub fn check(&self) -> Result<(), SolveError> {
        if !(0.0..1.0).contains(&self.gap) {
            return Err(SolveError::Request(format!("gap {} outside [0, 1)", self.gap)));
        }
        if !(self.time_limit_seconds > 0.0) {
            return Err(SolveError::Request(format!("time limit {} must be positive", self.time_limit_seconds)));
        }
        Ok(())
    }
}

/// Where to find the external solver and what to pass it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub path: Option<PathBuf>,
    pub extra_flags: Vec<String>,
    /// Worker threads handed to the solver; `None` leaves its default.
    pub threads: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    OptimalWithinGap,
    Feasible,
    Infeasible,
    TimeoutNoSolution,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::OptimalWithinGap | SolveStatus::Feasible)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSolution {
    pub status: SolveStatus,
    /// Aligned with the model's variables; empty without a solution.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Proven upper bound on the optimum, when the solver reports one.
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub solver_seconds: f64,
}

impl RawSolution {
    pub fn without_solution(status: SolveStatus, solver_seconds: f64) -> Self {
        Self { status, values: Vec::new(), objective: None, bound: None, gap: None, solver_seconds }
    }

    pub fn named(&self, model: &CanonicalModel) -> BTreeMap<String, f64> {
        model.variables.iter().zip(&self.values).map(|(v, &x)| (v.name.clone(), x)).collect()
    }

    pub fn value_of(&self, model: &CanonicalModel, name: &str) -> Option<f64> {
        model.var_index(name).and_then(|j| self.values.get(j).copied())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("invalid solve request: {0}")]
    Request(String),
    #[error("solver environment: {0}")]
    Environment(String),
    #[error("solver protocol error: {message}\n{stderr}")]
    Protocol { message: String, stderr: String },
    #[error("model too large for the oracle: {free} free assignment variables (limit {limit})")]
    TooLarge { free: usize, limit: usize },
    #[error("integrality: {0}")]
    Integrality(String),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Rounds integer-valued variables, rejecting values further than
/// [`INTEGRALITY_TOL`] from an integer.
pub fn round_values(model: &CanonicalModel, values: &mut [f64]) -> Result<(), SolveError> {
    for (v, x) in model.variables.iter().zip(values.iter_mut()) {
        let r = x.round();
        if (*x - r).abs() > INTEGRALITY_TOL {
            return Err(SolveError::Integrality(format!("{} = {x}", v.name)));
        }
        if v.kind == VarKind::Binary && !(r == 0.0 || r == 1.0) {
            return Err(SolveError::Integrality(format!("binary {} = {x}", v.name)));
        }
        *x = r + 0.0;
    }
    Ok(())
}

pub fn solve(
    model: &CanonicalModel,
    req: &SolveRequest,
    cfg: &SolverConfig,
    mode: ExecMode,
) -> Result<RawSolution, SolveError> {
    req.check()?;
    match req.backend {
        Backend::External => cbc::invoke_external(model, req, cfg),
        Backend::Oracle => {
            let t0 = Instant::now();
            let mut raw = exhaustive_oracle(model, mode)?;
            raw.solver_seconds = t0.elapsed().as_secs_f64();
            Ok(raw)
        }
    }
}
