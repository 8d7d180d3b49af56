//! derive → build → solve → extract → validate → report.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::check::{quality_report, recount_soft, validate_hard, CheckError, QualityReport, SoftTally, Timings, ViolationFinding};
use crate::derive::{derive, DeriveError, DerivedSets};
use crate::mip::{build_model, BuildError, CanonicalModel};
use crate::model::{validate_instance, Finding, RosterInstance};
use crate::par::ExecMode;
use crate::solver::{extract_roster, solve, Backend, RawSolution, RosterSolution, SolveError, SolveRequest, SolveStatus, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Derive,
    Build,
    Solve,
    Extract,
    Check,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("instance rejected: {}", .0.iter().filter(|f| f.is_error()).map(|f| f.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Finding>),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("extracting the roster: {0}")]
    Extract(SolveError),
    #[error("no roster: solver status {0:?}")]
    NoSolution(crate::solver::SolveStatus),
    #[error(transparent)]
    Check(#[from] CheckError),
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Invalid(_) => Stage::Validate,
            PipelineError::Derive(_) => Stage::Derive,
            PipelineError::Build(_) => Stage::Build,
            PipelineError::Solve(_) | PipelineError::NoSolution(_) => Stage::Solve,
            PipelineError::Extract(_) => Stage::Extract,
            PipelineError::Check(_) => Stage::Check,
        }
    }
}

pub struct PipelineOutput {
    pub derived: DerivedSets,
    pub model: CanonicalModel,
    pub raw: RawSolution,
    pub roster: RosterSolution,
    pub hard_findings: Vec<ViolationFinding>,
    pub tally: SoftTally,
    pub report: QualityReport,
}

/// Derives and builds without solving.
pub fn prepare(inst: &RosterInstance, mode: ExecMode) -> Result<(DerivedSets, CanonicalModel), PipelineError> {
    let findings = validate_instance(inst);
    if findings.iter().any(Finding::is_error) {
        return Err(PipelineError::Invalid(findings));
    }
    let der = derive(inst, mode)?;
    let model = build_model(inst, &der, &inst.weights)?;
    Ok((der, model))
}

pub fn run_pipeline(
    inst: &RosterInstance,
    req: &SolveRequest,
    cfg: &SolverConfig,
    mode: ExecMode,
) -> Result<PipelineOutput, PipelineError> {
    let t0 = Instant::now();
    let (der, model) = prepare(inst, mode)?;
    let raw = solve(&model, req, cfg, mode)?;
    if !raw.status.has_solution() {
        return Err(PipelineError::NoSolution(raw.status));
    }
    let mut roster = extract_roster(&raw, &model, inst, &der).map_err(PipelineError::Extract)?;
    roster.metadata.backend = Some(req.backend);
    let hard_findings = validate_hard(&roster, inst, &der)?;
    let tally = recount_soft(&roster, inst, &der, &inst.weights)?;
    roster.metadata.total_seconds = t0.elapsed().as_secs_f64();
    let timings = Timings { solver_seconds: raw.solver_seconds, total_seconds: roster.metadata.total_seconds };
    let report = quality_report(&roster, inst, &der, &inst.weights, timings)?;
    Ok(PipelineOutput { derived: der, model, raw, roster, hard_findings, tally, report })
}

/// Outcome of solving one model with both backends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendComparison {
    pub oracle: SolveStatus,
    pub oracle_objective: Option<f64>,
    pub external: SolveStatus,
    pub external_objective: Option<f64>,
}

impl BackendComparison {
    /// Same feasibility verdict and objectives within `tol`.
    pub fn agree(&self, tol: f64) -> bool {
        self.oracle.has_solution() == self.external.has_solution()
            && match (self.oracle_objective, self.external_objective) {
                (Some(a), Some(b)) => (a - b).abs() <= tol,
                (None, None) => true,
                _ => false,
            }
    }
}

/// Solves `inst` to optimality with the exhaustive oracle and the external solver.
pub fn compare_backends(
    inst: &RosterInstance,
    cfg: &SolverConfig,
    mode: ExecMode,
) -> Result<BackendComparison, PipelineError> {
    let (_, model) = prepare(inst, mode)?;
    let req = |backend| SolveRequest { gap: 0.0, time_limit_seconds: 60.0, backend };
    let a = solve(&model, &req(Backend::Oracle), cfg, mode)?;
    let b = solve(&model, &req(Backend::External), cfg, mode)?;
    Ok(BackendComparison { oracle: a.status, oracle_objective: a.objective, external: b.status, external_objective: b.objective })
}
