use dutyroster_core::model::Finding;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::{run_pipeline, PipelineError};
use dutyroster_core::solver::SolverConfig;
use dutyroster_store::{JobFailure, JobRecord, Store, StoreError};

fn failure_of(e: &PipelineError) -> JobFailure {
    let stage = serde_json::to_value(e.stage()).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    let findings = match e {
        PipelineError::Invalid(f) => f.iter().filter(|f| f.is_error()).map(|f: &Finding| f.message.clone()).collect(),
        PipelineError::Build(b) => vec![b.to_string()],
        _ => Vec::new(),
    };
    JobFailure { stage, message: e.to_string(), findings }
}

/// Runs a queued job to a terminal state on the snapshot taken at submission.
pub fn run_job(store: &Store, solver: &SolverConfig, id: i64) -> Result<JobRecord, StoreError> {
    let job = store.start_job(id)?;
    let inst = store.job_snapshot(id)?;
    match run_pipeline(&inst, &job.request, solver, ExecMode::default()) {
        Ok(out) => store.finish_job(id, &out.roster, &out.hard_findings, &out.report),
        Err(e) => store.fail_job(id, &failure_of(&e)),
    }
}
