use std::collections::BTreeSet;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dutyroster_core::check::{quality_report, recount_soft, validate_hard, Timings, ViolationFinding};
use dutyroster_core::derive::derive;
use dutyroster_core::document;
use dutyroster_core::model::{validate_instance, Finding, PhysicianId, PreferenceLevel, PreferenceRecord, PreferenceTarget, RosterInstance};
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::prepare;
use dutyroster_core::solver::{Assignment, RosterSolution, SolveMetadata, SolveRequest};
use dutyroster_store::{RosterStatus, RosterVersion};

use crate::{calendar_for, run_job, ApiError, AppState, Role};

type ApiResult<T> = Result<T, ApiError>;

/// Editable parts of an instance: path segment and document field.
const SECTIONS: [(&str, &str); 14] = [
    ("period", "period"),
    ("qualifications", "qualifications"),
    ("physicians", "physicians"),
    ("duty-templates", "duty_templates"),
    ("shift-templates", "shift_templates"),
    ("pre-assignments", "pre_assignments"),
    ("blocks", "blocks"),
    ("rest-rules", "rest_rules"),
    ("pools", "pools"),
    ("weekly-sets", "weekly_sets"),
    ("preference-caps", "preference_caps"),
    ("weekend-policy", "weekend_policy"),
    ("carryover", "carryover"),
    ("weights", "weights"),
];

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/whoami", get(whoami))
        .route("/instances", get(list_instances))
        .route("/instances/{key}", get(get_instance).put(put_instance))
        .route("/instances/{key}/sections/{section}", get(get_section).put(put_section))
        .route("/instances/{key}/preferences", get(list_preferences).post(post_preference))
        .route("/instances/{key}/check", post(check_instance))
        .route("/instances/{key}/solve", post(post_solve))
        .route("/instances/{key}/jobs", get(list_jobs))
        .route("/jobs/{id}", get(get_job))
        .route("/instances/{key}/roster", get(get_roster))
        .route("/instances/{key}/rosters", get(list_rosters))
        .route("/instances/{key}/rosters/{version}/adjust", post(adjust))
        .route("/instances/{key}/rosters/{version}/publish", post(publish))
        .route("/instances/{key}/rosters/{version}/report", get(report))
        .route("/instances/{key}/calendar/{physician}", get(calendar))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad(format!("malformed request: {e}")))
}

fn check_valid(inst: &RosterInstance) -> ApiResult<()> {
    let findings = validate_instance(inst);
    if findings.iter().any(Finding::is_error) {
        return Err(ApiError::invalid(findings));
    }
    Ok(())
}

async fn whoami(role: Role) -> Json<Role> {
    Json(role)
}

async fn list_instances(role: Role, State(s): State<AppState>) -> ApiResult<Json<Vec<String>>> {
    role.require_planner()?;
    Ok(Json(s.store.instance_keys()?))
}

#[derive(Serialize)]
struct InstanceView {
    key: String,
    version: i64,
    updated_at: String,
    document: Value,
}

async fn get_instance(role: Role, State(s): State<AppState>, Path(key): Path<String>) -> ApiResult<Json<InstanceView>> {
    let stored = s.store.instance(&key)?;
    let mut inst = stored.value;
    if let Role::Physician(me) = &role {
        inst.preferences.retain(|r| &r.physician == me);
    }
    let document = serde_json::from_str(&document::encode_instance(&inst)).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(InstanceView { key, version: stored.version, updated_at: stored.updated_at, document }))
}

#[derive(Deserialize)]
struct PutInstance {
    expected_version: Option<i64>,
    document: Value,
}

async fn put_instance(
    role: Role,
    State(s): State<AppState>,
    Path(key): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    role.require_planner()?;
    let req: PutInstance = parse_json(&body)?;
    let inst = document::decode_instance(&req.document.to_string())?;
    check_valid(&inst)?;
    let version = s.store.put_instance(&key, &inst, req.expected_version)?;
    let status = if req.expected_version.is_none() { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({ "key": key, "version": version }))))
}

fn section_field(section: &str) -> ApiResult<&'static str> {
    SECTIONS
        .iter()
        .find(|(name, _)| *name == section)
        .map(|(_, field)| *field)
        .ok_or_else(|| ApiError::NotFound(format!("section {section}")))
}

async fn get_section(
    role: Role,
    State(s): State<AppState>,
    Path((key, section)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    let field = section_field(&section)?;
    let stored = s.store.instance(&key)?;
    let value = serde_json::to_value(&stored.value).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(json!({ "version": stored.version, "section": section, "value": value[field] })))
}

#[derive(Deserialize)]
struct PutSection {
    expected_version: i64,
    value: Value,
}

async fn put_section(
    role: Role,
    State(s): State<AppState>,
    Path((key, section)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    let field = section_field(&section)?;
    let req: PutSection = parse_json(&body)?;
    let stored = s.store.instance(&key)?;
    let mut doc = serde_json::to_value(&stored.value).map_err(|e| ApiError::Internal(e.to_string()))?;
    doc[field] = req.value;
    let inst: RosterInstance = serde_json::from_value(doc).map_err(|e| ApiError::bad(format!("{section}: {e}")))?;
    check_valid(&inst)?;
    let version = s.store.put_instance(&key, &inst, Some(req.expected_version))?;
    Ok(Json(json!({ "key": key, "version": version })))
}

#[derive(Serialize)]
struct PreferenceView {
    #[serde(flatten)]
    record: PreferenceRecord,
    version: i64,
}

async fn list_preferences(
    role: Role,
    State(s): State<AppState>,
    Path(key): Path<String>,
) -> ApiResult<Json<Vec<PreferenceView>>> {
    let all = s.store.preferences(&key)?;
    let mine = all
        .into_iter()
        .filter(|(r, _)| match &role {
            Role::Planner => true,
            Role::Physician(me) => &r.physician == me,
        })
        .map(|(record, version)| PreferenceView { record, version })
        .collect();
    Ok(Json(mine))
}

#[derive(Deserialize)]
struct PostPreference {
    /// Defaults to the caller for physicians.
    physician: Option<PhysicianId>,
    target: PreferenceTarget,
    level: PreferenceLevel,
    expected_version: Option<i64>,
}

async fn post_preference(
    role: Role,
    State(s): State<AppState>,
    Path(key): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: PostPreference = parse_json(&body)?;
    let physician = match (&role, req.physician) {
        (_, Some(p)) => p,
        (Role::Physician(me), None) => me.clone(),
        (Role::Planner, None) => return Err(ApiError::bad("physician is required")),
    };
    role.may_act_for(&physician)?;
    let record = PreferenceRecord { physician, target: req.target, level: req.level };
    let version = blocking(move || Ok(s.store.submit_preference(&key, &record, req.expected_version)?)).await?;
    let status = if version == 1 { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({ "version": version }))))
}

async fn check_instance(role: Role, State(s): State<AppState>, Path(key): Path<String>) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    let inst = s.store.instance(&key)?.value;
    blocking(move || {
        let (der, model) = prepare(&inst, ExecMode::default())?;
        Ok(Json(json!({
            "instances": der.instances.len(),
            "variables": model.variables.len(),
            "constraints": model.constraints.len(),
        })))
    })
    .await
}

async fn post_solve(
    role: Role,
    State(s): State<AppState>,
    Path(key): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    role.require_planner()?;
    let req: SolveRequest = if body.is_empty() { SolveRequest::default() } else { parse_json(&body)? };
    req.check().map_err(|e| ApiError::bad(e.to_string()))?;
    let job = s.store.create_job(&key, &req)?;
    let id = job.id;
    tokio::task::spawn_blocking(move || {
        if let Err(e) = run_job(&s.store, &s.solver, id) {
            eprintln!("job {id}: {e}");
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job": job }))))
}

async fn list_jobs(role: Role, State(s): State<AppState>, Path(key): Path<String>) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    Ok(Json(json!(s.store.jobs(&key)?)))
}

async fn get_job(role: Role, State(s): State<AppState>, Path(id): Path<i64>) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    Ok(Json(json!(s.store.job(id)?)))
}

#[derive(Deserialize)]
struct RosterQuery {
    version: Option<i64>,
    #[serde(default)]
    published: bool,
}

/// Physicians see the published roster only; planners any version.
fn visible_roster(s: &AppState, role: &Role, key: &str, q: &RosterQuery) -> ApiResult<RosterVersion> {
    let published = || s.store.published(key)?.ok_or_else(|| ApiError::NotFound(format!("no published roster for {key}")));
    match role {
        Role::Physician(_) if q.version.is_some() => Err(ApiError::Forbidden("drafts are visible to planners only".into())),
        Role::Physician(_) => published(),
        Role::Planner => match q.version {
            Some(v) => Ok(s.store.roster_version(key, v)?),
            None if q.published => published(),
            None => s.store.latest_roster(key)?.ok_or_else(|| ApiError::NotFound(format!("no roster for {key}"))),
        },
    }
}

async fn get_roster(
    role: Role,
    State(s): State<AppState>,
    Path(key): Path<String>,
    Query(q): Query<RosterQuery>,
) -> ApiResult<Json<RosterVersion>> {
    Ok(Json(visible_roster(&s, &role, &key, &q)?))
}

#[derive(Serialize)]
struct VersionSummary {
    version: i64,
    status: RosterStatus,
    author: String,
    created_at: String,
    hard_violations: usize,
}

async fn list_rosters(role: Role, State(s): State<AppState>, Path(key): Path<String>) -> ApiResult<Json<Vec<VersionSummary>>> {
    role.require_planner()?;
    let out = s
        .store
        .roster_versions(&key)?
        .into_iter()
        .map(|v| VersionSummary {
            version: v.version,
            status: v.status,
            author: v.author.clone(),
            created_at: v.created_at.clone(),
            hard_violations: v.hard_violations(),
        })
        .collect();
    Ok(Json(out))
}

#[derive(Deserialize)]
struct Adjustment {
    #[serde(default)]
    assign: Vec<Assignment>,
    #[serde(default)]
    unassign: Vec<Assignment>,
    #[serde(default = "planner")]
    author: String,
}

fn planner() -> String {
    "planner".to_owned()
}

async fn adjust(
    role: Role,
    State(s): State<AppState>,
    Path((key, version)): Path<(String, i64)>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    role.require_planner()?;
    let req: Adjustment = parse_json(&body)?;
    blocking(move || {
        let base = s.store.roster_version(&key, version)?;
        let inst = s.store.instance(&key)?.value;
        let der = derive(&inst, ExecMode::default()).map_err(|e| ApiError::bad(e.to_string()))?;
        let mut held: BTreeSet<Assignment> = base.roster.assignments.into_iter().collect();
        for a in &req.unassign {
            held.remove(a);
        }
        held.extend(req.assign);
        let mut metadata = SolveMetadata::manual();
        metadata.backend = base.roster.metadata.backend;
        let roster = RosterSolution::from_assignments(held, &inst, &der, metadata);
        let findings: Vec<ViolationFinding> = validate_hard(&roster, &inst, &der)?;
        let soft = recount_soft(&roster, &inst, &der, &inst.weights)?;
        let v = s.store.save_roster(&key, RosterStatus::Adjusted, &req.author, &roster, &findings)?;
        Ok((
            StatusCode::CREATED,
            Json(json!({
                "version": v,
                "publishable": findings.is_empty(),
                "hard_findings": findings,
                "soft": soft,
            })),
        ))
    })
    .await
}

#[derive(Deserialize, Default)]
struct PublishBody {
    author: Option<String>,
}

async fn publish(
    role: Role,
    State(s): State<AppState>,
    Path((key, version)): Path<(String, i64)>,
    body: Bytes,
) -> ApiResult<Json<RosterVersion>> {
    role.require_planner()?;
    let req: PublishBody = if body.is_empty() { PublishBody::default() } else { parse_json(&body)? };
    Ok(Json(s.store.publish(&key, version, req.author.as_deref().unwrap_or("planner"))?))
}

async fn report(
    role: Role,
    State(s): State<AppState>,
    Path((key, version)): Path<(String, i64)>,
) -> ApiResult<Json<Value>> {
    role.require_planner()?;
    blocking(move || {
        let v = s.store.roster_version(&key, version)?;
        let inst = s.store.instance(&key)?.value;
        let der = derive(&inst, ExecMode::default()).map_err(|e| ApiError::bad(e.to_string()))?;
        let timings = Timings { solver_seconds: v.roster.metadata.solver_seconds, total_seconds: v.roster.metadata.total_seconds };
        let r = quality_report(&v.roster, &inst, &der, &inst.weights, timings)?;
        Ok(Json(json!(r)))
    })
    .await
}

async fn calendar(
    role: Role,
    State(s): State<AppState>,
    Path((key, physician)): Path<(String, String)>,
    Query(q): Query<RosterQuery>,
) -> ApiResult<Response> {
    let physician = PhysicianId::new(physician.trim_end_matches(".ics"));
    role.may_act_for(&physician)?;
    let v = visible_roster(&s, &role, &key, &q)?;
    let text = blocking(move || {
        let inst = s.store.instance(&key)?.value;
        if inst.physician_index(&physician).is_none() {
            return Err(ApiError::NotFound(format!("physician {physician}")));
        }
        let der = derive(&inst, ExecMode::default()).map_err(|e| ApiError::bad(e.to_string()))?;
        let stamp = DateTime::parse_from_rfc3339(&v.created_at).map(|t| t.with_timezone(&Utc)).unwrap_or_default();
        Ok(calendar_for(&physician, &v.roster, &inst, &der, stamp).to_string())
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "text/calendar; charset=utf-8")], text).into_response())
}
