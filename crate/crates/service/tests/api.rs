use std::collections::HashMap;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use dutyroster_core::derive::derive;
use dutyroster_core::document;
use dutyroster_core::model::{PhysicianId, PreAssignment, PreferenceLevel, PreferenceTarget, RosterInstance};
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::run_pipeline;
use dutyroster_core::scenarios::{date, instance, internal_medicine, tiny_demo};
use dutyroster_core::solver::{Backend, SolveRequest, SolverConfig};
use dutyroster_service::{parse_tokens, router, AppState, Role};
use dutyroster_store::Store;

const PLANNER: &str = "p-token";
const ANA: &str = "ana-token";
const BEN: &str = "ben-token";

fn app_with(solver: SolverConfig) -> Router {
    let tokens = HashMap::from([
        (PLANNER.to_owned(), Role::Planner),
        (ANA.to_owned(), Role::Physician(PhysicianId::new("ana"))),
        (BEN.to_owned(), Role::Physician(PhysicianId::new("ben"))),
    ]);
    router(AppState::new(Store::open_in_memory().unwrap(), solver, tokens))
}

fn app() -> Router {
    app_with(SolverConfig::default())
}

async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn json_call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, token, body).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

fn doc(inst: &RosterInstance) -> Value {
    serde_json::from_str(&document::encode_instance(inst)).unwrap()
}

async fn upload(app: &Router, key: &str, inst: &RosterInstance) {
    let (s, body) =
        json_call(app, "PUT", &format!("/instances/{key}"), Some(PLANNER), Some(json!({ "document": doc(inst) }))).await;
    assert_eq!(s, StatusCode::CREATED, "{body}");
}

async fn wait_for_job(app: &Router, id: i64) -> Value {
    for _ in 0..600 {
        let (s, job) = json_call(app, "GET", &format!("/jobs/{id}"), Some(PLANNER), None).await;
        assert_eq!(s, StatusCode::OK);
        if job["state"] == "done" || job["state"] == "failed" {
            return job;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("job {id} did not finish");
}

async fn solve(app: &Router, key: &str, backend: &str) -> Value {
    let req = json!({ "gap": 0.0, "time_limit_seconds": 60.0, "backend": backend });
    let (s, body) = json_call(app, "POST", &format!("/instances/{key}/solve"), Some(PLANNER), Some(req)).await;
    assert_eq!(s, StatusCode::ACCEPTED, "{body}");
    assert_eq!(body["job"]["state"], "queued");
    wait_for_job(app, body["job"]["id"].as_i64().unwrap()).await
}

#[tokio::test]
async fn tokens_and_roles_are_enforced() {
    let app = app();
    upload(&app, "demo", &tiny_demo()).await;
    assert_eq!(call(&app, "GET", "/instances", None, None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&app, "GET", "/instances", Some("nope"), None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&app, "GET", "/instances", Some(ANA), None).await.0, StatusCode::FORBIDDEN);
    let (s, keys) = json_call(&app, "GET", "/instances", Some(PLANNER), None).await;
    assert_eq!((s, keys), (StatusCode::OK, json!(["demo"])));
    assert_eq!(call(&app, "POST", "/instances/demo/solve", Some(BEN), None).await.0, StatusCode::FORBIDDEN);
    let pref = json!({
        "physician": "ben",
        "target": { "type": "instance", "instance": instance("N", date(2025, 3, 3)) },
        "level": "undesired",
    });
    assert_eq!(call(&app, "POST", "/instances/demo/preferences", Some(ANA), Some(pref)).await.0, StatusCode::FORBIDDEN);
    let (_, me) = json_call(&app, "GET", "/whoami", Some(BEN), None).await;
    assert_eq!(me, json!({ "physician": "ben" }));
}

#[tokio::test]
async fn instance_writes_need_the_current_version() {
    let app = app();
    upload(&app, "demo", &tiny_demo()).await;
    let body = json!({ "document": doc(&tiny_demo()) });
    assert_eq!(call(&app, "PUT", "/instances/demo", Some(PLANNER), Some(body)).await.0, StatusCode::CONFLICT);

    let (s, rules) = json_call(&app, "GET", "/instances/demo/sections/rest-rules", Some(PLANNER), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(rules["version"], 1);
    let mut value = rules["value"].clone();
    value[0]["mandatory_hours"] = json!(0.0);
    let put = json!({ "expected_version": 1, "value": value });
    let (s, body) = json_call(&app, "PUT", "/instances/demo/sections/rest-rules", Some(PLANNER), Some(put.clone())).await;
    assert_eq!((s, body["version"].clone()), (StatusCode::OK, json!(2)));
    assert_eq!(call(&app, "PUT", "/instances/demo/sections/rest-rules", Some(PLANNER), Some(put)).await.0, StatusCode::CONFLICT);

    let (_, got) = json_call(&app, "GET", "/instances/demo", Some(PLANNER), None).await;
    assert_eq!(got["document"]["payload"]["rest_rules"][0]["mandatory_hours"], json!(0.0));

    let bad = json!({ "expected_version": 2, "value": "not a list" });
    assert_eq!(call(&app, "PUT", "/instances/demo/sections/rest-rules", Some(PLANNER), Some(bad)).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(call(&app, "GET", "/instances/demo/sections/nothing", Some(PLANNER), None).await.0, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "PUT", "/instances/x", Some(PLANNER), Some(json!({ "document": { "kind": "instance" } }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn eleventh_undesired_duty_names_the_cap() {
    let app = app();
    let mut inst = internal_medicine();
    inst.preferences.clear();
    upload(&app, "im", &inst).await;
    let p = inst.physicians[0].id.clone();
    let der = derive(&inst, ExecMode::Sequential).unwrap();
    let month = inst.period.start_date.format("%Y-%m").to_string();
    let duties: Vec<_> = der
        .duties
        .iter()
        .map(|&d| &der.instances[d])
        .filter(|x| x.date.format("%Y-%m").to_string() == month)
        .take(11)
        .collect();
    assert_eq!(duties.len(), 11);
    for (n, x) in duties.iter().enumerate() {
        let body = json!({
            "physician": p,
            "target": PreferenceTarget::Instance { instance: x.id.clone() },
            "level": PreferenceLevel::Undesired,
        });
        let (s, res) = json_call(&app, "POST", "/instances/im/preferences", Some(PLANNER), Some(body)).await;
        if n < 10 {
            assert_eq!(s, StatusCode::CREATED, "{res}");
        } else {
            assert_eq!(s, StatusCode::BAD_REQUEST);
            assert_eq!(res["cap"]["limit"], 10);
            assert_eq!(res["cap"]["count"], 11);
            let msg = res["error"].as_str().unwrap();
            assert!(msg.contains("'undesired'") && msg.contains("the cap is 10"), "{msg}");
        }
    }
}

#[tokio::test]
async fn fourth_impossible_duty_names_the_cap() {
    let app = app();
    let mut inst = internal_medicine();
    inst.preferences.clear();
    upload(&app, "im", &inst).await;
    let p = inst.physicians[1].id.clone();
    let der = derive(&inst, ExecMode::Sequential).unwrap();
    for (n, &d) in der.duties.iter().take(4).enumerate() {
        let body = json!({
            "physician": p,
            "target": PreferenceTarget::Instance { instance: der.instances[d].id.clone() },
            "level": PreferenceLevel::Impossible,
        });
        let (s, res) = json_call(&app, "POST", "/instances/im/preferences", Some(PLANNER), Some(body)).await;
        if n < 3 {
            assert_eq!(s, StatusCode::CREATED, "{res}");
        } else {
            assert_eq!(s, StatusCode::BAD_REQUEST);
            assert_eq!(res["cap"]["level"], "impossible");
            assert!(res["error"].as_str().unwrap().contains("the cap is 3"), "{res}");
        }
    }
}

#[tokio::test]
async fn repeated_slot_submission_conflicts() {
    let app = app();
    upload(&app, "demo", &tiny_demo()).await;
    let body = json!({
        "target": { "type": "instance", "instance": instance("N", date(2025, 3, 4)) },
        "level": "desired",
    });
    assert_eq!(call(&app, "POST", "/instances/demo/preferences", Some(BEN), Some(body.clone())).await.0, StatusCode::CREATED);
    assert_eq!(call(&app, "POST", "/instances/demo/preferences", Some(BEN), Some(body.clone())).await.0, StatusCode::CONFLICT);
    let mut update = body;
    update["expected_version"] = json!(1);
    update["level"] = json!("undesired");
    let (s, res) = json_call(&app, "POST", "/instances/demo/preferences", Some(BEN), Some(update)).await;
    assert_eq!((s, res["version"].clone()), (StatusCode::OK, json!(2)));
    let (_, mine) = json_call(&app, "GET", "/instances/demo/preferences", Some(BEN), None).await;
    assert_eq!(mine.as_array().unwrap().len(), 1);
    assert_eq!(mine[0]["level"], "undesired");
}

#[tokio::test]
async fn solve_adjust_publish_and_export() {
    let app = app();
    let inst = tiny_demo();
    upload(&app, "demo", &inst).await;

    let job = solve(&app, "demo", "oracle").await;
    assert_eq!(job["state"], "done", "{job}");
    assert!(job["started_at"].is_string() && job["finished_at"].is_string());
    assert_eq!(job["report"]["hard_findings"], 0);
    let draft = job["result"].as_i64().unwrap();

    let req = SolveRequest { gap: 0.0, time_limit_seconds: 60.0, backend: Backend::Oracle };
    let expected = run_pipeline(&inst, &req, &SolverConfig::default(), ExecMode::Sequential).unwrap();
    let (_, roster) = json_call(&app, "GET", "/instances/demo/roster", Some(PLANNER), None).await;
    assert_eq!(roster["status"], "draft");
    assert_eq!(roster["roster"]["assignments"], json!(expected.roster.assignments));
    assert_eq!(job["report"]["objective"], json!(expected.report.objective));

    // drafts stay hidden from physicians
    assert_eq!(call(&app, "GET", "/instances/demo/roster", Some(ANA), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/instances/demo/roster?version=1", Some(ANA), None).await.0, StatusCode::FORBIDDEN);

    // give ana both nights: a mandatory rest clash
    let edit = json!({
        "unassign": [{ "physician": "ben", "instance": instance("N", date(2025, 3, 4)) }],
        "assign": [{ "physician": "ana", "instance": instance("N", date(2025, 3, 4)) }],
    });
    let (s, adjusted) = json_call(&app, "POST", &format!("/instances/demo/rosters/{draft}/adjust"), Some(PLANNER), Some(edit)).await;
    assert_eq!(s, StatusCode::CREATED, "{adjusted}");
    assert_eq!(adjusted["publishable"], false);
    let findings = adjusted["hard_findings"].as_array().unwrap();
    assert_eq!(findings.len(), 1);
    assert!(findings[0]["family"].as_str().unwrap().starts_with("15"), "{findings:?}");
    assert_eq!(adjusted["soft"]["unassigned_duties"], 0);

    let bad = adjusted["version"].as_i64().unwrap();
    let (s, refused) = json_call(&app, "POST", &format!("/instances/demo/rosters/{bad}/publish"), Some(PLANNER), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(refused["findings"].as_array().unwrap(), findings);

    let (s, published) = json_call(&app, "POST", &format!("/instances/demo/rosters/{draft}/publish"), Some(PLANNER), None).await;
    assert_eq!(s, StatusCode::OK, "{published}");
    assert_eq!(published["status"], "published");
    let (s, seen) = json_call(&app, "GET", "/instances/demo/roster", Some(BEN), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(seen["version"], published["version"]);

    let (_, versions) = json_call(&app, "GET", "/instances/demo/rosters", Some(PLANNER), None).await;
    let statuses: Vec<_> = versions.as_array().unwrap().iter().map(|v| v["status"].as_str().unwrap()).collect();
    assert_eq!(statuses, vec!["draft", "adjusted", "published"]);

    let (s, report) = json_call(&app, "GET", &format!("/instances/demo/rosters/{draft}/report"), Some(PLANNER), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(report["unassigned_duties"], json!([]));

    // ben holds the night of Mar 4
    let (s, ics) = call(&app, "GET", "/instances/demo/calendar/ben.ics", Some(BEN), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ics.matches("BEGIN:VEVENT").count(), 1, "{ics}");
    assert!(ics.contains("DTSTART:20250304T200000"), "{ics}");
    assert!(ics.contains("DTEND:20250305T080000"), "{ics}");
    assert_eq!(call(&app, "GET", "/instances/demo/calendar/ben.ics", Some(ANA), None).await.0, StatusCode::FORBIDDEN);
    assert_eq!(call(&app, "GET", "/instances/demo/calendar/zed", Some(PLANNER), None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn build_clash_is_reported_with_its_finding() {
    let app = app();
    let mut inst = tiny_demo();
    inst.pre_assignments = [3, 4]
        .into_iter()
        .map(|d| PreAssignment { physician: PhysicianId::new("ana"), instance: instance("N", date(2025, 3, d)) })
        .collect();
    upload(&app, "clash", &inst).await;
    let (s, body) = json_call(&app, "POST", "/instances/clash/check", Some(PLANNER), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["clash"].as_str().unwrap().contains("15.1"), "{body}");

    let job = solve(&app, "clash", "oracle").await;
    assert_eq!(job["state"], "failed");
    assert_eq!(job["failure"]["stage"], "build");
    assert!(job["failure"]["findings"][0].as_str().unwrap().contains("15.1"));
    assert!(job["result"].is_null());
}

#[tokio::test]
async fn missing_solver_fails_at_solve() {
    let app = app_with(SolverConfig { path: Some("/nonexistent/cbc".into()), ..Default::default() });
    upload(&app, "demo", &tiny_demo()).await;
    let job = solve(&app, "demo", "external").await;
    assert_eq!(job["state"], "failed");
    assert_eq!(job["failure"]["stage"], "solve");
    assert!(job["failure"]["message"].as_str().unwrap().contains("solver environment"), "{job}");
}

#[tokio::test]
async fn solve_requests_are_checked() {
    let app = app();
    upload(&app, "demo", &tiny_demo()).await;
    let (s, body) = json_call(&app, "POST", "/instances/demo/solve", Some(PLANNER), Some(json!({ "gap": 2.0, "time_limit_seconds": 1.0, "backend": "oracle" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{body}");
    assert_eq!(call(&app, "POST", "/instances/none/solve", Some(PLANNER), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/jobs/99", Some(PLANNER), None).await.0, StatusCode::NOT_FOUND);
}

#[test]
fn token_table_parses() {
    let t = parse_tokens("a=planner, b=physician:ana").unwrap();
    assert_eq!(t["a"], Role::Planner);
    assert_eq!(t["b"], Role::Physician(PhysicianId::new("ana")));
    assert!(parse_tokens("c=admin").is_err());
    assert!(parse_tokens("d").is_err());
}

#[tokio::test]
async fn external_solve_of_demo_matches_oracle() {
    if !dutyroster_core::solver::cbc::solver_available(&SolverConfig::default()) {
        eprintln!("skipped: no CBC executable");
        return;
    }
    let app = app();
    let inst = tiny_demo();
    upload(&app, "demo", &inst).await;
    let job = solve(&app, "demo", "external").await;
    assert_eq!(job["state"], "done", "{job}");
    let req = SolveRequest { gap: 0.0, time_limit_seconds: 60.0, backend: Backend::Oracle };
    let oracle = run_pipeline(&inst, &req, &SolverConfig::default(), ExecMode::Sequential).unwrap();
    let (_, roster) = json_call(&app, "GET", "/instances/demo/roster", Some(PLANNER), None).await;
    assert_eq!(roster["roster"]["assignments"], json!(oracle.roster.assignments));
    assert!((job["report"]["objective"].as_f64().unwrap() - oracle.report.objective).abs() < 1e-6);
}
