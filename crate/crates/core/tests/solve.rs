mod common;

use dutyroster_core::mip::{CanonicalModel, Constraint, Family, Sense, VarKind, Variable};
use dutyroster_core::model::*;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::{prepare, run_pipeline};
use dutyroster_core::scenarios::{self, date, hm, period, physician, shift};
use dutyroster_core::solver::cbc::solver_available;
use dutyroster_core::solver::*;

fn oracle() -> SolveRequest {
    SolveRequest { gap: 0.0, time_limit_seconds: 60.0, backend: Backend::Oracle }
}

fn external(gap: f64, limit: f64) -> SolveRequest {
    SolveRequest { gap, time_limit_seconds: limit, backend: Backend::External }
}

fn contradictory() -> CanonicalModel {
    let x = Variable { name: "x[a,d]".into(), kind: VarKind::Binary, lower: 0.0, upper: 1.0, objective: 1.0 };
    let row = |name: &str, rhs| Constraint {
        name: name.into(),
        family: Family::new(1, 0),
        terms: vec![(0, 1.0)],
        sense: Sense::Eq,
        rhs,
    };
    CanonicalModel { variables: vec![x], constraints: vec![row("c1[one]", 1.0), row("c1[zero]", 0.0)] }
}

#[test]
fn contradictory_model_is_infeasible() {
    let raw = solve(&contradictory(), &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
    assert_eq!(raw.status, SolveStatus::Infeasible);
    assert!(raw.values.is_empty() && raw.objective.is_none());
    let cfg = SolverConfig::default();
    if solver_available(&cfg) {
        let raw = solve(&contradictory(), &external(0.0, 10.0), &cfg, ExecMode::Sequential).unwrap();
        assert_eq!(raw.status, SolveStatus::Infeasible);
    }
}

#[test]
fn empty_model_is_optimal_at_zero() {
    let raw = solve(&CanonicalModel::default(), &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
    assert_eq!(raw.status, SolveStatus::OptimalWithinGap);
    assert_eq!(raw.objective, Some(0.0));
}

/// Hand enumeration of the four patterns (who takes Mar 3, who takes Mar 4):
/// (a,a) and (b,b) break the 24 h rest; (a,b) earns a's wish of 10; (b,a) earns 0.
#[test]
fn rest_conflict_leaves_only_cross_assignments() {
    let inst = scenarios::tiny_demo();
    let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    assert_eq!(der.conflicts.hard.len(), 1);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let raw = solve(&model, &oracle(), &SolverConfig::default(), mode).unwrap();
        assert_eq!(raw.objective, Some(inst.weights.desired));
        let roster = extract_roster(&raw, &model, &inst, &der).unwrap();
        let got: Vec<(&str, &str)> =
            roster.assignments.iter().map(|a| (a.physician.as_str(), a.instance.as_str())).collect();
        assert_eq!(got, [("ana", "N@2025-03-03"), ("ben", "N@2025-03-04")]);
        assert!(roster.unassigned.is_empty());
    }
}

#[test]
fn rewarded_pairing_is_selected() {
    let mut inst = common::two_by_two();
    inst.preferences.push(PreferenceRecord {
        physician: PhysicianId::new("b"),
        target: PreferenceTarget::Instance { instance: common::night(4) },
        level: PreferenceLevel::StronglyDesired,
    });
    let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    let raw = solve(&model, &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
    assert_eq!(raw.objective, Some(inst.weights.strongly_desired));
    let roster = extract_roster(&raw, &model, &inst, &der).unwrap();
    assert!(roster.assignments.contains(&Assignment { physician: PhysicianId::new("b"), instance: common::night(4) }));
}

#[test]
fn nothing_assigned_without_mandatory_duties() {
    let mut inst = common::two_by_two();
    inst.duty_templates[0].mandatory = false;
    let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    let zeros = RawSolution {
        status: SolveStatus::Feasible,
        values: vec![0.0; model.variables.len()],
        objective: Some(0.0),
        bound: None,
        gap: None,
        solver_seconds: 0.0,
    };
    let roster = extract_roster(&zeros, &model, &inst, &der).unwrap();
    assert!(roster.assignments.is_empty());
    assert_eq!(roster.unassigned, vec![common::night(3), common::night(4)]);
}

#[test]
fn fractional_values_are_rejected() {
    let (der, model) = prepare(&common::two_by_two(), ExecMode::Sequential).unwrap();
    let mut values = vec![0.0; model.variables.len()];
    values[0] = 0.5;
    let raw = RawSolution {
        status: SolveStatus::Feasible,
        values,
        objective: None,
        bound: None,
        gap: None,
        solver_seconds: 0.0,
    };
    let err = extract_roster(&raw, &model, &common::two_by_two(), &der).unwrap_err();
    assert!(matches!(err, SolveError::Integrality(_)));
}

fn ward() -> RosterInstance {
    let start = date(2025, 3, 3);
    let mut inst = RosterInstance::empty("ward", period(start, start, &[]));
    inst.physicians = (0..3).map(|k| physician(&format!("p{k}"), 1.0, &[])).collect();
    inst.shift_templates = vec![shift("W", Recurrence::on(&Weekday::ALL, window(hm(8, 0), hm(16, 0))), (1, 2, 3))];
    inst
}

#[test]
fn desired_staffing_shows_in_the_roster() {
    let inst = ward();
    let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    let raw = solve(&model, &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
    // min 1, desired 2: one unit of desired staffing is worth the weight; a
    // third physician is surplus at weight 0, so 2 and 3 tie at the same objective.
    assert_eq!(raw.objective, Some(inst.weights.desired_staffing));
    assert_eq!(raw.value_of(&model, "yDes[W@2025-03-03]"), Some(1.0));
    let roster = extract_roster(&raw, &model, &inst, &der).unwrap();
    let st = &roster.staffing[0];
    let y: f64 = (0..3).map(|k| raw.value_of(&model, &format!("y[p{k},W@2025-03-03]")).unwrap()).sum();
    assert_eq!(st.assigned as f64, y);
    assert!(st.desired_met && st.assigned >= 2);
}

#[test]
fn oracle_refuses_large_models() {
    let (_, model) = prepare(&scenarios::internal_medicine(), ExecMode::Sequential).unwrap();
    let err = solve(&model, &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap_err();
    assert!(matches!(err, SolveError::TooLarge { limit: ORACLE_MAX_FREE, .. }), "{err}");
}

#[test]
fn bad_requests_are_rejected() {
    let model = CanonicalModel::default();
    for req in [external(1.5, 10.0), external(0.0, 0.0), external(-0.1, 10.0)] {
        let err = solve(&model, &req, &SolverConfig::default(), ExecMode::Sequential).unwrap_err();
        assert!(matches!(err, SolveError::Request(_)));
    }
}

#[test]
fn pipeline_solves_the_tiny_demo_externally() {
    let cfg = SolverConfig::default();
    if !solver_available(&cfg) {
        return;
    }
    let out = run_pipeline(&scenarios::tiny_demo(), &external(0.0, 30.0), &cfg, ExecMode::Sequential).unwrap();
    assert_eq!(out.raw.objective, Some(10.0));
    assert!(out.hard_findings.is_empty());
    assert_eq!(out.roster.assignments.len(), 2);
}

#[test]
fn one_second_limit_never_crashes() {
    let cfg = SolverConfig::default();
    if !solver_available(&cfg) {
        return;
    }
    let (_, model) = prepare(&scenarios::cardiology(), ExecMode::Parallel).unwrap();
    let raw = solve(&model, &external(0.0, 1.0), &cfg, ExecMode::Sequential).unwrap();
    assert!(matches!(raw.status, SolveStatus::Feasible | SolveStatus::TimeoutNoSolution | SolveStatus::OptimalWithinGap), "{:?}", raw.status);
}
