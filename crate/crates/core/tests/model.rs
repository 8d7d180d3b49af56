mod common;

use dutyroster_core::mip::{build_model, model_statistics, render_listing, CanonicalModel, VarClass, VarKind};
use dutyroster_core::model::*;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::prepare;
use dutyroster_core::scenarios::{self, date, period};
use dutyroster_core::solver::{emit_mps, parse_mps};

#[test]
fn empty_instance_gives_empty_model() {
    let inst = RosterInstance::empty("empty", period(date(2025, 3, 3), date(2025, 3, 9), &[]));
    let (_, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    assert!(model.variables.is_empty() && model.constraints.is_empty());
    let s = model_statistics(&model);
    assert_eq!((s.variables, s.binaries, s.integers, s.constraints, s.nonzeros), (0, 0, 0, 0, 0));
    assert!(s.per_family.is_empty());
}

#[test]
fn two_by_two_counts() {
    let (_, model) = prepare(&common::two_by_two(), ExecMode::Sequential).unwrap();
    assert_eq!(model.variables.len(), 4);
    assert!(model.variables.iter().all(|v| v.kind == VarKind::Binary && v.objective == 0.0));
    assert!(model.variables.iter().all(|v| v.class() == Some(VarClass::X)));
    assert_eq!(model.constraints.len(), 2);
    assert!(model.constraints.iter().all(|c| c.family.number == 1 && c.rhs == 1.0));
    let s = model_statistics(&model);
    assert_eq!(s.binaries, 4);
    assert_eq!(s.per_family.into_iter().collect::<Vec<_>>(), vec![("1".to_string(), 2)]);
}

#[test]
fn family_counts_partition_the_constraints() {
    for name in ["tiny-demo", "internal-medicine"] {
        let (_, model) = prepare(&scenarios::by_name(name).unwrap(), ExecMode::Sequential).unwrap();
        let s = model_statistics(&model);
        assert_eq!(s.per_family.values().sum::<usize>(), s.constraints, "{name}");
        assert_eq!(s.per_class.values().sum::<usize>(), s.variables, "{name}");
    }
}

// Written by hand from the fixed-field layout: fields at columns 2, 5, 15, 25, 40, 50.
const TWO_BY_TWO_MPS: &str = "\
NAME          2x2
OBJSENSE
    MAX
ROWS
 N  OBJ
 E  R0000000
 E  R0000001
COLUMNS
    MARKER    'MARKER'                 'INTORG'
    C0000000  R0000000  1
    C0000001  R0000001  1
    C0000002  R0000000  1
    C0000003  R0000001  1
    MARKER    'MARKER'                 'INTEND'
RHS
    RHS       R0000000  1              R0000001  1
BOUNDS
 BV BND       C0000000
 BV BND       C0000001
 BV BND       C0000002
 BV BND       C0000003
ENDATA
";

#[test]
fn two_by_two_mps_matches_hand_written_file() {
    let (_, model) = prepare(&common::two_by_two(), ExecMode::Sequential).unwrap();
    let mps = emit_mps(&model, "2x2").unwrap();
    assert_eq!(mps.text, TWO_BY_TWO_MPS);
    let cols: Vec<&str> = mps.names.columns.iter().map(|(_, l)| l.as_str()).collect();
    assert_eq!(cols, ["x[a,N@2025-03-03]", "x[a,N@2025-03-04]", "x[b,N@2025-03-03]", "x[b,N@2025-03-04]"]);
    assert_eq!(mps.names.rows[1].1, "c1[N@2025-03-04]");
}

#[test]
fn mps_round_trip_restores_the_model() {
    for name in ["tiny-demo", "internal-medicine"] {
        let (_, model) = prepare(&scenarios::by_name(name).unwrap(), ExecMode::Sequential).unwrap();
        let mps = emit_mps(&model, name).unwrap();
        let back = parse_mps(&mps.text, &mps.names).unwrap();
        assert_eq!(back, model, "{name}");
        assert_eq!(emit_mps(&back, name).unwrap(), mps);
    }
}

#[test]
fn empty_model_round_trips() {
    let model = CanonicalModel::default();
    let mps = emit_mps(&model, "empty").unwrap();
    assert_eq!(parse_mps(&mps.text, &mps.names).unwrap(), model);
}

#[test]
fn listing_names_every_constraint() {
    let (_, model) = prepare(&scenarios::tiny_demo(), ExecMode::Sequential).unwrap();
    let text = render_listing(&model);
    for c in &model.constraints {
        assert!(text.contains(&format!("{}:", c.name)), "{}", c.name);
    }
}

#[test]
fn block_free_configuration_has_no_block_structure() {
    let mut inst = scenarios::cardiology();
    inst.blocks.clear();
    inst.carryover.blocks.clear();
    let (_, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    let s = model_statistics(&model);
    for class in ["xBlk", "yBlk", "yBlkCons", "vioMaxConsB"] {
        assert_eq!(s.per_class.get(class), None, "{class}");
    }
    for family in 21..=27 {
        assert_eq!(s.family_total(family), 0, "family {family}");
    }
}

#[test]
fn pool_free_configuration_has_no_pool_structure() {
    let mut inst = scenarios::internal_medicine();
    inst.pools.clear();
    let (_, model) = prepare(&inst, ExecMode::Sequential).unwrap();
    let s = model_statistics(&model);
    for class in ["vioMaxD", "vioMinD", "vioMaxPhy", "vioDown", "vioUp"] {
        assert_eq!(s.per_class.get(class), None, "{class}");
    }
    for family in 28..=36 {
        assert_eq!(s.family_total(family), 0, "family {family}");
    }
}

#[test]
fn build_is_deterministic() {
    let inst = scenarios::internal_medicine();
    let (der, a) = prepare(&inst, ExecMode::Parallel).unwrap();
    let b = build_model(&inst, &der, &inst.weights).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pre_assignment_clash_names_the_family() {
    let mut inst = scenarios::tiny_demo();
    inst.pre_assignments = vec![
        PreAssignment { physician: PhysicianId::new("ana"), instance: common::night(3) },
        PreAssignment { physician: PhysicianId::new("ana"), instance: common::night(4) },
    ];
    let err = prepare(&inst, ExecMode::Sequential).unwrap_err();
    assert!(err.to_string().contains("15.1"), "{err}");
}
