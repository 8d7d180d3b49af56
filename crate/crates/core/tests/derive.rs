use std::collections::BTreeSet;

use dutyroster_core::derive::{compute_target_numbers, derive, derive_qualification_sets, expand_instances};
use dutyroster_core::model::*;
use dutyroster_core::par::ExecMode;
use dutyroster_core::scenarios::{self, date, duty, hm, next, period, physician, qualification, qs, rule, shift};

fn nights(day: i64) -> Vec<Instance> {
    (1..=day)
        .map(|d| {
            let date = date(2025, 3, 1) + chrono::Duration::days(d - 1);
            Instance {
                id: InstanceId::of(&TemplateId::new("N"), date),
                kind: Kind::Duty,
                template: TemplateId::new("N"),
                date,
                day: d,
                start: (d - 1) * 1440 + 1200,
                end: d * 1440 + 480,
            }
        })
        .collect()
}

#[test]
fn equal_rates_split_evenly() {
    let inst = nights(10);
    let duties: Vec<usize> = (0..10).collect();
    let none = BTreeSet::new();
    let t = compute_target_numbers(&PoolId::new("p"), &duties, &inst, &[(1.0, &none), (1.0, &none)]).unwrap();
    assert_eq!(t, vec![5.0, 5.0]);
}

#[test]
fn part_time_rate_scales_target() {
    // 10 · 1.0/1.6 and 10 · 0.6/1.6
    let inst = nights(10);
    let duties: Vec<usize> = (0..10).collect();
    let none = BTreeSet::new();
    let t = compute_target_numbers(&PoolId::new("p"), &duties, &inst, &[(1.0, &none), (0.6, &none)]).unwrap();
    assert!((t[0] - 6.25).abs() < 1e-12 && (t[1] - 3.75).abs() < 1e-12, "{t:?}");
}

#[test]
fn absent_on_every_pool_day_gets_zero() {
    let inst = nights(4);
    let duties: Vec<usize> = (0..4).collect();
    let none = BTreeSet::new();
    let away: BTreeSet<i64> = (1..=4).collect();
    let t = compute_target_numbers(&PoolId::new("p"), &duties, &inst, &[(1.0, &none), (1.0, &away)]).unwrap();
    assert_eq!(t, vec![4.0, 0.0]);
}

#[test]
fn pool_nobody_can_attend_is_degenerate() {
    let inst = nights(2);
    let away: BTreeSet<i64> = (1..=2).collect();
    assert!(compute_target_numbers(&PoolId::new("p"), &[0, 1], &inst, &[(1.0, &away)]).is_err());
}

fn quali_instance() -> RosterInstance {
    let start = date(2025, 3, 3);
    let mut inst = RosterInstance::empty("q", period(start, start, &[]));
    inst.qualifications = vec![qualification("icu"), qualification("board")];
    inst.physicians = vec![physician("a", 1.0, &[]), physician("b", 1.0, &["icu", "board"])];
    let rec = Recurrence::on(&Weekday::ALL, window(hm(8, 0), hm(16, 0)));
    let mut icu = duty("ICU", rec.clone(), false);
    icu.qualifications.required = qs(&["icu"]);
    let mut junior = duty("JR", rec.clone(), false);
    junior.qualifications.undesired = qs(&["board"]);
    inst.duty_templates = vec![duty("PLAIN", rec, false), icu, junior];
    inst
}

#[test]
fn qualification_sets() {
    let inst = quali_instance();
    let xs = expand_instances(&inst).unwrap();
    let (hard, soft) = derive_qualification_sets(&inst, &xs);
    let at = |t: &str| xs.iter().position(|x| x.template.as_str() == t).unwrap();
    // no rules: everybody, hard and soft
    assert!(hard[0][at("PLAIN")] && hard[1][at("PLAIN")] && soft[0][at("PLAIN")] && soft[1][at("PLAIN")]);
    // missing required qualification
    assert!(!hard[0][at("ICU")] && hard[1][at("ICU")]);
    // over-qualified for a junior duty: allowed but not preferred
    assert!(hard[1][at("JR")] && !soft[1][at("JR")]);
    assert!(soft[0][at("JR")]);
}

fn boundary_instance() -> RosterInstance {
    let start = date(2025, 3, 3);
    let mut inst = RosterInstance::empty("b", period(start, date(2025, 3, 6), &[]));
    inst.physicians = vec![physician("a", 1.0, &[]), physician("b", 1.0, &[])];
    inst.duty_templates =
        vec![duty("N", Recurrence::on(&Weekday::ALL, window(hm(20, 0), next(8, 0))), false)];
    inst.shift_templates =
        vec![shift("W", Recurrence::on(&Weekday::ALL, window(hm(7, 15), hm(16, 0))), (0, 0, 2))];
    inst.rest_rules = vec![rule("N", "W", 11.0, &[])];
    inst
}

#[test]
fn empty_carryover_is_vacuous() {
    let inst = boundary_instance();
    let der = derive(&inst, ExecMode::Sequential).unwrap();
    assert!(der.carryover.hard.iter().all(BTreeSet::is_empty));
    assert!(der.carryover.soft.iter().all(|m| m.is_empty()));
    assert_eq!(der.carryover.past_weekends, vec![0, 0]);
}

#[test]
fn night_before_period_blocks_first_ward_day() {
    // Night Mar 2 20:00 → Mar 3 08:00; ward Mar 3 starts 07:15, gap −45 min < 11 h.
    // Ward Mar 4 starts 07:15, gap 23 h 15 min ≥ 11 h.
    let mut inst = boundary_instance();
    inst.carryover.assignments.push(PastAssignment {
        physician: PhysicianId::new("a"),
        template: TemplateId::new("N"),
        date: date(2025, 3, 2),
        times: None,
    });
    let der = derive(&inst, ExecMode::Sequential).unwrap();
    let hit: Vec<&str> = der.carryover.hard[0].iter().map(|&i| der.instances[i].id.as_str()).collect();
    assert_eq!(hit, vec!["W@2025-03-03"]);
    assert!(der.carryover.hard[1].is_empty());
}

#[test]
fn past_block_free_days_cover_first_days() {
    let mut inst = boundary_instance();
    inst.carryover.blocks.push(PastBlock {
        id: BlockId::new("old"),
        kind: Kind::Duty,
        physicians: vec![PhysicianId::new("b")],
        last_day: date(2025, 3, 2),
        free_days_after: 2,
    });
    let der = derive(&inst, ExecMode::Sequential).unwrap();
    let mut hit: Vec<&str> = der.carryover.hard[1].iter().map(|&i| der.instances[i].id.as_str()).collect();
    hit.sort();
    assert_eq!(hit, vec!["N@2025-03-03", "N@2025-03-04", "W@2025-03-03", "W@2025-03-04"]);
    assert!(der.carryover.hard[0].is_empty());
}

#[test]
fn eleven_undesired_breach_the_monthly_cap_of_ten() {
    let mut inst = scenarios::internal_medicine();
    let who = PhysicianId::new("im04");
    inst.preferences.retain(|r| r.physician != who);
    for d in 1..=11 {
        inst.preferences.push(scenarios::wish("im04", "N2", date(2025, 5, d), PreferenceLevel::Undesired));
    }
    let errors: Vec<Finding> = validate_instance(&inst).into_iter().filter(Finding::is_error).collect();
    assert_eq!(errors.len(), 1, "{errors:?}");
    assert!(errors[0].message.contains("im04") && errors[0].message.contains("cap is 10"), "{}", errors[0].message);
}

#[test]
fn ten_undesired_are_within_the_cap() {
    let mut inst = scenarios::internal_medicine();
    let who = PhysicianId::new("im04");
    inst.preferences.retain(|r| r.physician != who);
    for d in 1..=10 {
        inst.preferences.push(scenarios::wish("im04", "N2", date(2025, 5, d), PreferenceLevel::Undesired));
    }
    assert!(validate_instance(&inst).iter().all(|f| !f.is_error()));
}

#[test]
fn fair_targets_sum_to_pool_size_in_scenarios() {
    for name in scenarios::SCENARIOS {
        let inst = scenarios::by_name(name).unwrap();
        let der = derive(&inst, ExecMode::Sequential).unwrap();
        for pl in &der.pools {
            if let Some(t) = &pl.targets {
                let sum: f64 = t.iter().sum();
                assert!((sum - pl.duties.len() as f64).abs() <= 1e-9, "{name}/{}: {sum}", pl.id);
            }
        }
    }
}

#[test]
fn derive_modes_agree() {
    let inst = scenarios::cardiology();
    let a = derive(&inst, ExecMode::Sequential).unwrap();
    let b = derive(&inst, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
}
