use std::collections::BTreeSet;

use proptest::prelude::*;

use dutyroster_core::check::{recount_soft, validate_hard};
use dutyroster_core::derive::compute_target_numbers;
use dutyroster_core::document::{decode_instance, encode_instance};
use dutyroster_core::mip::{model_statistics, CanonicalModel, VarClass};
use dutyroster_core::model::*;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::prepare;
use dutyroster_core::scenarios::random_tiny;
use dutyroster_core::solver::*;

fn oracle() -> SolveRequest {
    SolveRequest { gap: 0.0, time_limit_seconds: 60.0, backend: Backend::Oracle }
}

/// Pins every x/y variable to the given roster.
fn pinned(model: &CanonicalModel, inst: &RosterInstance, held: &BTreeSet<(usize, usize)>, ids: &[InstanceId]) -> CanonicalModel {
    let mut m = model.clone();
    for (p, ph) in inst.physicians.iter().enumerate() {
        for (i, id) in ids.iter().enumerate() {
            for prefix in ["x", "y"] {
                if let Some(j) = m.var_index(&format!("{prefix}[{},{}]", ph.id, id)) {
                    let v = if held.contains(&(p, i)) { 1.0 } else { 0.0 };
                    m.variables[j].lower = v;
                    m.variables[j].upper = v;
                }
            }
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn instance_documents_round_trip(seed in any::<u64>()) {
        let inst = random_tiny(seed);
        prop_assert_eq!(decode_instance(&encode_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn validation_is_pure(seed in any::<u64>()) {
        let inst = random_tiny(seed);
        prop_assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }

    #[test]
    fn targets_are_conserved(
        n in 1usize..40,
        members in prop::collection::vec((0.05f64..=1.0, prop::collection::btree_set(1i64..40, 0..10)), 1..8),
    ) {
        let instances: Vec<Instance> = (0..n as i64)
            .map(|k| Instance {
                id: InstanceId::new(format!("d{k}")),
                kind: Kind::Duty,
                template: TemplateId::new("d"),
                date: chrono::NaiveDate::from_ymd_opt(2025, 1, 1).unwrap() + chrono::Duration::days(k),
                day: k + 1,
                start: k * 1440,
                end: k * 1440 + 60,
            })
            .collect();
        let duties: Vec<usize> = (0..n).collect();
        let refs: Vec<(f64, &BTreeSet<i64>)> = members.iter().map(|(r, a)| (*r, a)).collect();
        if let Ok(t) = compute_target_numbers(&PoolId::new("p"), &duties, &instances, &refs) {
            prop_assert!((t.iter().sum::<f64>() - n as f64).abs() <= 1e-9);
            prop_assert!(t.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn model_names_are_unique_and_parse(seed in any::<u64>()) {
        let inst = random_tiny(seed);
        let (_, model) = prepare(&inst, ExecMode::Sequential).unwrap();
        let names: BTreeSet<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
        prop_assert_eq!(names.len(), model.variables.len());
        prop_assert!(model.variables.iter().all(|v| v.class().is_some()));
        let rows: BTreeSet<&str> = model.constraints.iter().map(|c| c.name.as_str()).collect();
        prop_assert_eq!(rows.len(), model.constraints.len());
        for c in &model.constraints {
            prop_assert_eq!(dutyroster_core::mip::Constraint::family_of_name(&c.name), Some(c.family));
            prop_assert!(c.terms.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(c.terms.iter().all(|t| t.1 != 0.0));
        }
        let s = model_statistics(&model);
        prop_assert_eq!(s.per_family.values().sum::<usize>(), s.constraints);
    }

    #[test]
    fn mps_is_a_fixpoint(seed in any::<u64>()) {
        let (_, model) = prepare(&random_tiny(seed), ExecMode::Sequential).unwrap();
        let a = emit_mps(&model, "m").unwrap();
        let back = parse_mps(&a.text, &a.names).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(emit_mps(&back, "m").unwrap().text, a.text);
    }

    #[test]
    fn oracle_modes_agree(seed in any::<u64>()) {
        let (_, model) = prepare(&random_tiny(seed), ExecMode::Sequential).unwrap();
        let cfg = SolverConfig::default();
        let a = solve(&model, &oracle(), &cfg, ExecMode::Sequential).unwrap();
        let b = solve(&model, &oracle(), &cfg, ExecMode::Parallel).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.values, b.values);
    }

    /// A random roster has no hard findings exactly when the model with its
    /// assignments pinned is feasible; then both routes price it the same.
    #[test]
    fn validator_and_model_agree_on_random_rosters(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        // about one assignment in four
        let bits = a & b;
        let inst = random_tiny(seed);
        let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
        let ids: Vec<InstanceId> = der.instances.iter().map(|x| x.id.clone()).collect();
        let np = inst.physicians.len();
        let held: BTreeSet<(usize, usize)> = (0..np)
            .flat_map(|p| (0..ids.len()).map(move |i| (p, i)))
            .filter(|&(p, i)| bits >> ((p * ids.len() + i) % 64) & 1 == 1)
            .collect();
        let roster = RosterSolution::from_assignments(
            held.iter().map(|&(p, i)| Assignment { physician: inst.physicians[p].id.clone(), instance: ids[i].clone() }),
            &inst,
            &der,
            SolveMetadata::manual(),
        );
        let findings = validate_hard(&roster, &inst, &der).unwrap();
        let raw = solve(&pinned(&model, &inst, &held, &ids), &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
        prop_assert_eq!(findings.is_empty(), raw.status.has_solution(), "findings {:?}", findings);
        if let Some(obj) = raw.objective {
            let t = recount_soft(&roster, &inst, &der, &inst.weights).unwrap();
            prop_assert!((t.objective - obj).abs() <= 1e-6 * obj.abs().max(1.0), "{} vs {}", t.objective, obj);
        }
    }

    /// Same property on the oracle optimum, which exercises rosters that are
    /// feasible far more often than random bits.
    #[test]
    fn optimal_rosters_are_clean(seed in any::<u64>()) {
        let inst = random_tiny(seed);
        let (der, model) = prepare(&inst, ExecMode::Sequential).unwrap();
        let raw = solve(&model, &oracle(), &SolverConfig::default(), ExecMode::Sequential).unwrap();
        if raw.status.has_solution() {
            let roster = extract_roster(&raw, &model, &inst, &der).unwrap();
            prop_assert!(validate_hard(&roster, &inst, &der).unwrap().is_empty());
            let t = recount_soft(&roster, &inst, &der, &inst.weights).unwrap();
            let obj = raw.objective.unwrap();
            prop_assert!((t.objective - obj).abs() <= 1e-6 * obj.abs().max(1.0));
            let decisions = model.variables.iter().filter(|v| v.class().is_some_and(VarClass::is_decision)).count();
            prop_assert!(roster.assignments.len() <= decisions);
        }
    }
}
