//! Seeded tiny instances over random subsets of every constraint family,
//! small enough for the exhaustive oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::derive::{derive, expand_instances};
use crate::mip::build_model;
use crate::par::ExecMode;
use crate::solver::{free_decisions, ORACLE_MAX_FREE};

pub const MAX_PHYSICIANS: usize = 4;
pub const MAX_INSTANCES: usize = 12;

const LEVELS: [PreferenceLevel; 5] = [
    PreferenceLevel::StronglyDesired,
    PreferenceLevel::Desired,
    PreferenceLevel::Indifferent,
    PreferenceLevel::Undesired,
    PreferenceLevel::Impossible,
];

fn subset<T: Clone>(rng: &mut ChaCha8Rng, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|&_| rng.gen_bool(p)).cloned().collect()
}

fn soft(rng: &mut ChaCha8Rng, value: u32) -> SoftBound {
    SoftBound { value, weight: rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(1..=60))) }
}

fn draw(rng: &mut ChaCha8Rng) -> RosterInstance {
    let start = date(2025, 1, 1) + chrono::Duration::days(rng.gen_range(0..365));
    let end = start + chrono::Duration::days(rng.gen_range(1..=9));
    let mut holidays = Vec::new();
    if rng.gen_bool(0.3) {
        holidays.push(start + chrono::Duration::days(rng.gen_range(0..=(end - start).num_days() + 1)));
    }
    let mut inst = RosterInstance::empty("random", period(start, end, &holidays));
    inst.period.weekend_threshold = hm(rng.gen_range(12..=23), 0);
    inst.qualifications = vec![qualification("q")];

    let np = rng.gen_range(2..=MAX_PHYSICIANS);
    for k in 0..np {
        let quals: &[&str] = if rng.gen_bool(0.6) { &["q"] } else { &[] };
        let mut ph = physician(&format!("p{k}"), *[1.0, 0.8, 0.5].choose(rng).unwrap(), quals);
        if rng.gen_bool(0.3) {
            let d = start + chrono::Duration::days(rng.gen_range(-1..=(end - start).num_days() + 1));
            ph.absences.insert(d);
        }
        ph.weekend_preference = *[WeekendPreference::None, WeekendPreference::OneDuty, WeekendPreference::MultipleDuties]
            .choose(rng)
            .unwrap();
        ph.planned_manually = rng.gen_bool(0.08);
        inst.physicians.push(ph);
    }

    let windows = [window(hm(20, 0), next(8, 0)), window(hm(8, 0), hm(20, 0)), window(hm(14, 0), hm(22, 0))];
    for k in 0..rng.gen_range(1..=2) {
        let mut rec = Recurrence::on(&subset(rng, &Weekday::ALL, 0.5), *windows.choose(rng).unwrap());
        rec.holidays = *[HolidayRule::Ignore, HolidayRule::Also, HolidayRule::Never].choose(rng).unwrap();
        let mut t = duty(&format!("D{k}"), rec, rng.gen_bool(0.35));
        t.forbidden_before_absence = rng.gen_bool(0.3);
        t.forbidden_after_absence = rng.gen_bool(0.3);
        match rng.gen_range(0..5) {
            0 => t.qualifications.required = qs(&["q"]),
            1 => t.qualifications.desired = qs(&["q"]),
            2 => t.qualifications.undesired = qs(&["q"]),
            3 => t.qualifications.excluded = qs(&["q"]),
            _ => {}
        }
        t.desired_consecutive = rng.gen_bool(0.3);
        if rng.gen_bool(0.5) {
            t.consecutive_weight = Some(f64::from(rng.gen_range(1..=30)));
        }
        inst.duty_templates.push(t);
    }
    if rng.gen_bool(0.6) {
        let min = rng.gen_range(0..=1);
        let des = min + rng.gen_range(0..=1);
        let max = (des + rng.gen_range(0..=1)).max(1);
        let mut s = shift("S", Recurrence::on(&subset(rng, &Weekday::ALL, 0.6), window(hm(7, 0), hm(15, 0))), (min, des, max));
        if rng.gen_bool(0.6) {
            let members: Vec<String> = inst.physicians.iter().filter(|_| rng.gen_bool(0.7)).map(|p| p.id.to_string()).collect();
            s.ward_members = Some(ids(members));
        }
        if rng.gen_bool(0.3) {
            s.qualifications.desired = qs(&["q"]);
        }
        s.desired_weight = rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(10..=300)));
        s.max_weight = rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(-30..=30)));
        inst.shift_templates.push(s);
    }

    let templates: Vec<String> = inst
        .duty_templates
        .iter()
        .map(|t| t.id.to_string())
        .chain(inst.shift_templates.iter().map(|t| t.id.to_string()))
        .collect();
    for a in &templates {
        for b in &templates {
            if rng.gen_bool(0.5) {
                let mandatory = *[0.0, 11.0, 24.0].choose(rng).unwrap();
                let desired: &[f64] = match rng.gen_range(0..3) {
                    0 => &[],
                    1 => &[48.0],
                    _ => &[36.0, 60.0],
                };
                inst.rest_rules.push(rule(a, b, mandatory, desired));
            }
        }
    }

    let Ok(instances) = expand_instances(&inst) else { return inst };
    let duties: Vec<&crate::model::Instance> = instances.iter().filter(|x| x.kind == Kind::Duty).collect();
    let shifts: Vec<&crate::model::Instance> = instances.iter().filter(|x| x.kind == Kind::Shift).collect();

    if rng.gen_bool(0.3) && !instances.is_empty() {
        let x = instances.choose(rng).unwrap();
        let p = inst.physicians.choose(rng).unwrap().id.clone();
        inst.pre_assignments.push(PreAssignment { physician: p, instance: x.id.clone() });
    }
    for t in &inst.duty_templates {
        let of: Vec<_> = duties.iter().filter(|x| x.template == t.id).collect();
        if of.len() >= 2 && rng.gen_bool(0.3) {
            let k = rng.gen_range(0..of.len() - 1);
            inst.blocks.push(BlockDefinition {
                id: BlockId::new(format!("b-{}", t.id)),
                kind: Kind::Duty,
                members: vec![of[k].id.clone(), of[k + 1].id.clone()],
                allow_extra_duties: rng.gen_bool(0.5),
                allow_extra_shifts: rng.gen_bool(0.5),
                free_days_after: rng.gen_range(0..=2),
                predecessor: None,
                consecutive_weight: None,
                max_consecutive_run: None,
            });
        }
    }
    if shifts.len() >= 2 && rng.gen_bool(0.4) {
        let half = shifts.len() / 2;
        let past = rng.gen_bool(0.5);
        if past {
            let who = subset(rng, &inst.physicians.iter().map(|p| p.id.clone()).collect::<Vec<_>>(), 0.5);
            inst.carryover.blocks.push(PastBlock {
                id: BlockId::new("s-past"),
                kind: Kind::Shift,
                physicians: who,
                last_day: start.pred_opt().unwrap(),
                free_days_after: rng.gen_range(0..=1),
            });
        }
        let run = rng.gen_bool(0.5).then_some(1);
        for (k, part) in [&shifts[..half], &shifts[half..]].into_iter().enumerate() {
            let predecessor = match (k, past) {
                (0, true) => Some(BlockId::new("s-past")),
                (0, false) => None,
                _ => Some(BlockId::new("s-0")),
            };
            inst.blocks.push(BlockDefinition {
                id: BlockId::new(format!("s-{k}")),
                kind: Kind::Shift,
                members: part.iter().map(|x| x.id.clone()).collect(),
                allow_extra_duties: rng.gen_bool(0.5),
                allow_extra_shifts: true,
                free_days_after: rng.gen_range(0..=1),
                predecessor,
                consecutive_weight: rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(1..=40))),
                max_consecutive_run: if k == 1 { run } else { None },
            });
        }
    }

    if rng.gen_bool(0.5) && !duties.is_empty() {
        let members: Vec<String> = inst.physicians.iter().filter(|_| rng.gen_bool(0.7)).map(|p| p.id.to_string()).collect();
        let members = if members.is_empty() { vec![inst.physicians[0].id.to_string()] } else { members };
        let mut sel = selection(&[inst.duty_templates[0].id.as_str()]);
        if inst.duty_templates.len() > 1 && rng.gen_bool(0.5) {
            sel.templates.push(inst.duty_templates[1].id.clone());
        }
        let mut pool = Pool::new("pool", ids(members), sel);
        if rng.gen_bool(0.15) {
            pool.exact = Some(rng.gen_range(0..=2));
        } else {
            pool.max_duties = rng.gen_bool(0.3).then(|| rng.gen_range(1..=3));
            pool.min_duties = rng.gen_bool(0.2).then_some(1);
        }
        if rng.gen_bool(0.3) {
            pool.desired_max_duties = { let v = rng.gen_range(0..=2); Some(soft(rng, v)) };
        }
        if rng.gen_bool(0.3) {
            pool.desired_min_duties = { let v = rng.gen_range(1..=2); Some(soft(rng, v)) };
        }
        pool.max_per_day = rng.gen_bool(0.2).then(|| rng.gen_range(1..=2));
        if rng.gen_bool(0.2) {
            pool.desired_max_per_day = Some(soft(rng, 1));
        }
        if rng.gen_bool(0.4) {
            pool.fair = Some(Fairness {
                down_weight: rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(1..=80))),
                up_weight: rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(1..=80))),
            });
        }
        inst.pools.push(pool);
    }

    for ph in &inst.physicians {
        for x in &instances {
            if rng.gen_bool(0.2) {
                inst.preferences.push(PreferenceRecord {
                    physician: ph.id.clone(),
                    target: PreferenceTarget::Instance { instance: x.id.clone() },
                    level: *LEVELS.choose(rng).unwrap(),
                });
            }
        }
    }
    if rng.gen_bool(0.3) {
        inst.weekly_sets.push(WeeklySet {
            id: WeeklySetId::new("w"),
            label: "w".into(),
            templates: vec![TemplateId::new(templates.choose(rng).unwrap())],
        });
        let ph = inst.physicians.choose(rng).unwrap().id.clone();
        inst.preferences.push(PreferenceRecord {
            physician: ph,
            target: PreferenceTarget::Weekly { set: WeeklySetId::new("w"), week: 0 },
            level: *LEVELS[..4].choose(rng).unwrap(),
        });
    }

    if rng.gen_bool(0.6) {
        inst.weekend_policy = WeekendPolicy {
            max_weekends: rng.gen_bool(0.4).then(|| rng.gen_range(0..=1)),
            desired_max_weekends: rng.gen_bool(0.4).then(|| soft(rng, 0)),
            min_free_weekends: rng.gen_bool(0.3).then_some(0),
            desired_min_free_weekends: rng.gen_bool(0.3).then(|| soft(rng, 1)),
            max_consecutive_weekends: rng.gen_bool(0.5).then(|| rng.gen_range(0..=1)),
            preference_weight: rng.gen_bool(0.5).then(|| f64::from(rng.gen_range(1..=40))),
        };
    }
    if rng.gen_bool(0.4) {
        let ph = inst.physicians.choose(rng).unwrap().id.clone();
        let t = inst.duty_templates.choose(rng).unwrap().id.clone();
        inst.carryover.assignments.push(PastAssignment { physician: ph, template: t, date: start.pred_opt().unwrap(), times: None });
    }
    if rng.gen_bool(0.5) {
        let ph = inst.physicians.choose(rng).unwrap().id.clone();
        inst.carryover.past_weekends.insert(ph, rng.gen_range(1..=2));
    }
    inst
}

/// True when the instance builds and the oracle can search it.
fn usable(inst: &RosterInstance) -> bool {
    if validate_instance(inst).iter().any(|f| f.is_error()) {
        return false;
    }
    let Ok(der) = derive(inst, ExecMode::Sequential) else { return false };
    if der.instances.is_empty() || der.instances.len() > MAX_INSTANCES {
        return false;
    }
    let Ok(model) = build_model(inst, &der, &inst.weights) else { return false };
    free_decisions(&model).is_none_or(|n| n <= ORACLE_MAX_FREE)
}

/// A tiny instance with at most [`MAX_PHYSICIANS`] physicians and
/// [`MAX_INSTANCES`] duty and shift instances. Equal seeds give equal instances.
pub fn random_tiny(seed: u64) -> RosterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = draw(&mut rng);
        if usable(&inst) {
            return inst;
        }
    }
}
