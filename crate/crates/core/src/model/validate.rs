//! Structural checks on a [`RosterInstance`].

use std::collections::BTreeSet;

use chrono::Duration;

use super::caps::cap_breaches;
use super::*;
use crate::derive::expand::expand_instances;

/// All invariant breaches (errors) and suspicious data (warnings) of `inst`.
pub fn validate_instance(inst: &RosterInstance) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut err = |code: &str, msg: String| out.push(Finding::error(code, msg));
    let period = &inst.period;

    if period.start_date > period.end_date {
        err("period", format!("period starts {} after it ends {}", period.start_date, period.end_date));
    }
    let lo = period.start_date - Duration::days(1);
    let hi = period.end_date + Duration::days(1);
    for h in &period.public_holidays {
        if *h < lo || *h > hi {
            err("period", format!("public holiday {h} lies outside the period and its adjacent days"));
        }
    }
    if period.weekend_threshold.day_offset() > 1 {
        err("period", format!("weekend threshold {} is not a time of day", period.weekend_threshold));
    }

    let quals: BTreeSet<&QualificationId> = inst.qualifications.iter().map(|q| &q.id).collect();
    if quals.len() != inst.qualifications.len() {
        err("duplicate id", "qualification ids are not unique".into());
    }
    let mut seen = BTreeSet::new();
    for p in &inst.physicians {
        if !seen.insert(&p.id) {
            err("duplicate id", format!("physician id {} is used twice", p.id));
        }
        if !(p.employment_rate > 0.0 && p.employment_rate <= 1.0) {
            err("employment rate", format!("physician {} has employment rate {} outside (0, 1]", p.id, p.employment_rate));
        }
        for q in &p.qualifications {
            if !quals.contains(q) {
                err("unknown id", format!("physician {} holds unknown qualification {q}", p.id));
            }
        }
    }
    let physicians: BTreeSet<&PhysicianId> = inst.physicians.iter().map(|p| &p.id).collect();

    let mut templates = BTreeSet::new();
    let mut check_template = |id: &TemplateId, rec: &Recurrence, rules: &QualificationRules, out: &mut Vec<Finding>| {
        if !templates.insert(id.clone()) {
            out.push(Finding::error("duplicate id", format!("template id {id} is used twice")));
        }
        if !rec.times.is_valid() {
            out.push(Finding::error(
                "working time",
                format!("template {id}: working time {}-{} must end after it starts", rec.times.start, rec.times.end),
            ));
        }
        if let Some(h) = &rec.holiday_times {
            if !h.times.is_valid() {
                out.push(Finding::error(
                    "working time",
                    format!("template {id}: holiday working time {}-{} must end after it starts", h.times.start, h.times.end),
                ));
            }
        }
        let only = rec.holidays == HolidayRule::Only || rec.pre_holidays == HolidayRule::Only;
        if rec.weekdays.is_empty() && !only {
            out.push(Finding::warning("never occurs", format!("template {id} has no weekdays")));
        }
        if !rules.required.is_disjoint(&rules.excluded) {
            out.push(Finding::error(
                "qualification conflict",
                format!("template {id} both requires and excludes a qualification"),
            ));
        }
        if !rules.desired.is_disjoint(&rules.undesired) {
            out.push(Finding::error(
                "qualification conflict",
                format!("template {id} both desires and rejects a qualification"),
            ));
        }
        for q in rules.required.iter().chain(&rules.excluded).chain(&rules.desired).chain(&rules.undesired) {
            if !quals.contains(q) {
                out.push(Finding::error("unknown id", format!("template {id} references unknown qualification {q}")));
            }
        }
    };
    let mut tmp = Vec::new();
    for t in &inst.duty_templates {
        check_template(&t.id, &t.recurrence, &t.qualifications, &mut tmp);
        if let Some(w) = t.consecutive_weight {
            if !(w >= 0.0 && w.is_finite()) {
                tmp.push(Finding::error("weight", format!("template {} has a negative consecutive weight", t.id)));
            }
        }
    }
    for t in &inst.shift_templates {
        check_template(&t.id, &t.recurrence, &t.qualifications, &mut tmp);
        if !(t.min_staff <= t.desired_min_staff && t.desired_min_staff <= t.max_staff) {
            tmp.push(Finding::error(
                "staffing",
                format!("shift {}: need min {} <= desired {} <= max {}", t.id, t.min_staff, t.desired_min_staff, t.max_staff),
            ));
        }
        if let Some(ward) = &t.ward_members {
            for p in ward {
                if !physicians.contains(p) {
                    tmp.push(Finding::error("unknown id", format!("shift {} lists unknown ward member {p}", t.id)));
                }
            }
        }
        if t.desired_weight.is_some_and(|w| !(w >= 0.0 && w.is_finite())) {
            tmp.push(Finding::error("weight", format!("shift {} has an invalid desired weight", t.id)));
        }
    }
    out.append(&mut tmp);
    let mut err = |code: &str, msg: String| out.push(Finding::error(code, msg));

    let instances = match expand_instances(inst) {
        Ok(xs) => xs,
        Err(e) => {
            err("working time", e.to_string());
            Vec::new()
        }
    };
    let find = |id: &InstanceId| instances.iter().find(|x| &x.id == id);

    let mut duty_owner = std::collections::BTreeMap::new();
    for a in &inst.pre_assignments {
        let Some(x) = find(&a.instance) else {
            err("unknown id", format!("pre-assignment of {} to unknown instance {}", a.physician, a.instance));
            continue;
        };
        let Some(p) = inst.physicians.iter().find(|p| p.id == a.physician) else {
            err("unknown id", format!("pre-assignment of unknown physician {}", a.physician));
            continue;
        };
        let rules = inst.qualification_rules(&x.template).expect("expanded template");
        if !rules.hard_ok(&p.qualifications) {
            err("unqualified pre-assignment", format!("{} is pre-assigned to {} without the required qualifications", p.id, x.id));
        }
        if x.kind == Kind::Duty {
            if let Some(other) = duty_owner.insert(&x.id, &p.id) {
                err("double pre-assignment", format!("duty {} is pre-assigned to both {other} and {}", x.id, p.id));
            }
        }
    }

    let block_ids: BTreeSet<&BlockId> = inst.blocks.iter().map(|b| &b.id).collect();
    let past_ids: BTreeSet<&BlockId> = inst.carryover.blocks.iter().map(|b| &b.id).collect();
    if block_ids.len() != inst.blocks.len() {
        err("duplicate id", "block ids are not unique".into());
    }
    for b in &inst.blocks {
        if b.members.is_empty() {
            err("block", format!("block {} has no members", b.id));
        }
        for m in &b.members {
            match find(m) {
                None => err("unknown id", format!("block {} lists unknown instance {m}", b.id)),
                Some(x) if x.kind != b.kind => err("block", format!("block {} mixes duties and shifts at {m}", b.id)),
                _ => {}
            }
        }
        if let Some(pred) = &b.predecessor {
            if b.kind != Kind::Shift {
                err("block", format!("duty block {} cannot have a predecessor", b.id));
            }
            if !block_ids.contains(pred) && !past_ids.contains(pred) {
                err("unknown id", format!("block {} references unknown predecessor {pred}", b.id));
            }
        }
        if b.max_consecutive_run == Some(0) {
            err("block", format!("block {} allows zero consecutive runs", b.id));
        }
    }

    for r in &inst.rest_rules {
        for t in [&r.from, &r.to] {
            if !templates.contains(t) {
                err("unknown id", format!("rest rule {} -> {} references unknown template {t}", r.from, r.to));
            }
        }
        for l in &r.desired {
            if l.hours <= r.mandatory_hours {
                err("rest rule", format!("rest rule {} -> {}: desired {} h must exceed mandatory {} h", r.from, r.to, l.hours, r.mandatory_hours));
            }
            if l.weight.is_some_and(|w| !(w >= 0.0 && w.is_finite())) {
                err("weight", format!("rest rule {} -> {} has a negative weight", r.from, r.to));
            }
        }
    }

    for pool in &inst.pools {
        for p in &pool.physicians {
            if !physicians.contains(p) {
                err("unknown id", format!("pool {} lists unknown physician {p}", pool.id));
            }
        }
        for t in &pool.duties.templates {
            if inst.duty_template(t).is_none() {
                err("unknown id", format!("pool {} references unknown duty template {t}", pool.id));
            }
        }
        for i in &pool.duties.instances {
            if !find(i).is_some_and(|x| x.kind == Kind::Duty) {
                err("unknown id", format!("pool {} lists unknown duty {i}", pool.id));
            }
        }
        if pool.exact.is_some() && (pool.min_duties.is_some() || pool.max_duties.is_some()) {
            err("pool bounds", format!("pool {} mixes an exact count with min/max counts", pool.id));
        }
        if let (Some(lo), Some(hi)) = (pool.min_duties, pool.max_duties) {
            if lo > hi {
                err("pool bounds", format!("pool {}: minimum {lo} exceeds maximum {hi}", pool.id));
            }
        }
        if let (Some(d), Some(hi)) = (pool.desired_max_duties, pool.max_duties) {
            if d.value > hi {
                err("pool bounds", format!("pool {}: desired maximum {} exceeds the hard maximum {hi}", pool.id, d.value));
            }
        }
        if let (Some(d), Some(lo)) = (pool.desired_min_duties, pool.min_duties) {
            if d.value < lo {
                err("pool bounds", format!("pool {}: desired minimum {} is below the hard minimum {lo}", pool.id, d.value));
            }
        }
        if let (Some(d), Some(hi)) = (pool.desired_max_per_day, pool.max_per_day) {
            if d.value > hi {
                err("pool bounds", format!("pool {}: desired daily maximum {} exceeds the hard maximum {hi}", pool.id, d.value));
            }
        }
        let weights = [
            pool.desired_max_duties.and_then(|b| b.weight),
            pool.desired_min_duties.and_then(|b| b.weight),
            pool.desired_max_per_day.and_then(|b| b.weight),
            pool.fair.and_then(|f| f.down_weight),
            pool.fair.and_then(|f| f.up_weight),
        ];
        if weights.iter().flatten().any(|w| !(*w >= 0.0 && w.is_finite())) {
            err("weight", format!("pool {} has a negative weight", pool.id));
        }
    }

    for ws in &inst.weekly_sets {
        for t in &ws.templates {
            if !templates.contains(t) {
                err("unknown id", format!("weekly set {} references unknown template {t}", ws.id));
            }
        }
    }
    for r in &inst.preferences {
        if !physicians.contains(&r.physician) {
            err("unknown id", format!("preference of unknown physician {}", r.physician));
        }
        match &r.target {
            PreferenceTarget::Instance { instance } => {
                if find(instance).is_none() {
                    err("unknown id", format!("preference of {} for unknown instance {instance}", r.physician));
                }
            }
            PreferenceTarget::Weekly { set, .. } => {
                if !inst.weekly_sets.iter().any(|w| &w.id == set) {
                    err("unknown id", format!("preference of {} for unknown weekly set {set}", r.physician));
                }
                if r.level == PreferenceLevel::Impossible {
                    err("weekly impossible", format!("physician {} marked weekly set {set} impossible", r.physician));
                }
            }
        }
    }
    for b in cap_breaches(inst) {
        err("preference cap", b.message());
    }

    let wp = &inst.weekend_policy;
    if wp.max_consecutive_weekends == Some(0) {
        err("weekend policy", "maximum consecutive weekends must be at least 1".into());
    }
    let weekend_weights = [
        wp.desired_max_weekends.and_then(|b| b.weight),
        wp.desired_min_free_weekends.and_then(|b| b.weight),
        wp.preference_weight,
    ];
    if weekend_weights.iter().flatten().any(|w| !(*w >= 0.0 && w.is_finite())) {
        err("weight", "weekend policy has a negative weight".into());
    }

    for a in &inst.carryover.assignments {
        if !physicians.contains(&a.physician) {
            err("unknown id", format!("carryover assignment of unknown physician {}", a.physician));
        }
        if !templates.contains(&a.template) {
            err("unknown id", format!("carryover assignment of unknown template {}", a.template));
        }
        if a.date >= period.start_date {
            err("carryover", format!("carryover assignment on {} is not before the period", a.date));
        }
    }
    for b in &inst.carryover.blocks {
        for p in &b.physicians {
            if !physicians.contains(p) {
                err("unknown id", format!("previous block {} lists unknown physician {p}", b.id));
            }
        }
    }
    for p in inst.carryover.past_weekends.keys() {
        if !physicians.contains(p) {
            err("unknown id", format!("past weekends of unknown physician {p}"));
        }
    }
    if !inst.weights.is_finite() {
        err("weight", "weights must be finite".into());
    }

    for pool in &inst.pools {
        if pool.physicians.len() == 1 {
            out.push(Finding::warning("single member pool", format!("pool {} has a single physician", pool.id)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn tiny_demo_is_clean() {
        let inst = scenarios::tiny_demo();
        assert!(validate_instance(&inst).iter().all(|f| !f.is_error()));
    }

    #[test]
    fn required_and_excluded_overlap() {
        let mut inst = scenarios::tiny_demo();
        let q = QualificationId::new("icu");
        inst.qualifications.push(Qualification { id: q.clone(), label: "ICU".into() });
        inst.duty_templates[0].qualifications.required.insert(q.clone());
        inst.duty_templates[0].qualifications.excluded.insert(q);
        let f = validate_instance(&inst);
        assert!(f.iter().any(|f| f.is_error() && f.code == "qualification conflict"));
    }

    #[test]
    fn validation_is_pure() {
        let inst = scenarios::internal_medicine();
        assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }
}
