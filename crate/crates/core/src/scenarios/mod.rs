//! Bundled synthetic departments and a generator of tiny random instances.
//!
//! The departments reproduce the structure of three real rostering settings
//! (staff counts, duty types, rules) with generated names, absences and
//! preferences. Everything is seeded, so each call returns the same instance.

mod cardiology;
mod internal_medicine;
mod orthopedics;
pub mod random;

use std::collections::BTreeSet;

use chrono::NaiveDate;

use crate::model::*;

pub use cardiology::{cardiology, cardiology_full, cardiology_scaled, CardiologyScale};
pub use internal_medicine::internal_medicine;
pub use orthopedics::orthopedics;
pub use random::{random_tiny, MAX_INSTANCES, MAX_PHYSICIANS};

/// Names accepted by [`by_name`].
pub const SCENARIOS: [&str; 4] = ["internal-medicine", "cardiology", "orthopedics", "tiny-demo"];

pub fn by_name(name: &str) -> Option<RosterInstance> {
    match name {
        "internal-medicine" => Some(internal_medicine()),
        "cardiology" => Some(cardiology()),
        "cardiology-full" => Some(cardiology_full()),
        "orthopedics" => Some(orthopedics()),
        "tiny-demo" => Some(tiny_demo()),
        _ => None,
    }
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

pub fn hm(h: u32, m: u32) -> ClockTime {
    ClockTime::hm(h, m)
}

pub fn next(h: u32, m: u32) -> ClockTime {
    ClockTime::next_day(h, m)
}

pub fn qs(ids: &[&str]) -> BTreeSet<QualificationId> {
    ids.iter().map(|&q| QualificationId::new(q)).collect()
}

pub fn period(start: NaiveDate, end: NaiveDate, holidays: &[NaiveDate]) -> PlanningPeriod {
    PlanningPeriod {
        start_date: start,
        end_date: end,
        public_holidays: holidays.iter().copied().collect(),
        weekend_threshold: hm(21, 0),
    }
}

pub fn physician(id: &str, rate: f64, quals: &[&str]) -> Physician {
    Physician {
        id: PhysicianId::new(id),
        name: id.to_uppercase(),
        employment_rate: rate,
        qualifications: qs(quals),
        absences: BTreeSet::new(),
        planned_manually: false,
        weekend_preference: WeekendPreference::None,
    }
}

pub fn duty(id: &str, recurrence: Recurrence, mandatory: bool) -> DutyTemplate {
    DutyTemplate {
        id: TemplateId::new(id),
        label: id.to_owned(),
        recurrence,
        mandatory,
        forbidden_before_absence: false,
        forbidden_after_absence: false,
        qualifications: QualificationRules::default(),
        desired_consecutive: false,
        consecutive_weight: None,
    }
}

pub fn shift(id: &str, recurrence: Recurrence, staff: (u32, u32, u32)) -> ShiftTemplate {
    ShiftTemplate {
        id: TemplateId::new(id),
        label: id.to_owned(),
        recurrence,
        ward_members: None,
        min_staff: staff.0,
        desired_min_staff: staff.1,
        max_staff: staff.2,
        desired_weight: None,
        max_weight: None,
        qualifications: QualificationRules::default(),
    }
}

pub fn rule(from: &str, to: &str, mandatory: f64, desired: &[f64]) -> RestRule {
    RestRule {
        from: TemplateId::new(from),
        to: TemplateId::new(to),
        mandatory_hours: mandatory,
        desired: desired.iter().map(|&h| DesiredRest { hours: h, weight: None }).collect(),
    }
}

pub fn qualification(id: &str) -> Qualification {
    Qualification { id: QualificationId::new(id), label: id.to_owned() }
}

pub fn selection(templates: &[&str]) -> DutySelection {
    DutySelection { templates: templates.iter().map(|&t| TemplateId::new(t)).collect(), ..Default::default() }
}

pub fn ids(items: impl IntoIterator<Item = impl AsRef<str>>) -> BTreeSet<PhysicianId> {
    items.into_iter().map(|s| PhysicianId::new(s.as_ref())).collect()
}

/// Dates of the period, first to last.
pub fn dates(p: &PlanningPeriod) -> Vec<NaiveDate> {
    p.start_date.iter_days().take_while(|d| *d <= p.end_date).collect()
}

pub fn instance(template: &str, d: NaiveDate) -> InstanceId {
    InstanceId::of(&TemplateId::new(template), d)
}

pub fn wish(p: &str, template: &str, d: NaiveDate, level: PreferenceLevel) -> PreferenceRecord {
    PreferenceRecord {
        physician: PhysicianId::new(p),
        target: PreferenceTarget::Instance { instance: instance(template, d) },
        level,
    }
}

/// Two physicians, two mandatory night duties a rest rule keeps apart, and
/// one wish. The optimum gives each physician one night and grants the wish.
pub fn tiny_demo() -> RosterInstance {
    let start = date(2025, 3, 3);
    let mut inst = RosterInstance::empty("tiny-demo", period(start, start.succ_opt().unwrap(), &[]));
    inst.physicians = vec![physician("ana", 1.0, &[]), physician("ben", 1.0, &[])];
    inst.duty_templates = vec![duty("N", Recurrence::on(&Weekday::ALL, window(hm(20, 0), next(8, 0))), true)];
    inst.rest_rules = vec![rule("N", "N", 24.0, &[])];
    inst.preferences = vec![wish("ana", "N", start, PreferenceLevel::Desired)];
    inst
}
