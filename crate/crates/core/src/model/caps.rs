//! Per-physician limits on how often a preference level may be chosen.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{
    CapDays, CapLimit, CapPer, CapTargets, PhysicianId, PreferenceCap, PreferenceLevel, PreferenceRecord,
    PreferenceTarget, RosterInstance, Weekday,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapBreach {
    pub physician: PhysicianId,
    pub level: PreferenceLevel,
    pub scope: String,
    pub count: usize,
    pub limit: u32,
}

impl CapBreach {
    pub fn message(&self) -> String {
        format!(
            "physician {} selected '{}' {} times in {}; the cap is {}",
            self.physician,
            self.level.label(),
            self.count,
            self.scope,
            self.limit
        )
    }
}

/// Calendar date a preference refers to; weekly targets use the week's first
/// day inside the period.
pub fn target_date(inst: &RosterInstance, target: &PreferenceTarget) -> Option<NaiveDate> {
    match target {
        PreferenceTarget::Instance { instance } => {
            let (_, date) = instance.as_str().rsplit_once('@')?;
            NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()
        }
        PreferenceTarget::Weekly { week, .. } => {
            let start = inst.period.start_date;
            let monday = start - Duration::days(i64::from(start.weekday().num_days_from_monday()));
            Some((monday + Duration::days(7 * i64::from(*week))).max(start))
        }
    }
}

fn day_in_scope(inst: &RosterInstance, days: CapDays, date: NaiveDate) -> bool {
    match days {
        CapDays::All => true,
        CapDays::WeekendsAndHolidays => Weekday::of(date).is_weekend() || inst.period.is_holiday(date),
    }
}

fn applies(inst: &RosterInstance, cap: &PreferenceCap, r: &PreferenceRecord) -> Option<NaiveDate> {
    if r.level != cap.level {
        return None;
    }
    let weekly = matches!(r.target, PreferenceTarget::Weekly { .. });
    match (cap.targets, weekly) {
        (CapTargets::Instance, true) | (CapTargets::Weekly, false) => return None,
        _ => {}
    }
    let date = target_date(inst, &r.target)?;
    if cap.days == CapDays::WeekendsAndHolidays && (weekly || !day_in_scope(inst, cap.days, date)) {
        return None;
    }
    Some(date)
}

fn limit_for(inst: &RosterInstance, cap: &PreferenceCap, scope: Option<(i32, u32)>) -> u32 {
    match cap.limit {
        CapLimit::Count(n) => n,
        CapLimit::FractionOfDays(f) => {
            let days = inst
                .period
                .start_date
                .iter_days()
                .take(inst.period.days().max(0) as usize)
                .filter(|d| scope.is_none_or(|(y, m)| d.year() == y && d.month() == m))
                .filter(|d| day_in_scope(inst, cap.days, *d))
                .count();
            (f * days as f64).floor().max(0.0) as u32
        }
    }
}

/// Every cap exceeded by the preferences stored in `inst`.
pub fn cap_breaches(inst: &RosterInstance) -> Vec<CapBreach> {
    let mut out = Vec::new();
    for cap in &inst.preference_caps {
        let mut counts: BTreeMap<(&PhysicianId, Option<(i32, u32)>), usize> = BTreeMap::new();
        for r in &inst.preferences {
            if let Some(date) = applies(inst, cap, r) {
                let scope = match cap.per {
                    CapPer::Month => Some((date.year(), date.month())),
                    CapPer::Period => None,
                };
                *counts.entry((&r.physician, scope)).or_default() += 1;
            }
        }
        for ((physician, scope), count) in counts {
            let limit = limit_for(inst, cap, scope);
            if count > limit as usize {
                out.push(CapBreach {
                    physician: physician.clone(),
                    level: cap.level,
                    scope: match scope {
                        Some((y, m)) => format!("{y:04}-{m:02}"),
                        None => "the planning period".to_owned(),
                    },
                    count,
                    limit,
                });
            }
        }
    }
    out
}

/// Checks whether adding `record` would exceed a cap that currently holds.
pub fn admit(inst: &RosterInstance, record: &PreferenceRecord) -> Result<(), CapBreach> {
    let before = cap_breaches(inst);
    let mut next = inst.clone();
    next.preferences.retain(|r| !(r.physician == record.physician && r.target == record.target));
    next.preferences.push(record.clone());
    match cap_breaches(&next).into_iter().find(|b| b.physician == record.physician && !before.contains(b)) {
        Some(b) => Err(b),
        None => Ok(()),
    }
}
