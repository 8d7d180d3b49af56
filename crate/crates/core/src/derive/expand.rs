//! Template expansion into concrete duty and shift instances.

use chrono::{Duration, NaiveDate};

use super::DeriveError;
use crate::model::{
    absolute_minute, HolidayRule, Instance, InstanceId, Kind, PlanningPeriod, Recurrence,
    RosterInstance, TemplateId, TimeWindow, Weekday,
};

/// Whether a template with recurrence `rec` occurs on `date`.
pub fn occurs(rec: &Recurrence, period: &PlanningPeriod, date: NaiveDate) -> bool {
    let holiday = period.is_holiday(date);
    let pre_holiday = period.is_holiday(date + Duration::days(1));
    if rec.holidays == HolidayRule::Only || rec.pre_holidays == HolidayRule::Only {
        return (rec.holidays == HolidayRule::Only && holiday)
            || (rec.pre_holidays == HolidayRule::Only && pre_holiday);
    }
    if holiday {
        match rec.holidays {
            HolidayRule::Also => return true,
            HolidayRule::Never => return false,
            _ => {}
        }
    }
    if pre_holiday {
        match rec.pre_holidays {
            HolidayRule::Also => return true,
            HolidayRule::Never => return false,
            _ => {}
        }
    }
    rec.weekdays.contains(&Weekday::of(date))
}

/// Working times on `date`, honoring the holiday override.
pub fn resolved_window(rec: &Recurrence, period: &PlanningPeriod, date: NaiveDate) -> TimeWindow {
    if let Some(alt) = &rec.holiday_times {
        let hit = (alt.on_holiday && period.is_holiday(date))
            || (alt.before_holiday && period.is_holiday(date + Duration::days(1)))
            || (alt.after_holiday && period.is_holiday(date - Duration::days(1)));
        if hit {
            return alt.times;
        }
    }
    rec.times
}

fn make(
    period: &PlanningPeriod,
    kind: Kind,
    template: &TemplateId,
    rec: &Recurrence,
    date: NaiveDate,
) -> Result<Instance, DeriveError> {
    let w = resolved_window(rec, period, date);
    if !w.is_valid() {
        return Err(DeriveError::Config(format!(
            "template {template} on {date}: working time {}-{} must end after it starts",
            w.start, w.end
        )));
    }
    Ok(Instance {
        id: InstanceId::of(template, date),
        kind,
        template: template.clone(),
        date,
        day: period.day_index(date),
        start: absolute_minute(period.start_date, date, w.start),
        end: absolute_minute(period.start_date, date, w.end),
    })
}

/// All duty instances (day-major, template order) followed by all shift instances.
pub fn expand_instances(inst: &RosterInstance) -> Result<Vec<Instance>, DeriveError> {
    let period = &inst.period;
    let dates: Vec<NaiveDate> = period.start_date.iter_days().take(period.days().max(0) as usize).collect();
    let mut out = Vec::new();
    for &date in &dates {
        for t in &inst.duty_templates {
            if occurs(&t.recurrence, period, date) {
                out.push(make(period, Kind::Duty, &t.id, &t.recurrence, date)?);
            }
        }
    }
    for &date in &dates {
        for t in &inst.shift_templates {
            if occurs(&t.recurrence, period, date) {
                out.push(make(period, Kind::Shift, &t.id, &t.recurrence, date)?);
            }
        }
    }
    Ok(out)
}
