//! Weekends and months of a planning period.

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::model::{absolute_minute, Instance, Kind, PlanningPeriod, Weekday};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weekend {
    pub saturday: NaiveDate,
    /// Index into [`Calendar::months`].
    pub month: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Month {
    pub year: i32,
    pub month: u32,
    /// Weekends whose Saturday falls into this month and the period.
    pub weekends: Vec<usize>,
    pub we_factor: f64,
}

impl Month {
    pub fn label(&self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calendar {
    pub weekends: Vec<Weekend>,
    pub months: Vec<Month>,
}

fn saturdays_in_month(year: i32, month: u32) -> u32 {
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    first
        .iter_days()
        .take_while(|d| d.month() == month)
        .filter(|d| Weekday::of(*d) == Weekday::Sat)
        .count() as u32
}

pub fn compute_calendar(period: &PlanningPeriod) -> Calendar {
    let mut cal = Calendar::default();
    let days = period.days().max(0) as usize;
    for date in period.start_date.iter_days().take(days) {
        let key = (date.year(), date.month());
        let mi = match cal.months.iter().position(|m| (m.year, m.month) == key) {
            Some(i) => i,
            None => {
                cal.months.push(Month { year: key.0, month: key.1, weekends: Vec::new(), we_factor: 0.0 });
                cal.months.len() - 1
            }
        };
        if Weekday::of(date) == Weekday::Sat {
            cal.months[mi].weekends.push(cal.weekends.len());
            cal.weekends.push(Weekend { saturday: date, month: mi });
        }
    }
    for m in &mut cal.months {
        let total = saturdays_in_month(m.year, m.month);
        m.we_factor = m.weekends.len() as f64 / f64::from(total);
    }
    cal
}

/// Duties of weekend `w`: Saturday and Sunday duties plus Friday duties that
/// end after the weekend threshold.
pub fn weekend_duties(period: &PlanningPeriod, weekend: &Weekend, instances: &[Instance]) -> Vec<usize> {
    let sat = weekend.saturday;
    let fri = sat - Duration::days(1);
    let sun = sat + Duration::days(1);
    let threshold = absolute_minute(period.start_date, fri, period.weekend_threshold);
    instances
        .iter()
        .enumerate()
        .filter(|(_, x)| x.kind == Kind::Duty)
        .filter(|(_, x)| x.date == sat || x.date == sun || (x.date == fri && x.end > threshold))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::model::ClockTime;

    fn period(a: (i32, u32, u32), b: (i32, u32, u32)) -> PlanningPeriod {
        PlanningPeriod {
            start_date: NaiveDate::from_ymd_opt(a.0, a.1, a.2).unwrap(),
            end_date: NaiveDate::from_ymd_opt(b.0, b.1, b.2).unwrap(),
            public_holidays: BTreeSet::new(),
            weekend_threshold: ClockTime::hm(21, 0),
        }
    }

    #[test]
    fn full_month_factor_is_one() {
        let cal = compute_calendar(&period((2025, 3, 1), (2025, 3, 31)));
        assert_eq!(cal.months.len(), 1);
        assert_eq!(cal.months[0].we_factor, 1.0);
        // Saturdays of March 2025: 1, 8, 15, 22, 29
        assert_eq!(cal.weekends.len(), 5);
    }

    #[test]
    fn half_month_factor() {
        // February 2025 has Saturdays 1, 8, 15, 22; the period covers two of them.
        let cal = compute_calendar(&period((2025, 2, 10), (2025, 2, 22)));
        assert_eq!(cal.months[0].weekends.len(), 2);
        assert_eq!(cal.months[0].we_factor, 0.5);
    }

    #[test]
    fn month_boundary_period() {
        // 2025-03-20 .. 2025-04-15, Saturdays by hand:
        // March: 22, 29 of {1,8,15,22,29}; April: 5, 12 of {5,12,19,26}
        let cal = compute_calendar(&period((2025, 3, 20), (2025, 4, 15)));
        assert_eq!(cal.months.len(), 2);
        let sats: Vec<u32> = cal.weekends.iter().map(|w| w.saturday.day()).collect();
        assert_eq!(sats, vec![22, 29, 5, 12]);
        assert_eq!(cal.months[0].weekends, vec![0, 1]);
        assert_eq!(cal.months[1].weekends, vec![2, 3]);
        assert!((cal.months[0].we_factor - 0.4).abs() < 1e-12);
        assert!((cal.months[1].we_factor - 0.5).abs() < 1e-12);
    }

    #[test]
    fn month_without_saturday_in_period() {
        // 2025-03-30 (Sun) .. 2025-04-04 (Fri): no Saturday at all.
        let cal = compute_calendar(&period((2025, 3, 30), (2025, 4, 4)));
        assert_eq!(cal.months.len(), 2);
        assert!(cal.weekends.is_empty());
        assert!(cal.months.iter().all(|m| m.we_factor == 0.0));
    }
}
