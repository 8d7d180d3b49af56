use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

const NIGHTS: [&str; 5] = ["N1", "N2", "N3", "N4", "N5"];
/// Experience each night requires; `N5` is the stand-by night.
const NIGHT_LEVEL: [&str; 5] = ["fellow", "fellow", "resident-3", "resident-1", "resident-1"];

/// Orthopedics and trauma surgery: about 50 physicians, five nights and a late
/// duty every day, twelve surgical wards on weekdays, one month.
pub fn orthopedics() -> RosterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x07_2025_06);
    let holidays = [date(2025, 6, 9), date(2025, 6, 19)];
    let mut inst = RosterInstance::empty("orthopedics", period(date(2025, 6, 1), date(2025, 6, 30), &holidays));
    // any duty on a Friday makes it a worked weekend
    inst.period.weekend_threshold = hm(0, 0);
    inst.qualifications = ["fellow", "resident-3", "resident-1", "no-nights"].map(qualification).to_vec();
    let wards: Vec<String> = (1..=12).map(|k| format!("or-{k:02}")).collect();
    inst.qualifications.extend(wards.iter().map(|w| qualification(w)));

    for k in 0..50 {
        let level: &[&str] = match k % 5 {
            0 => &["fellow", "resident-3", "resident-1"],
            1 | 2 => &["resident-3", "resident-1"],
            _ => &["resident-1"],
        };
        let mut quals: Vec<&str> = level.to_vec();
        quals.push(&wards[k % wards.len()]);
        if k == 17 || k == 42 {
            quals.push("no-nights");
        }
        inst.physicians.push(physician(&format!("or{:02}", k + 1), if k % 8 == 7 { 0.5 } else { 1.0 }, &quals));
    }

    let weekday = |id: &str, level: &str, start: ClockTime, end: ClockTime, alt: TimeWindow| {
        let mut rec = Recurrence::on(&Weekday::WORKDAYS, window(start, end));
        rec.holidays = HolidayRule::Never;
        let mut d = duty(id, rec, true);
        d.qualifications.required = qs(&[level]);
        let mut weekend = Recurrence::on(&Weekday::WEEKEND, alt);
        weekend.holidays = HolidayRule::Also;
        let mut w = duty(&format!("{id}W"), weekend, true);
        w.qualifications.required = qs(&[level]);
        if id.starts_with('N') {
            d.qualifications.excluded = qs(&["no-nights"]);
            w.qualifications.excluded = qs(&["no-nights"]);
        }
        (d, w)
    };
    let mut templates = Vec::new();
    for (id, level) in NIGHTS.iter().zip(NIGHT_LEVEL) {
        templates.push(weekday(id, level, hm(16, 0), next(8, 0), window(hm(8, 0), next(8, 0))));
    }
    let (mut late, mut late_w) = weekday("L", "resident-3", hm(14, 0), hm(22, 0), window(hm(13, 0), hm(21, 0)));
    late.desired_consecutive = true;
    late_w.desired_consecutive = true;
    templates.push((late, late_w));
    for (d, w) in templates {
        inst.duty_templates.push(d);
        inst.duty_templates.push(w);
    }
    let mut ward_rec = Recurrence::on(&Weekday::WORKDAYS, window(hm(7, 15), hm(16, 0)));
    ward_rec.holidays = HolidayRule::Never;
    for w in &wards {
        let size = inst.physicians.iter().filter(|p| p.qualifications.contains(&QualificationId::new(w))).count() as u32;
        let mut s = shift(w, ward_rec.clone(), (0, size.min(3), size));
        s.qualifications.required = qs(&[w]);
        inst.shift_templates.push(s);
    }

    let duty_ids: Vec<String> = inst.duty_templates.iter().map(|t| t.id.to_string()).collect();
    let is_night = |t: &str| t.starts_with('N');
    for a in &duty_ids {
        for b in &duty_ids {
            let hours = if is_night(a) && is_night(b) { 24.0 } else { 11.0 };
            inst.rest_rules.push(rule(a, b, hours, &[]));
        }
    }
    for w in &wards {
        for d in &duty_ids {
            // a ward shift may precede a night on the same day but not a late duty
            if d.starts_with('L') {
                inst.rest_rules.push(rule(w, d, 0.0, &[]));
            }
            // the day after a night is off the ward, except after stand-by
            if is_night(d) && !d.starts_with("N5") {
                inst.rest_rules.push(rule(d, w, 0.0, &[]));
            }
        }
    }

    let dates = dates(&inst.period);
    for ph in &mut inst.physicians {
        if rng.gen_bool(0.5) {
            let len = rng.gen_range(3..=10);
            let first = rng.gen_range(0..dates.len() - len);
            ph.absences.extend(dates[first..first + len].iter().copied());
        }
    }

    let everyone = ids(inst.physicians.iter().map(|p| p.id.to_string()));
    let night_ids: Vec<String> = duty_ids.iter().filter(|t| is_night(t)).cloned().collect();
    let night_refs: Vec<&str> = night_ids.iter().map(String::as_str).collect();
    let mut nights = Pool::new("nights", everyone.clone(), selection(&night_refs));
    nights.desired_max_duties = Some(SoftBound { value: 4, weight: Some(500.0) });
    inst.pools.push(nights);
    let mut all_duties = Pool::new("all-duties", everyone, selection(&duty_ids.iter().map(String::as_str).collect::<Vec<_>>()));
    all_duties.fair = Some(Fairness::default());
    inst.pools.push(all_duties);
    inst.weekend_policy = WeekendPolicy { desired_max_weekends: Some(SoftBound { value: 2, weight: Some(500.0) }), ..Default::default() };

    inst.preference_caps = vec![
        PreferenceCap {
            level: PreferenceLevel::Undesired,
            per: CapPer::Period,
            days: CapDays::All,
            targets: CapTargets::Any,
            limit: CapLimit::FractionOfDays(0.5),
        },
        PreferenceCap {
            level: PreferenceLevel::Undesired,
            per: CapPer::Period,
            days: CapDays::WeekendsAndHolidays,
            targets: CapTargets::Any,
            limit: CapLimit::FractionOfDays(0.5),
        },
    ];
    for ph in &inst.physicians {
        let free: Vec<NaiveDate> = dates.iter().copied().filter(|d| !ph.absences.contains(d)).collect();
        for d in free.choose_multiple(&mut rng, 6) {
            let weekend = Weekday::of(*d).is_weekend() || inst.period.is_holiday(*d);
            let base = if rng.gen_bool(0.3) { "L" } else { "N4" };
            let template = if weekend { format!("{base}W") } else { base.to_owned() };
            let level = if rng.gen_bool(0.5) { PreferenceLevel::Desired } else { PreferenceLevel::Undesired };
            inst.preferences.push(wish(ph.id.as_str(), &template, *d, level));
        }
    }

    let last = date(2025, 5, 31);
    for (k, t) in ["N1W", "N2W", "N3W", "N4W", "N5W", "LW"].iter().enumerate() {
        inst.carryover.assignments.push(PastAssignment {
            physician: inst.physicians[k * 7].id.clone(),
            template: TemplateId::new(*t),
            date: last,
            times: None,
        });
    }
    inst
}
