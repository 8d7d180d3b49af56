use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

const WARDS: [&str; 5] = ["wa", "wb", "wc", "wd", "we"];
const NIGHTS: [&str; 4] = ["N1", "N2", "BN1", "BN2"];
const DAYS: [&str; 4] = ["D1", "D2", "BD1", "BD2"];
const REGULAR: [&str; 4] = ["N1", "N2", "D1", "D2"];

/// Internal medicine: about 35 physicians, two night and two weekend day
/// duties plus optional backups, fixed ward shifts on weekdays, one month.
pub fn internal_medicine() -> RosterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d_2025_05);
    let holidays = [date(2025, 5, 1), date(2025, 5, 29)];
    let mut inst = RosterInstance::empty("internal-medicine", period(date(2025, 5, 1), date(2025, 5, 31), &holidays));
    inst.qualifications = ["icu", "no-nights", "no-duties"].into_iter().chain(WARDS).map(qualification).collect();

    let mut ward_of: BTreeMap<String, &str> = BTreeMap::new();
    for k in 0..35 {
        let id = format!("im{:02}", k + 1);
        let rate = match k % 9 {
            3 => 0.8,
            7 => 0.6,
            _ => 1.0,
        };
        let ward = WARDS[k % WARDS.len()];
        let mut quals = vec![ward];
        if k % 5 != 4 {
            quals.push("icu");
        }
        if k == 11 {
            quals.push("no-nights");
        }
        if k == 23 {
            quals.push("no-duties");
        }
        inst.physicians.push(physician(&id, rate, &quals));
        ward_of.insert(id, ward);
    }

    let night = window(hm(20, 0), next(8, 0));
    let day = window(hm(8, 0), hm(20, 0));
    let mut weekend_rec = Recurrence::on(&Weekday::WEEKEND, day);
    weekend_rec.holidays = HolidayRule::Also;
    for (id, mandatory) in [("N1", true), ("N2", true), ("BN1", false), ("BN2", false)] {
        let mut t = duty(id, Recurrence::on(&Weekday::ALL, night), mandatory);
        t.forbidden_before_absence = true;
        t.qualifications.excluded = qs(&["no-nights", "no-duties"]);
        if id.ends_with('1') {
            t.qualifications.required = qs(&["icu"]);
        }
        inst.duty_templates.push(t);
    }
    for (id, mandatory) in [("D1", true), ("D2", true), ("BD1", false), ("BD2", false)] {
        let mut t = duty(id, weekend_rec.clone(), mandatory);
        t.forbidden_before_absence = true;
        t.qualifications.excluded = qs(&["no-duties"]);
        if id.ends_with('1') {
            t.qualifications.required = qs(&["icu"]);
        }
        inst.duty_templates.push(t);
    }
    let mut ward_rec = Recurrence::on(&Weekday::WORKDAYS, window(hm(7, 15), hm(16, 0)));
    ward_rec.holidays = HolidayRule::Never;
    for w in WARDS {
        let members: Vec<String> = ward_of.iter().filter(|(_, &x)| x == w).map(|(p, _)| p.clone()).collect();
        let mut s = shift(&format!("ward-{w}"), ward_rec.clone(), (2, 4, members.len() as u32));
        s.qualifications.required = qs(&[w]);
        inst.shift_templates.push(s);
    }

    // one assignment per day and recovery between them; backups may share a day with a ward shift
    let duties: Vec<&str> = NIGHTS.iter().chain(DAYS.iter()).copied().collect();
    for &a in &duties {
        for &b in &duties {
            if NIGHTS.contains(&a) && NIGHTS.contains(&b) {
                inst.rest_rules.push(rule(a, b, 24.0, &[48.0, 72.0]));
            } else {
                inst.rest_rules.push(rule(a, b, 11.0, &[]));
            }
        }
    }
    let wards: Vec<String> = WARDS.iter().map(|w| format!("ward-{w}")).collect();
    for w in &wards {
        for d in REGULAR {
            inst.rest_rules.push(rule(w, d, 11.0, &[]));
            inst.rest_rules.push(rule(d, w, 11.0, &[]));
        }
    }

    let dates = dates(&inst.period);
    for ph in &mut inst.physicians {
        if rng.gen_bool(0.45) {
            let len = rng.gen_range(3..=7);
            let first = rng.gen_range(0..dates.len() - len);
            ph.absences.extend(dates[first..first + len].iter().copied());
        }
        if rng.gen_bool(0.3) {
            ph.absences.insert(*dates.choose(&mut rng).unwrap());
        }
    }

    let all: Vec<String> = inst.physicians.iter().map(|p| p.id.to_string()).collect();
    let reduced: Vec<String> = ["im06", "im19", "im30"].map(String::from).to_vec();
    let mut fair = Pool::new("regular", ids(all.iter().filter(|p| !reduced.contains(p))), selection(&REGULAR));
    fair.fair = Some(Fairness::default());
    inst.pools.push(fair);
    let mut fixed = Pool::new("reduced", ids(&reduced), selection(&REGULAR));
    fixed.exact = Some(1);
    inst.pools.push(fixed);
    let mut backups = Pool::new("backups", ids(&all), selection(&["BN1", "BN2", "BD1", "BD2"]));
    backups.max_duties = Some(4);
    inst.pools.push(backups);
    let mut saturdays = selection(&["N1", "N2"]);
    saturdays.weekdays = [Weekday::Sat].into_iter().collect();
    let mut sat = Pool::new("saturday-nights", ids(&all), saturdays);
    sat.max_duties = Some(1);
    inst.pools.push(sat);
    for w in WARDS {
        let members = ward_of.iter().filter(|(_, &x)| x == w).map(|(p, _)| p.clone());
        let mut section = Pool::new(&format!("nights-{w}"), ids(members), selection(&["N1", "N2"]));
        section.max_per_day = Some(1);
        inst.pools.push(section);
    }

    inst.preference_caps = vec![
        PreferenceCap {
            level: PreferenceLevel::Undesired,
            per: CapPer::Month,
            days: CapDays::All,
            targets: CapTargets::Any,
            limit: CapLimit::Count(10),
        },
        PreferenceCap {
            level: PreferenceLevel::Impossible,
            per: CapPer::Month,
            days: CapDays::All,
            targets: CapTargets::Any,
            limit: CapLimit::Count(3),
        },
    ];
    for ph in &inst.physicians {
        let free: Vec<NaiveDate> = dates.iter().copied().filter(|d| !ph.absences.contains(d)).collect();
        let picks: Vec<NaiveDate> = free.choose_multiple(&mut rng, 14).copied().collect();
        let counts = [
            (PreferenceLevel::StronglyDesired, rng.gen_range(0..=2)),
            (PreferenceLevel::Desired, rng.gen_range(0..=4)),
            (PreferenceLevel::Undesired, rng.gen_range(0..=6)),
            (PreferenceLevel::Impossible, rng.gen_range(0..=2)),
        ];
        let mut it = picks.into_iter();
        for (level, n) in counts {
            for d in it.by_ref().take(n) {
                let weekend = Weekday::of(d).is_weekend() || inst.period.is_holiday(d);
                let template = match (weekend, rng.gen_bool(0.5)) {
                    (true, true) => "D2",
                    (_, false) => "N2",
                    (false, true) => "N1",
                };
                inst.preferences.push(wish(ph.id.as_str(), template, d, level));
            }
        }
    }

    // nights worked at the end of April
    let last = date(2025, 4, 30);
    for (p, t) in [("im02", "N1"), ("im08", "N2"), ("im13", "BN1")] {
        inst.carryover.assignments.push(PastAssignment {
            physician: PhysicianId::new(p),
            template: TemplateId::new(t),
            date: last,
            times: None,
        });
    }
    inst
}
