use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

/// Size knobs of the cardiology replica.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CardiologyScale {
    pub physicians: usize,
    pub wards: usize,
    /// Desired rest levels between any two late or night assignments.
    pub rest_levels: &'static [f64],
    pub seed: u64,
}

impl Default for CardiologyScale {
    fn default() -> Self {
        Self { physicians: 30, wards: 4, rest_levels: &[48.0], seed: 0xca_2025_03 }
    }
}

struct Tpl {
    id: &'static str,
    days: &'static [Weekday],
    start: ClockTime,
    end: ClockTime,
    qual: Option<&'static str>,
    category: &'static str,
}

const MON_THU: [Weekday; 4] = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu];

fn templates() -> Vec<Tpl> {
    let t = |id, days, start, end, qual, category| Tpl { id, days, start, end, qual, category };
    vec![
        t("INT", &Weekday::ALL, hm(15, 30), next(0, 0), None, "evening"),
        t("NIGHT", &Weekday::ALL, hm(22, 0), next(8, 0), None, "night"),
        t("ICU-E", &Weekday::ALL, hm(6, 0), hm(14, 30), Some("icu"), "morning"),
        t("ICU-D", &Weekday::ALL, hm(8, 0), hm(16, 30), Some("icu"), "day"),
        t("ICU-L", &Weekday::ALL, hm(14, 0), hm(22, 30), Some("icu"), "evening"),
        t("ICU-N", &Weekday::ALL, hm(22, 0), next(8, 0), Some("icu"), "night"),
        t("CPU-E", &Weekday::ALL, hm(6, 30), hm(15, 0), Some("cpu"), "morning"),
        t("CPU-L", &Weekday::ALL, hm(14, 30), hm(23, 0), Some("cpu"), "evening"),
        t("CPU-N", &Weekday::ALL, hm(22, 30), next(8, 30), Some("cpu"), "night"),
        t("CPU-O", &Weekday::WORKDAYS, hm(8, 0), hm(16, 30), Some("cpu"), "day"),
        t("FUNC", &MON_THU, hm(8, 0), hm(16, 30), None, "day"),
        t("FSUP", &Weekday::WORKDAYS, hm(8, 0), hm(16, 30), None, "day"),
    ]
}

/// Cardiology: about 30 physicians, twelve duty types, all optional, weekly
/// duty and shift blocks on weekdays, weekly preferences, one month.
pub fn cardiology() -> RosterInstance {
    cardiology_scaled(CardiologyScale::default())
}

/// The cardiology structure at the size of a large department with many
/// wards and a finer desired-rest ladder.
pub fn cardiology_full() -> RosterInstance {
    cardiology_scaled(CardiologyScale {
        physicians: 40,
        wards: 10,
        rest_levels: &[48.0, 72.0, 96.0],
        seed: 0xca_2025_03,
    })
}

pub fn cardiology_scaled(scale: CardiologyScale) -> RosterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed);
    let mut inst = RosterInstance::empty("cardiology", period(date(2025, 3, 1), date(2025, 3, 31), &[]));
    inst.qualifications = ["icu", "cpu", "senior", "icu-new"].map(qualification).to_vec();
    let ward_ids: Vec<String> = (1..=scale.wards).map(|k| format!("ward-{k}")).collect();
    let tpls = templates();

    for k in 0..scale.physicians {
        let mut quals = Vec::new();
        if k % 5 < 2 {
            quals.push("icu");
            if k % 10 == 1 {
                quals.push("icu-new");
            }
        }
        if k % 5 == 2 || k % 5 == 3 {
            quals.push("cpu");
        }
        if k % 3 == 0 {
            quals.push("senior");
        }
        let rate = if k % 7 == 6 { 0.75 } else { 1.0 };
        let mut ph = physician(&format!("ca{:02}", k + 1), rate, &quals);
        ph.weekend_preference = match k % 4 {
            1 => WeekendPreference::OneDuty,
            2 => WeekendPreference::MultipleDuties,
            _ => WeekendPreference::None,
        };
        inst.physicians.push(ph);
    }

    let late_or_night = |t: &Tpl| t.end.minutes() > 21 * 60;
    for t in &tpls {
        let mut d = duty(t.id, Recurrence::on(t.days, window(t.start, t.end)), false);
        if t.days.len() < 7 {
            d.recurrence.holidays = HolidayRule::Never;
        }
        d.forbidden_before_absence = late_or_night(t);
        if let Some(q) = t.qual {
            d.qualifications.required = qs(&[q]);
        }
        inst.duty_templates.push(d);
    }
    let mut ward_rec = Recurrence::on(&Weekday::WORKDAYS, window(hm(7, 30), hm(16, 0)));
    ward_rec.holidays = HolidayRule::Never;
    for (k, w) in ward_ids.iter().enumerate() {
        let mut s = shift(w, ward_rec.clone(), (0, 3, 6));
        if k % 2 == 0 {
            s.qualifications.desired = qs(&["senior"]);
        }
        inst.shift_templates.push(s);
    }

    let mut all: Vec<&str> = tpls.iter().map(|t| t.id).collect();
    all.extend(ward_ids.iter().map(String::as_str));
    let heavy: Vec<&str> = tpls.iter().filter(|t| late_or_night(t)).map(|t| t.id).collect();
    for &a in &all {
        for &b in &all {
            if heavy.contains(&a) && heavy.contains(&b) {
                inst.rest_rules.push(rule(a, b, 11.0, scale.rest_levels));
            } else {
                inst.rest_rules.push(rule(a, b, 11.0, &[]));
            }
        }
    }

    let dates = dates(&inst.period);
    for ph in &mut inst.physicians {
        if rng.gen_bool(0.5) {
            let len = rng.gen_range(2..=6);
            let first = rng.gen_range(0..dates.len() - len);
            ph.absences.extend(dates[first..first + len].iter().copied());
        }
    }

    // weekday blocks for every full week
    let mondays: Vec<NaiveDate> = dates
        .iter()
        .copied()
        .filter(|d| Weekday::of(*d) == Weekday::Mon && *d + chrono::Duration::days(5) <= inst.period.end_date)
        .collect();
    let day = |m: NaiveDate, k: i64| m + chrono::Duration::days(k);
    let mut prev_ward_block: Vec<Option<BlockId>> = vec![None; scale.wards];
    for (k, w) in ward_ids.iter().enumerate() {
        let id = BlockId::new(format!("{w}-prev"));
        let who = inst.physicians[k % scale.physicians].id.clone();
        inst.carryover.blocks.push(PastBlock {
            id: id.clone(),
            kind: Kind::Shift,
            physicians: vec![who],
            last_day: date(2025, 2, 28),
            free_days_after: 0,
        });
        prev_ward_block[k] = Some(id);
    }
    for (wk, &m) in mondays.iter().enumerate() {
        let mut members: Vec<InstanceId> = (0..4).map(|k| instance("FUNC", day(m, k))).collect();
        members.extend([instance("NIGHT", day(m, 4)), instance("NIGHT", day(m, 5))]);
        inst.blocks.push(block(&format!("func-night-{wk}"), Kind::Duty, members, 1));
        for t in ["ICU-D", "CPU-O"] {
            let members = (0..5).map(|k| instance(t, day(m, k))).collect();
            inst.blocks.push(block(&format!("{}-{wk}", t.to_lowercase()), Kind::Duty, members, 0));
        }
        for (k, w) in ward_ids.iter().enumerate() {
            let id = format!("{w}-{wk}");
            let members = (0..5).map(|d| instance(w, day(m, d))).collect();
            let mut b = block(&id, Kind::Shift, members, 0);
            b.allow_extra_duties = true;
            b.predecessor = prev_ward_block[k].replace(BlockId::new(&id));
            b.max_consecutive_run = Some(2);
            inst.blocks.push(b);
        }
    }

    inst.weekly_sets = ["morning", "day", "evening", "night"]
        .into_iter()
        .map(|c| WeeklySet {
            id: WeeklySetId::new(c),
            label: c.to_owned(),
            templates: tpls.iter().filter(|t| t.category == c).map(|t| TemplateId::new(t.id)).collect(),
        })
        .collect();
    inst.preference_caps = vec![PreferenceCap {
        level: PreferenceLevel::Impossible,
        per: CapPer::Period,
        days: CapDays::All,
        targets: CapTargets::Any,
        limit: CapLimit::Count(2),
    }];
    let weekend_dates: Vec<NaiveDate> = dates.iter().copied().filter(|d| Weekday::of(*d).is_weekend()).collect();
    let levels = [
        PreferenceLevel::StronglyDesired,
        PreferenceLevel::Desired,
        PreferenceLevel::Indifferent,
        PreferenceLevel::Undesired,
    ];
    for ph in &inst.physicians {
        let id = ph.id.as_str();
        for week in 0..mondays.len() as u32 + 1 {
            let set = ["morning", "day", "evening", "night"].choose(&mut rng).unwrap();
            inst.preferences.push(PreferenceRecord {
                physician: ph.id.clone(),
                target: PreferenceTarget::Weekly { set: WeeklySetId::new(*set), week },
                level: *levels.choose(&mut rng).unwrap(),
            });
        }
        let mut impossible = 0;
        for d in weekend_dates.choose_multiple(&mut rng, 3) {
            if ph.absences.contains(d) {
                continue;
            }
            let level = if impossible < 2 && rng.gen_bool(0.3) {
                impossible += 1;
                PreferenceLevel::Impossible
            } else {
                *levels.choose(&mut rng).unwrap()
            };
            inst.preferences.push(wish(id, ["INT", "NIGHT"].choose(&mut rng).unwrap(), *d, level));
        }
    }

    let members = |f: &dyn Fn(&Physician) -> bool| ids(inst.physicians.iter().filter(|p| f(p)).map(|p| p.id.to_string()));
    let icu = members(&|p| p.qualifications.contains(&QualificationId::new("icu")));
    let cpu = members(&|p| p.qualifications.contains(&QualificationId::new("cpu")));
    let everyone = members(&|_| true);
    let fresh = members(&|p| p.qualifications.contains(&QualificationId::new("icu-new")));
    let mut pools = Vec::new();
    let mut p = Pool::new("icu", icu, selection(&["ICU-E", "ICU-D", "ICU-L", "ICU-N"]));
    p.fair = Some(Fairness::default());
    pools.push(p);
    let mut p = Pool::new("cpu", cpu, selection(&["CPU-E", "CPU-L", "CPU-N", "CPU-O"]));
    p.fair = Some(Fairness::default());
    pools.push(p);
    let mut weekend = selection(&["INT", "NIGHT", "ICU-E", "ICU-D", "ICU-L", "ICU-N", "CPU-E", "CPU-L", "CPU-N"]);
    weekend.weekdays = Weekday::WEEKEND.into_iter().collect();
    weekend.include_holidays = true;
    let mut p = Pool::new("weekends", everyone.clone(), weekend);
    p.fair = Some(Fairness::default());
    pools.push(p);
    let mut p = Pool::new("nights", everyone.clone(), selection(&["INT", "NIGHT"]));
    p.fair = Some(Fairness::default());
    pools.push(p);
    let mut p = Pool::new("function-support", everyone, selection(&["FSUP"]));
    p.max_duties = Some(5);
    pools.push(p);
    if !fresh.is_empty() {
        let mut p = Pool::new("icu-new", fresh, selection(&["ICU-E", "ICU-D"]));
        p.max_per_day = Some(1);
        pools.push(p);
    }
    inst.pools = pools;

    inst.weekend_policy = WeekendPolicy {
        desired_max_weekends: Some(SoftBound::new(2)),
        max_consecutive_weekends: Some(3),
        ..Default::default()
    };
    for (k, ph) in inst.physicians.iter().enumerate().filter(|(k, _)| k % 6 == 0) {
        inst.carryover.past_weekends.insert(ph.id.clone(), 1 + (k % 3) as u32);
    }
    inst.carryover.assignments.push(PastAssignment {
        physician: inst.physicians[1].id.clone(),
        template: TemplateId::new("NIGHT"),
        date: date(2025, 2, 28),
        times: None,
    });
    inst
}

fn block(id: &str, kind: Kind, members: Vec<InstanceId>, free_days_after: u32) -> BlockDefinition {
    BlockDefinition {
        id: BlockId::new(id),
        kind,
        members,
        allow_extra_duties: false,
        allow_extra_shifts: false,
        free_days_after,
        predecessor: None,
        consecutive_weight: None,
        max_consecutive_run: None,
    }
}
