use std::collections::BTreeMap;

use super::{CheckError, FindingSeverity, Held, ViolationFinding};
use crate::derive::conflicts::chronological;
use crate::derive::{DerivedSets, RestClass};
use crate::model::{Kind, RosterInstance};
use crate::rounding::round_half_up;
use crate::solver::RosterSolution;

struct Out<'a> {
    inst: &'a RosterInstance,
    der: &'a DerivedSets,
    findings: Vec<ViolationFinding>,
}

impl Out<'_> {
    fn push(&mut self, family: &str, subjects: Vec<String>, magnitude: f64, message: String) {
        self.findings.push(ViolationFinding {
            family: family.to_owned(),
            subjects,
            severity: FindingSeverity::Hard,
            magnitude,
            message,
        });
    }

    fn p(&self, p: usize) -> String {
        self.inst.physicians[p].id.to_string()
    }

    fn i(&self, i: usize) -> String {
        self.der.instances[i].id.to_string()
    }

    fn part(&self, i: usize, duty: &'static str, shift: &'static str) -> &'static str {
        match self.der.instances[i].kind {
            Kind::Duty => duty,
            Kind::Shift => shift,
        }
    }
}

/// Weekends worked per physician, `[p][w]`.
pub(crate) fn weekends_worked(held: &Held, der: &DerivedSets) -> Vec<Vec<bool>> {
    held.by_physician
        .iter()
        .map(|set| der.weekend_duties.iter().map(|ds| ds.iter().any(|d| set.contains(d))).collect())
        .collect()
}

/// Every violated hard constraint of `roster`; empty means the roster is valid.
pub fn validate_hard(
    roster: &RosterSolution,
    inst: &RosterInstance,
    der: &DerivedSets,
) -> Result<Vec<ViolationFinding>, CheckError> {
    let held = Held::resolve(roster, inst, der)?;
    let mut o = Out { inst, der, findings: Vec::new() };
    let np = inst.physicians.len();

    for &d in &der.duties {
        let n = held.by_instance[d].len();
        let t = inst.duty_template(&der.instances[d].template).expect("duty template");
        if t.mandatory && n != 1 {
            o.push("1", vec![o.i(d)], n as f64, format!("mandatory duty {} has {n} physicians instead of 1", o.i(d)));
        } else if n > 1 {
            o.push("2", vec![o.i(d)], n as f64, format!("duty {} has {n} physicians", o.i(d)));
        }
    }
    for a in &inst.pre_assignments {
        let (p, i) = (inst.physician_index(&a.physician), der.index_of(&a.instance));
        let (Some(p), Some(i)) = (p, i) else { continue };
        if !held.holds(p, i) {
            let fam = o.part(i, "3", "13");
            o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} is pre-assigned to {} but does not hold it", o.p(p), o.i(i)));
        }
    }
    for p in 0..np {
        let ph = &inst.physicians[p];
        for &i in &held.by_physician[p] {
            let x = &der.instances[i];
            if ph.planned_manually && !inst.pre_assignments.iter().any(|a| a.physician == ph.id && a.instance == x.id) {
                let fam = o.part(i, "4", "14");
                o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} is planned manually and was given {}", o.p(p), o.i(i)));
            }
            let rules = inst.qualification_rules(&x.template).expect("known template");
            if !rules.hard_ok(&ph.qualifications) {
                let fam = o.part(i, "5.1", "5.2");
                o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} lacks the qualifications for {}", o.p(p), o.i(i)));
            }
            if x.kind == Kind::Shift {
                let t = inst.shift_template(&x.template).expect("shift template");
                if t.ward_members.as_ref().is_some_and(|w| !w.contains(&ph.id)) {
                    o.push("12", vec![o.p(p), o.i(i)], 1.0, format!("{} is not on the ward of {}", o.p(p), o.i(i)));
                }
            }
            if ph.absences.contains(&x.date) {
                let fam = o.part(i, "17.1", "17.2");
                o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} is absent on {} but holds {}", o.p(p), x.date, o.i(i)));
            }
            if der.impossible[p].contains(&i) {
                let fam = o.part(i, "18.1", "18.2");
                o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} marked {} impossible", o.p(p), o.i(i)));
            }
            if x.kind == Kind::Duty {
                let t = inst.duty_template(&x.template).expect("duty template");
                let next = x.date.succ_opt().expect("date in range");
                let prev = x.date.pred_opt().expect("date in range");
                if t.forbidden_before_absence && ph.absences.contains(&next) {
                    o.push("19", vec![o.p(p), o.i(i)], 1.0, format!("{} holds {} on the day before an absence", o.p(p), o.i(i)));
                }
                if t.forbidden_after_absence && ph.absences.contains(&prev) {
                    o.push("20", vec![o.p(p), o.i(i)], 1.0, format!("{} holds {} on the day after an absence", o.p(p), o.i(i)));
                }
            }
            if der.carryover.hard[p].contains(&i) {
                let fam = o.part(i, "45.1", "45.2");
                o.push(fam, vec![o.p(p), o.i(i)], 1.0, format!("{} holds {} inside rest owed from the previous period", o.p(p), o.i(i)));
            }
        }
    }
    for &s in &der.shifts {
        let t = inst.shift_template(&der.instances[s].template).expect("shift template");
        let n = held.by_instance[s].len() as u32;
        if n < t.min_staff {
            o.push("6", vec![o.i(s)], f64::from(t.min_staff - n), format!("shift {} has {n} physicians, fewer than {}", o.i(s), t.min_staff));
        }
        if n > t.max_staff {
            o.push("7", vec![o.i(s)], f64::from(n - t.max_staff), format!("shift {} has {n} physicians, more than {}", o.i(s), t.max_staff));
        }
    }

    // rest between each ordered pair of a physician's assignments
    let table = der.rule_table();
    let order = chronological(&der.instances);
    let mut rank = vec![0; der.instances.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    for p in 0..np {
        let mut mine: Vec<usize> = held.by_physician[p].iter().copied().collect();
        mine.sort_by_key(|&i| rank[i]);
        for (k, &a) in mine.iter().enumerate() {
            for &b in &mine[k + 1..] {
                let (xa, xb) = (&der.instances[a], &der.instances[b]);
                let Some(rule) = table.get(&(xa.template.clone(), xb.template.clone())) else { continue };
                let gap = xb.start - xa.end;
                if rule.classify(gap) == RestClass::Mandatory {
                    let fam = match (xa.kind, xb.kind) {
                        (Kind::Duty, Kind::Duty) => "15.1",
                        (Kind::Duty, Kind::Shift) => "15.2",
                        (Kind::Shift, Kind::Duty) => "15.3",
                        (Kind::Shift, Kind::Shift) => "15.4",
                    };
                    let hours = gap as f64 / 60.0;
                    let message = format!(
                        "{} holds {} and {} which violates a mandatory rest time ({hours} h of {} h)",
                        o.p(p),
                        o.i(a),
                        o.i(b),
                        rule.mandatory as f64 / 60.0
                    );
                    o.push(fam, vec![o.p(p), o.i(a), o.i(b)], hours, message);
                }
            }
        }
    }

    for p in 0..np {
        for bl in &der.blocks {
            let n = bl.members.iter().filter(|&&m| held.holds(p, m)).count();
            if n == 0 {
                continue;
            }
            let fam = if bl.kind == Kind::Duty { "21" } else { "22" };
            if n < bl.members.len() {
                let msg = format!("{} holds {n} of the {} instances of block {}", o.p(p), bl.members.len(), bl.id);
                o.push(fam, vec![o.p(p), bl.id.to_string()], (bl.members.len() - n) as f64, msg);
                continue;
            }
            for kind in [Kind::Duty, Kind::Shift] {
                let part = match (bl.kind, kind) {
                    (Kind::Duty, Kind::Duty) => 1,
                    (Kind::Duty, Kind::Shift) => 2,
                    (Kind::Shift, Kind::Duty) => 3,
                    (Kind::Shift, Kind::Shift) => 4,
                };
                for &i in &held.by_physician[p] {
                    let x = &der.instances[i];
                    if x.kind != kind {
                        continue;
                    }
                    if x.day > bl.end_day && x.day <= bl.end_day + i64::from(bl.free_days) {
                        let msg = format!("{} holds {} within the free days after block {}", o.p(p), o.i(i), bl.id);
                        o.push(&format!("23.{part}"), vec![o.p(p), bl.id.to_string(), o.i(i)], 1.0, msg);
                    }
                    let closed = match kind {
                        Kind::Duty => bl.no_extra_duties,
                        Kind::Shift => bl.no_extra_shifts,
                    };
                    if closed && (bl.start_day..=bl.end_day).contains(&x.day) && !bl.members.contains(&i) {
                        let msg = format!("{} holds {} alongside block {}", o.p(p), o.i(i), bl.id);
                        o.push(&format!("24.{part}"), vec![o.p(p), bl.id.to_string(), o.i(i)], 1.0, msg);
                    }
                }
            }
        }
    }

    for (pi, pl) in der.pools.iter().enumerate() {
        let cfg = &inst.pools[pi];
        for &p in &pl.members {
            let n = pl.duties.iter().filter(|&&d| held.holds(p, d)).count() as u32;
            let subj = vec![o.p(p), pl.id.to_string()];
            if let Some(ex) = cfg.exact.filter(|&e| e != n) {
                o.push("28", subj.clone(), f64::from(ex.abs_diff(n)), format!("{} holds {n} duties of pool {}, exactly {ex} required", o.p(p), pl.id));
            }
            if let Some(max) = cfg.max_duties.filter(|&m| n > m) {
                o.push("29", subj.clone(), f64::from(n - max), format!("{} holds {n} duties of pool {}, at most {max} allowed", o.p(p), pl.id));
            }
            if let Some(min) = cfg.min_duties.filter(|&m| n < m) {
                o.push("31", subj, f64::from(min - n), format!("{} holds {n} duties of pool {}, at least {min} required", o.p(p), pl.id));
            }
        }
        if let Some(max) = cfg.max_per_day {
            let mut per_day: BTreeMap<i64, u32> = BTreeMap::new();
            for &d in &pl.duties {
                let n = pl.members.iter().filter(|&&p| held.holds(p, d)).count() as u32;
                *per_day.entry(der.instances[d].day).or_default() += n;
            }
            for (day, n) in per_day.into_iter().filter(|&(_, n)| n > max) {
                let date = inst.period.date_of(day);
                o.push("33", vec![pl.id.to_string(), date.to_string()], f64::from(n - max), format!("pool {} has {n} duties on {date}, at most {max} allowed", pl.id));
            }
        }
    }

    let wp = &inst.weekend_policy;
    let worked = weekends_worked(&held, der);
    let nw = der.calendar.weekends.len();
    if let Some(cons) = wp.max_consecutive_weekends {
        let cons = cons as usize;
        for p in 0..np {
            for start in 0..nw.saturating_sub(cons) {
                let n = (start..=start + cons).filter(|&w| worked[p][w]).count();
                if n > cons {
                    let sat = der.calendar.weekends[start].saturday;
                    o.push("38.1", vec![o.p(p), sat.to_string()], (n - cons) as f64, format!("{} works {n} consecutive weekends from {sat}, at most {cons} allowed", o.p(p)));
                }
            }
            let past = (der.carryover.past_weekends[p] as usize).min(cons);
            if past > 0 {
                let span = (cons - past + 1).min(nw);
                let n = (0..span).filter(|&w| worked[p][w]).count();
                if n > cons - past {
                    o.push("38.2", vec![o.p(p)], (n + past - cons) as f64, format!("{} continues a run of {past} weekends from the previous period past the limit of {cons}", o.p(p)));
                }
            }
        }
    }
    for m in der.calendar.months.iter().filter(|m| !m.weekends.is_empty()) {
        for p in 0..np {
            let n = m.weekends.iter().filter(|&&w| worked[p][w]).count() as i64;
            if let Some(max) = wp.max_weekends {
                let cap = round_half_up(f64::from(max) * m.we_factor);
                if n > cap {
                    o.push("41", vec![o.p(p), m.label()], (n - cap) as f64, format!("{} works {n} weekends in {}, at most {cap} allowed", o.p(p), m.label()));
                }
            }
            if let Some(free) = wp.min_free_weekends {
                let cap = round_half_up(m.weekends.len() as f64 - f64::from(free) * m.we_factor);
                if n > cap {
                    o.push("43", vec![o.p(p), m.label()], (n - cap) as f64, format!("{} has too few free weekends in {} ({} worked of {})", o.p(p), m.label(), n, m.weekends.len()));
                }
            }
        }
    }
    Ok(o.findings)
}
