//! Compilation of an instance and its derived sets into a [`CanonicalModel`].

use std::collections::{BTreeMap, HashMap};

use super::model::*;
use crate::derive::{BlockPrev, DerivedSets};
use crate::model::{Kind, RosterInstance, WeekendPreference, WeightConfig};
use crate::rounding::round_half_up;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("infeasible at build, family ({family}): {message}")]
    Clash { family: Family, message: String },
}

const NONE: usize = usize::MAX;

struct Builder<'a> {
    inst: &'a RosterInstance,
    der: &'a DerivedSets,
    model: CanonicalModel,
}

impl Builder<'_> {
    fn var(&mut self, name: String, kind: VarKind, upper: f64, objective: f64) -> usize {
        let upper = match kind {
            VarKind::Binary => 1.0,
            VarKind::Integer => upper.max(0.0),
        };
        self.model.variables.push(Variable { name, kind, lower: 0.0, upper, objective: objective + 0.0 });
        self.model.variables.len() - 1
    }

    fn con(
        &mut self,
        family: Family,
        subject: String,
        mut terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), BuildError> {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        let name = format!("c{family}[{subject}]");
        if merged.is_empty() {
            if sense.holds(0.0, rhs, 0.0) {
                return Ok(());
            }
            return Err(BuildError::Clash { family, message: format!("{name} requires 0 {} {rhs}", sense.symbol()) });
        }
        self.model.constraints.push(Constraint { name, family, terms: merged, sense, rhs });
        Ok(())
    }

    fn pid(&self, p: usize) -> &str {
        self.inst.physicians[p].id.as_str()
    }

    fn iid(&self, i: usize) -> &str {
        self.der.instances[i].id.as_str()
    }
}

/// Objective coefficient of assigning physician `p` to instance `i`.
pub fn assignment_coefficient(der: &DerivedSets, w: &WeightConfig, p: usize, i: usize) -> f64 {
    let mut c = 0.0;
    if der.instances[i].kind == Kind::Duty && !der.mandatory[i] {
        c += w.coverage;
    }
    if !der.quali_soft[p][i] {
        c -= w.soft_qualification;
    }
    if let Some(hit) = der.carryover.soft[p].get(&i) {
        c -= hit.weight;
    }
    if let Some(levels) = der.preferences[p].get(&i) {
        c += levels.iter().map(|&l| w.preference(l)).sum::<f64>();
    }
    c
}

fn check_manual(b: &Builder<'_>) -> Result<(), BuildError> {
    let der = b.der;
    for (p, set) in der.manual.iter().enumerate() {
        for &i in set {
            let x = &der.instances[i];
            let clash = |family: Family, why: &str| BuildError::Clash {
                family,
                message: format!("{} is pre-assigned to {} but {why}", b.pid(p), x.id),
            };
            if !der.quali_hard[p][i] {
                return Err(clash(Family::new(5, if x.kind == Kind::Duty { 1 } else { 2 }), "lacks a required qualification"));
            }
            if !der.in_ward[p][i] {
                return Err(clash(Family::new(12, 0), "is not a member of the ward"));
            }
            if der.absences[p].contains(&x.day) {
                return Err(clash(Family::new(17, if x.kind == Kind::Duty { 1 } else { 2 }), "is absent that day"));
            }
            if der.impossible[p].contains(&i) {
                return Err(clash(Family::new(18, if x.kind == Kind::Duty { 1 } else { 2 }), "marked it impossible"));
            }
            if der.carryover.hard[p].contains(&i) {
                return Err(clash(Family::new(45, if x.kind == Kind::Duty { 1 } else { 2 }), "needs rest after the previous period"));
            }
        }
        for &(a, c) in &der.conflicts.hard {
            if set.contains(&a) && set.contains(&c) {
                return Err(BuildError::Clash {
                    family: Family::new(15, rest_part(der, a, c)),
                    message: format!("{} is pre-assigned to {} and {} which violate a mandatory rest", b.pid(p), b.iid(a), b.iid(c)),
                });
            }
        }
    }
    Ok(())
}

fn rest_part(der: &DerivedSets, a: usize, c: usize) -> u8 {
    match (der.instances[a].kind, der.instances[c].kind) {
        (Kind::Duty, Kind::Duty) => 1,
        (Kind::Duty, Kind::Shift) => 2,
        (Kind::Shift, Kind::Duty) => 3,
        (Kind::Shift, Kind::Shift) => 4,
    }
}

pub fn build_model(inst: &RosterInstance, der: &DerivedSets, w: &WeightConfig) -> Result<CanonicalModel, BuildError> {
    let mut b = Builder { inst, der, model: CanonicalModel::default() };
    check_manual(&b)?;
    let np = inst.physicians.len();
    let t_days = der.days;
    let f = Family::new;

    // ---- variables, in schema order ----
    let mut assign = vec![vec![NONE; der.instances.len()]; np];
    for p in 0..np {
        for &d in &der.duties {
            let name = format!("x[{},{}]", b.pid(p), b.iid(d));
            assign[p][d] = b.var(name, VarKind::Binary, 1.0, assignment_coefficient(der, w, p, d));
        }
    }
    for p in 0..np {
        for &s in &der.shifts {
            let name = format!("y[{},{}]", b.pid(p), b.iid(s));
            assign[p][s] = b.var(name, VarKind::Binary, 1.0, assignment_coefficient(der, w, p, s));
        }
    }
    let shift_params: Vec<(u32, u32, u32, f64, f64)> = der
        .shifts
        .iter()
        .map(|&s| {
            let t = inst.shift_template(&der.instances[s].template).expect("shift template");
            (
                t.min_staff,
                t.desired_min_staff,
                t.max_staff,
                t.desired_weight.unwrap_or(w.desired_staffing),
                t.max_weight.unwrap_or(w.max_staffing),
            )
        })
        .collect();
    let mut y_des = Vec::with_capacity(der.shifts.len());
    for (k, &s) in der.shifts.iter().enumerate() {
        let (min, des, _, cdes, _) = shift_params[k];
        y_des.push(b.var(format!("yDes[{}]", b.iid(s)), VarKind::Integer, f64::from(des.saturating_sub(min)), cdes));
    }
    let mut y_max = Vec::with_capacity(der.shifts.len());
    for (k, &s) in der.shifts.iter().enumerate() {
        let (_, des, max, _, cmax) = shift_params[k];
        y_max.push(b.var(format!("yMax[{}]", b.iid(s)), VarKind::Integer, f64::from(max.saturating_sub(des)), cmax));
    }
    let mut y_aux = Vec::with_capacity(der.shifts.len());
    for &s in &der.shifts {
        y_aux.push(b.var(format!("yAux[{}]", b.iid(s)), VarKind::Binary, 1.0, 0.0));
    }

    let mut blk = vec![vec![NONE; der.blocks.len()]; np];
    for kind in [Kind::Duty, Kind::Shift] {
        for p in 0..np {
            for (bi, bl) in der.blocks.iter().enumerate().filter(|(_, bl)| bl.kind == kind) {
                let prefix = if kind == Kind::Duty { "xBlk" } else { "yBlk" };
                let name = format!("{prefix}[{},{}]", b.pid(p), bl.id);
                blk[p][bi] = b.var(name, VarKind::Binary, 1.0, 0.0);
            }
        }
    }
    let mut blk_cons = vec![vec![NONE; der.blocks.len()]; np];
    for p in 0..np {
        for (bi, bl) in der.blocks.iter().enumerate() {
            if bl.kind == Kind::Shift && bl.prev.is_some() {
                let name = format!("yBlkCons[{},{}]", b.pid(p), bl.id);
                blk_cons[p][bi] = b.var(name, VarKind::Binary, 1.0, bl.consecutive_weight);
            }
        }
    }
    let consec_duties: Vec<usize> = der
        .duties
        .iter()
        .copied()
        .filter(|d| der.prev_duty.contains_key(d) || der.carryover.prev_period_physician.contains_key(d))
        .collect();
    let mut x_cons: HashMap<(usize, usize), usize> = HashMap::new();
    for p in 0..np {
        for &d in &consec_duties {
            let t = inst.duty_template(&der.instances[d].template).expect("duty template");
            let weight = t.consecutive_weight.unwrap_or(w.consecutive_duty);
            let v = b.var(format!("xCons[{},{}]", b.pid(p), b.iid(d)), VarKind::Binary, 1.0, weight);
            x_cons.insert((p, d), v);
        }
    }
    let mut vio_rest = Vec::new();
    for p in 0..np {
        for sc in &der.conflicts.soft {
            let name = format!("vioRest[{},{},{}]", b.pid(p), b.iid(sc.first), b.iid(sc.second));
            vio_rest.push(b.var(name, VarKind::Binary, 1.0, -sc.weight));
        }
    }

    let wp = &inst.weekend_policy;
    let weekends = &der.calendar.weekends;
    let wants = |pref| inst.physicians.iter().any(|p| p.weekend_preference == pref);
    let weekend_active = !weekends.is_empty()
        && (wp.max_consecutive_weekends.is_some()
            || wp.max_weekends.is_some()
            || wp.desired_max_weekends.is_some()
            || wp.min_free_weekends.is_some()
            || wp.desired_min_free_weekends.is_some()
            || wants(WeekendPreference::OneDuty)
            || wants(WeekendPreference::MultipleDuties));
    let we_label = |wi: usize| weekends[wi].saturday.format("%Y-%m-%d").to_string();
    let mut we_att = vec![Vec::new(); np];
    if weekend_active {
        for (p, row) in we_att.iter_mut().enumerate() {
            for wi in 0..weekends.len() {
                row.push(b.var(format!("weAtt[{},{}]", b.pid(p), we_label(wi)), VarKind::Binary, 1.0, 0.0));
            }
        }
    }
    let we_pref_weight = wp.preference_weight.unwrap_or(w.weekend_preference);
    let mut vio_we_pref: HashMap<(usize, usize), usize> = HashMap::new();
    if weekend_active {
        for p in 0..np {
            let pref = inst.physicians[p].weekend_preference;
            if pref == WeekendPreference::None {
                continue;
            }
            for wi in 0..weekends.len() {
                let ub = match pref {
                    WeekendPreference::OneDuty => der.weekend_duties[wi].len().saturating_sub(1) as f64,
                    _ => 1.0,
                };
                let name = format!("vioWePref[{},{}]", b.pid(p), we_label(wi));
                vio_we_pref.insert((p, wi), b.var(name, VarKind::Integer, ub, -we_pref_weight));
            }
        }
    }
    let months: Vec<usize> =
        (0..der.calendar.months.len()).filter(|&m| !der.calendar.months[m].weekends.is_empty()).collect();
    let month_rhs = |m: usize, x: f64| {
        let mm = &der.calendar.months[m];
        round_half_up(x * mm.we_factor)
    };
    let free_rhs = |m: usize, x: f64| {
        let mm = &der.calendar.months[m];
        round_half_up(mm.weekends.len() as f64 - x * mm.we_factor)
    };
    let mut vio_max_we = HashMap::new();
    if let (true, Some(sb)) = (weekend_active, wp.desired_max_weekends) {
        for p in 0..np {
            for &m in &months {
                let rhs = month_rhs(m, f64::from(sb.value));
                let ub = (der.calendar.months[m].weekends.len() as i64 - rhs).max(0) as f64;
                let name = format!("vioMaxWe[{},{}]", b.pid(p), der.calendar.months[m].label());
                let v = b.var(name, VarKind::Integer, ub, -sb.weight.unwrap_or(w.max_weekends));
                vio_max_we.insert((p, m), (v, rhs));
            }
        }
    }
    let mut vio_free_we = HashMap::new();
    if let (true, Some(sb)) = (weekend_active, wp.desired_min_free_weekends) {
        for p in 0..np {
            for &m in &months {
                let rhs = free_rhs(m, f64::from(sb.value));
                let ub = (der.calendar.months[m].weekends.len() as i64 - rhs).max(0) as f64;
                let name = format!("vioFreeWe[{},{}]", b.pid(p), der.calendar.months[m].label());
                let v = b.var(name, VarKind::Integer, ub, -sb.weight.unwrap_or(w.free_weekends));
                vio_free_we.insert((p, m), (v, rhs));
            }
        }
    }

    let mut vio_max_d = HashMap::new();
    let mut vio_min_d = HashMap::new();
    let mut vio_max_phy = HashMap::new();
    let mut vio_down = HashMap::new();
    let mut vio_up = HashMap::new();
    let pool_days: Vec<BTreeMap<i64, Vec<usize>>> = der
        .pools
        .iter()
        .map(|pl| {
            let mut m: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for &d in &pl.duties {
                m.entry(der.instances[d].day).or_default().push(d);
            }
            m
        })
        .collect();
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_max_duties {
            for &p in &pl.members {
                let ub = pl.duties.len() as f64 - f64::from(sb.value);
                let name = format!("vioMaxD[{},{}]", b.pid(p), pl.id);
                vio_max_d.insert((p, pi), b.var(name, VarKind::Integer, ub, -sb.weight.unwrap_or(w.pool_max_duties)));
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_min_duties {
            for &p in &pl.members {
                let name = format!("vioMinD[{},{}]", b.pid(p), pl.id);
                let v = b.var(name, VarKind::Integer, f64::from(sb.value), -sb.weight.unwrap_or(w.pool_min_duties));
                vio_min_d.insert((p, pi), v);
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_max_per_day {
            for (&day, ds) in &pool_days[pi] {
                let ub = ds.len() as f64 - f64::from(sb.value);
                let date = der.instances[ds[0]].date.format("%Y-%m-%d");
                let name = format!("vioMaxPhy[{},{date}]", pl.id);
                let v = b.var(name, VarKind::Integer, ub, -sb.weight.unwrap_or(w.pool_max_per_day));
                vio_max_phy.insert((pi, day), v);
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        let (Some(targets), Some(fair)) = (&pl.targets, inst.pools[pi].fair) else { continue };
        for (k, &p) in pl.members.iter().enumerate() {
            let lo = targets[k].floor();
            let name = format!("vioDown[{},{}]", b.pid(p), pl.id);
            vio_down.insert((p, pi), b.var(name, VarKind::Integer, lo, -fair.down_weight.unwrap_or(w.fair_down)));
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        let (Some(targets), Some(fair)) = (&pl.targets, inst.pools[pi].fair) else { continue };
        for (k, &p) in pl.members.iter().enumerate() {
            let ub = pl.duties.len() as f64 - targets[k].ceil();
            let name = format!("vioUp[{},{}]", b.pid(p), pl.id);
            vio_up.insert((p, pi), b.var(name, VarKind::Integer, ub, -fair.up_weight.unwrap_or(w.fair_up)));
        }
    }
    let mut vio_cons_b = Vec::new();
    for (j, win) in der.block_windows.iter().enumerate() {
        vio_cons_b.push(b.var(format!("vioMaxConsB[{}]", j + 1), VarKind::Binary, 1.0, -win.weight));
    }

    // ---- constraints, by family ----
    let x = |p: usize, i: usize| assign[p][i];
    for &d in &der.duties {
        let terms = (0..np).map(|p| (x(p, d), 1.0)).collect();
        if der.mandatory[d] {
            b.con(f(1, 0), b.iid(d).to_owned(), terms, Sense::Eq, 1.0)?;
        } else {
            b.con(f(2, 0), b.iid(d).to_owned(), terms, Sense::Le, 1.0)?;
        }
    }
    for p in 0..np {
        for &d in der.manual[p].iter().filter(|&&i| der.instances[i].kind == Kind::Duty) {
            b.con(f(3, 0), format!("{},{}", b.pid(p), b.iid(d)), vec![(x(p, d), 1.0)], Sense::Eq, 1.0)?;
        }
    }
    for p in (0..np).filter(|&p| der.planned_manually[p]) {
        for &d in der.duties.iter().filter(|d| !der.manual[p].contains(d)) {
            b.con(f(4, 0), format!("{},{}", b.pid(p), b.iid(d)), vec![(x(p, d), 1.0)], Sense::Eq, 0.0)?;
        }
    }
    for p in 0..np {
        for &d in der.duties.iter().filter(|&&d| !der.quali_hard[p][d]) {
            b.con(f(5, 1), format!("{},{}", b.pid(p), b.iid(d)), vec![(x(p, d), 1.0)], Sense::Eq, 0.0)?;
        }
    }
    for p in 0..np {
        for &s in der.shifts.iter().filter(|&&s| !der.quali_hard[p][s]) {
            b.con(f(5, 2), format!("{},{}", b.pid(p), b.iid(s)), vec![(x(p, s), 1.0)], Sense::Eq, 0.0)?;
        }
    }
    let ward_terms = |s: usize| -> Vec<(usize, f64)> {
        (0..np).filter(|&p| der.in_ward[p][s]).map(|p| (x(p, s), 1.0)).collect()
    };
    for (k, &s) in der.shifts.iter().enumerate() {
        let (min, ..) = shift_params[k];
        if min > 0 {
            b.con(f(6, 0), b.iid(s).to_owned(), ward_terms(s), Sense::Ge, f64::from(min))?;
        }
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (_, _, max, ..) = shift_params[k];
        let terms = ward_terms(s);
        if (max as usize) < terms.len() {
            b.con(f(7, 0), b.iid(s).to_owned(), terms, Sense::Le, f64::from(max))?;
        }
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (min, ..) = shift_params[k];
        let mut terms = vec![(y_des[k], 1.0), (y_max[k], 1.0)];
        terms.extend(ward_terms(s).into_iter().map(|(j, _)| (j, -1.0)));
        b.con(f(8, 0), b.iid(s).to_owned(), terms, Sense::Eq, -f64::from(min))?;
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (min, des, ..) = shift_params[k];
        b.con(f(9, 0), b.iid(s).to_owned(), vec![(y_des[k], 1.0)], Sense::Le, f64::from(des.saturating_sub(min)))?;
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (_, des, max, ..) = shift_params[k];
        b.con(f(10, 0), b.iid(s).to_owned(), vec![(y_max[k], 1.0)], Sense::Le, f64::from(max.saturating_sub(des)))?;
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (min, des, ..) = shift_params[k];
        let gap = f64::from(des.saturating_sub(min));
        b.con(f(11, 1), b.iid(s).to_owned(), vec![(y_aux[k], gap), (y_des[k], 1.0)], Sense::Ge, gap)?;
    }
    for (k, &s) in der.shifts.iter().enumerate() {
        let (_, _, max, ..) = shift_params[k];
        let m = f64::from(max);
        b.con(f(11, 2), b.iid(s).to_owned(), vec![(y_max[k], 1.0), (y_aux[k], m)], Sense::Le, m)?;
    }
    for p in 0..np {
        for &s in der.shifts.iter().filter(|&&s| !der.in_ward[p][s]) {
            b.con(f(12, 0), format!("{},{}", b.pid(p), b.iid(s)), vec![(x(p, s), 1.0)], Sense::Eq, 0.0)?;
        }
    }
    for p in 0..np {
        for &s in der.manual[p].iter().filter(|&&i| der.instances[i].kind == Kind::Shift) {
            b.con(f(13, 0), format!("{},{}", b.pid(p), b.iid(s)), vec![(x(p, s), 1.0)], Sense::Eq, 1.0)?;
        }
    }
    for p in (0..np).filter(|&p| der.planned_manually[p]) {
        for &s in der.shifts.iter().filter(|s| !der.manual[p].contains(s)) {
            b.con(f(14, 0), format!("{},{}", b.pid(p), b.iid(s)), vec![(x(p, s), 1.0)], Sense::Eq, 0.0)?;
        }
    }
    for part in 1..=4 {
        for p in 0..np {
            for &(a, c) in der.conflicts.hard.iter().filter(|&&(a, c)| rest_part(der, a, c) == part) {
                let subject = format!("{},{},{}", b.pid(p), b.iid(a), b.iid(c));
                b.con(f(15, part), subject, vec![(x(p, a), 1.0), (x(p, c), 1.0)], Sense::Le, 1.0)?;
            }
        }
    }
    let n_soft = der.conflicts.soft.len();
    for part in 1..=4 {
        for p in 0..np {
            for (k, sc) in der.conflicts.soft.iter().enumerate() {
                if rest_part(der, sc.first, sc.second) != part {
                    continue;
                }
                let subject = format!("{},{},{}", b.pid(p), b.iid(sc.first), b.iid(sc.second));
                let terms = vec![(x(p, sc.first), 1.0), (x(p, sc.second), 1.0), (vio_rest[p * n_soft + k], -1.0)];
                b.con(f(16, part), subject, terms, Sense::Le, 1.0)?;
            }
        }
    }
    let in_period = |t: i64| t >= 1 && t <= t_days;
    let day_label = |t: i64| inst.period.date_of(t).format("%Y-%m-%d").to_string();
    for (part, kind) in [(1, Kind::Duty), (2, Kind::Shift)] {
        for p in 0..np {
            for &t in der.absences[p].iter().filter(|&&t| in_period(t)) {
                let terms: Vec<_> = der.on_day(kind, t).iter().map(|&i| (x(p, i), 1.0)).collect();
                if !terms.is_empty() {
                    b.con(f(17, part), format!("{},{}", b.pid(p), day_label(t)), terms, Sense::Eq, 0.0)?;
                }
            }
        }
    }
    for (part, kind) in [(1, Kind::Duty), (2, Kind::Shift)] {
        for p in 0..np {
            for &i in der.impossible[p].iter().filter(|&&i| der.instances[i].kind == kind) {
                b.con(f(18, part), format!("{},{}", b.pid(p), b.iid(i)), vec![(x(p, i), 1.0)], Sense::Eq, 0.0)?;
            }
        }
    }
    for (number, offset, flags) in [(19u8, -1i64, &der.before_absence), (20, 1, &der.after_absence)] {
        for p in 0..np {
            for &t in &der.absences[p] {
                let day = t + offset;
                if !in_period(day) {
                    continue;
                }
                let terms: Vec<_> =
                    der.on_day(Kind::Duty, day).iter().filter(|&&d| flags[d]).map(|&d| (x(p, d), 1.0)).collect();
                if !terms.is_empty() {
                    b.con(f(number, 0), format!("{},{}", b.pid(p), day_label(t)), terms, Sense::Eq, 0.0)?;
                }
            }
        }
    }
    for (number, kind) in [(21u8, Kind::Duty), (22, Kind::Shift)] {
        for p in 0..np {
            for (bi, bl) in der.blocks.iter().enumerate().filter(|(_, bl)| bl.kind == kind) {
                for &m in &bl.members {
                    let subject = format!("{},{},{}", b.pid(p), bl.id, b.iid(m));
                    b.con(f(number, 0), subject, vec![(x(p, m), 1.0), (blk[p][bi], -1.0)], Sense::Eq, 0.0)?;
                }
            }
        }
    }
    // free days after blocks; days beyond the period are left to the next one
    for (part, block_kind, kind) in
        [(1, Kind::Duty, Kind::Duty), (2, Kind::Duty, Kind::Shift), (3, Kind::Shift, Kind::Duty), (4, Kind::Shift, Kind::Shift)]
    {
        for p in 0..np {
            for (bi, bl) in der.blocks.iter().enumerate().filter(|(_, bl)| bl.kind == block_kind) {
                for delta in 1..=i64::from(bl.free_days) {
                    let day = bl.end_day + delta;
                    if day > t_days {
                        break;
                    }
                    for &i in der.on_day(kind, day) {
                        let subject = format!("{},{},{}", b.pid(p), bl.id, b.iid(i));
                        b.con(f(23, part), subject, vec![(x(p, i), 1.0), (blk[p][bi], 1.0)], Sense::Le, 1.0)?;
                    }
                }
            }
        }
    }
    for (part, block_kind, kind) in
        [(1, Kind::Duty, Kind::Duty), (2, Kind::Duty, Kind::Shift), (3, Kind::Shift, Kind::Duty), (4, Kind::Shift, Kind::Shift)]
    {
        for p in 0..np {
            for (bi, bl) in der.blocks.iter().enumerate().filter(|(_, bl)| bl.kind == block_kind) {
                let active = match kind {
                    Kind::Duty => bl.no_extra_duties,
                    Kind::Shift => bl.no_extra_shifts,
                };
                if !active {
                    continue;
                }
                for day in bl.start_day..=bl.end_day.min(t_days) {
                    for &i in der.on_day(kind, day).iter().filter(|i| !bl.members.contains(i)) {
                        let subject = format!("{},{},{}", b.pid(p), bl.id, b.iid(i));
                        b.con(f(24, part), subject, vec![(x(p, i), 1.0), (blk[p][bi], 1.0)], Sense::Le, 1.0)?;
                    }
                }
            }
        }
    }
    for p in 0..np {
        for (bi, bl) in der.blocks.iter().enumerate() {
            if blk_cons[p][bi] == NONE {
                continue;
            }
            let subject = format!("{},{}", b.pid(p), bl.id);
            b.con(f(25, 1), subject, vec![(blk_cons[p][bi], 1.0), (blk[p][bi], -1.0)], Sense::Le, 0.0)?;
        }
    }
    for p in 0..np {
        for (bi, bl) in der.blocks.iter().enumerate() {
            if let (Some(BlockPrev::Current(prev)), true) = (&bl.prev, blk_cons[p][bi] != NONE) {
                let subject = format!("{},{}", b.pid(p), bl.id);
                b.con(f(25, 2), subject, vec![(blk_cons[p][bi], 1.0), (blk[p][*prev], -1.0)], Sense::Le, 0.0)?;
            }
        }
    }
    for p in 0..np {
        for (bi, bl) in der.blocks.iter().enumerate() {
            if let Some(BlockPrev::Past(ps)) = &bl.prev {
                if !ps.contains(&p) {
                    let subject = format!("{},{}", b.pid(p), bl.id);
                    b.con(f(25, 3), subject, vec![(blk_cons[p][bi], 1.0)], Sense::Eq, 0.0)?;
                }
            }
        }
    }
    for p in 0..np {
        for (j, win) in der.block_windows.iter().enumerate() {
            let mut terms: Vec<_> = win.blocks.iter().map(|&bi| (blk[p][bi], 1.0)).collect();
            terms.push((vio_cons_b[j], -1.0));
            let rhs = win.blocks.len() as f64 - 1.0;
            b.con(f(26, 0), format!("{},{}", b.pid(p), j + 1), terms, Sense::Le, rhs)?;
        }
    }
    for p in 0..np {
        for &d in &consec_duties {
            let subject = format!("{},{}", b.pid(p), b.iid(d));
            b.con(f(27, 1), subject, vec![(x_cons[&(p, d)], 1.0), (x(p, d), -1.0)], Sense::Le, 0.0)?;
        }
    }
    for p in 0..np {
        for &d in &consec_duties {
            if let Some(&prev) = der.prev_duty.get(&d) {
                let subject = format!("{},{}", b.pid(p), b.iid(d));
                b.con(f(27, 2), subject, vec![(x_cons[&(p, d)], 1.0), (x(p, prev), -1.0)], Sense::Le, 0.0)?;
            }
        }
    }
    for p in 0..np {
        for &d in &consec_duties {
            if let Some(&q) = der.carryover.prev_period_physician.get(&d) {
                if q != p {
                    let subject = format!("{},{}", b.pid(p), b.iid(d));
                    b.con(f(27, 3), subject, vec![(x_cons[&(p, d)], 1.0)], Sense::Eq, 0.0)?;
                }
            }
        }
    }

    let pool_sum = |p: usize, pi: usize| -> Vec<(usize, f64)> { der.pools[pi].duties.iter().map(|&d| (x(p, d), 1.0)).collect() };
    let pool_subject = |b: &Builder<'_>, p: usize, pi: usize| format!("{},{}", b.pid(p), der.pools[pi].id);
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(ex) = inst.pools[pi].exact {
            for &p in &pl.members {
                b.con(f(28, 0), pool_subject(&b, p, pi), pool_sum(p, pi), Sense::Eq, f64::from(ex))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(max) = inst.pools[pi].max_duties {
            for &p in &pl.members {
                b.con(f(29, 0), pool_subject(&b, p, pi), pool_sum(p, pi), Sense::Le, f64::from(max))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_max_duties {
            for &p in &pl.members {
                let mut terms = pool_sum(p, pi);
                terms.push((vio_max_d[&(p, pi)], -1.0));
                b.con(f(30, 0), pool_subject(&b, p, pi), terms, Sense::Le, f64::from(sb.value))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(min) = inst.pools[pi].min_duties {
            for &p in &pl.members {
                b.con(f(31, 0), pool_subject(&b, p, pi), pool_sum(p, pi), Sense::Ge, f64::from(min))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_min_duties {
            for &p in &pl.members {
                let mut terms = pool_sum(p, pi);
                terms.push((vio_min_d[&(p, pi)], 1.0));
                b.con(f(32, 0), pool_subject(&b, p, pi), terms, Sense::Ge, f64::from(sb.value))?;
            }
        }
    }
    let day_sum = |pi: usize, ds: &[usize]| -> Vec<(usize, f64)> {
        ds.iter().flat_map(|&d| der.pools[pi].members.iter().map(move |&p| (x(p, d), 1.0))).collect()
    };
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(max) = inst.pools[pi].max_per_day {
            for (&day, ds) in &pool_days[pi] {
                b.con(f(33, 0), format!("{},{}", pl.id, day_label(day)), day_sum(pi, ds), Sense::Le, f64::from(max))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        if let Some(sb) = inst.pools[pi].desired_max_per_day {
            for (&day, ds) in &pool_days[pi] {
                let mut terms = day_sum(pi, ds);
                terms.push((vio_max_phy[&(pi, day)], -1.0));
                b.con(f(34, 0), format!("{},{}", pl.id, day_label(day)), terms, Sense::Le, f64::from(sb.value))?;
            }
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        let Some(targets) = &pl.targets else { continue };
        for (k, &p) in pl.members.iter().enumerate() {
            let mut terms = pool_sum(p, pi);
            terms.push((vio_down[&(p, pi)], 1.0));
            b.con(f(35, 0), pool_subject(&b, p, pi), terms, Sense::Ge, targets[k].floor())?;
        }
    }
    for (pi, pl) in der.pools.iter().enumerate() {
        let Some(targets) = &pl.targets else { continue };
        for (k, &p) in pl.members.iter().enumerate() {
            let mut terms = pool_sum(p, pi);
            terms.push((vio_up[&(p, pi)], -1.0));
            b.con(f(36, 0), pool_subject(&b, p, pi), terms, Sense::Le, targets[k].ceil())?;
        }
    }

    if weekend_active {
        for p in 0..np {
            for wi in 0..weekends.len() {
                for &d in &der.weekend_duties[wi] {
                    let subject = format!("{},{},{}", b.pid(p), we_label(wi), b.iid(d));
                    b.con(f(37, 1), subject, vec![(we_att[p][wi], 1.0), (x(p, d), -1.0)], Sense::Ge, 0.0)?;
                }
            }
        }
        for p in 0..np {
            for wi in 0..weekends.len() {
                let mut terms = vec![(we_att[p][wi], 1.0)];
                terms.extend(der.weekend_duties[wi].iter().map(|&d| (x(p, d), -1.0)));
                b.con(f(37, 2), format!("{},{}", b.pid(p), we_label(wi)), terms, Sense::Le, 0.0)?;
            }
        }
        if let Some(cons) = wp.max_consecutive_weekends {
            let cons = cons as usize;
            let nw = weekends.len();
            for p in 0..np {
                for i in 0..nw.saturating_sub(cons) {
                    let terms = (i..=i + cons).map(|wi| (we_att[p][wi], 1.0)).collect();
                    b.con(f(38, 1), format!("{},{}", b.pid(p), we_label(i)), terms, Sense::Le, cons as f64)?;
                }
            }
            for p in 0..np {
                let past = (der.carryover.past_weekends[p] as usize).min(cons);
                if past == 0 {
                    continue;
                }
                let last = (cons - past + 1).min(nw);
                let terms = (0..last).map(|wi| (we_att[p][wi], 1.0)).collect();
                b.con(f(38, 2), b.pid(p).to_owned(), terms, Sense::Le, (cons - past) as f64)?;
            }
        }
        for p in 0..np {
            let pref = inst.physicians[p].weekend_preference;
            for wi in 0..weekends.len() {
                let subject = format!("{},{}", b.pid(p), we_label(wi));
                let sum = der.weekend_duties[wi].iter().map(|&d| (x(p, d), -1.0));
                match pref {
                    WeekendPreference::OneDuty => {
                        let mut terms = vec![(we_att[p][wi], 1.0), (vio_we_pref[&(p, wi)], 1.0)];
                        terms.extend(sum);
                        b.con(f(39, 0), subject, terms, Sense::Ge, 0.0)?;
                    }
                    WeekendPreference::MultipleDuties => {
                        let mut terms = vec![(we_att[p][wi], 2.0), (vio_we_pref[&(p, wi)], -1.0)];
                        terms.extend(sum);
                        b.con(f(40, 0), subject, terms, Sense::Le, 0.0)?;
                    }
                    WeekendPreference::None => {}
                }
            }
        }
        let month_sum = |p: usize, m: usize| -> Vec<(usize, f64)> {
            der.calendar.months[m].weekends.iter().map(|&wi| (we_att[p][wi], 1.0)).collect()
        };
        let month_subject = |b: &Builder<'_>, p: usize, m: usize| format!("{},{}", b.pid(p), der.calendar.months[m].label());
        if let Some(max) = wp.max_weekends {
            for p in 0..np {
                for &m in &months {
                    let rhs = month_rhs(m, f64::from(max));
                    b.con(f(41, 0), month_subject(&b, p, m), month_sum(p, m), Sense::Le, rhs as f64)?;
                }
            }
        }
        if wp.desired_max_weekends.is_some() {
            for p in 0..np {
                for &m in &months {
                    let (v, rhs) = vio_max_we[&(p, m)];
                    let mut terms = month_sum(p, m);
                    terms.push((v, -1.0));
                    b.con(f(42, 0), month_subject(&b, p, m), terms, Sense::Le, rhs as f64)?;
                }
            }
        }
        if let Some(min_free) = wp.min_free_weekends {
            for p in 0..np {
                for &m in &months {
                    let rhs = free_rhs(m, f64::from(min_free));
                    b.con(f(43, 0), month_subject(&b, p, m), month_sum(p, m), Sense::Le, rhs as f64)?;
                }
            }
        }
        if wp.desired_min_free_weekends.is_some() {
            for p in 0..np {
                for &m in &months {
                    let (v, rhs) = vio_free_we[&(p, m)];
                    let mut terms = month_sum(p, m);
                    terms.push((v, -1.0));
                    b.con(f(44, 0), month_subject(&b, p, m), terms, Sense::Le, rhs as f64)?;
                }
            }
        }
    }

    for (part, kind) in [(1, Kind::Duty), (2, Kind::Shift)] {
        for p in 0..np {
            for &i in der.carryover.hard[p].iter().filter(|&&i| der.instances[i].kind == kind) {
                b.con(f(45, part), format!("{},{}", b.pid(p), b.iid(i)), vec![(x(p, i), 1.0)], Sense::Eq, 0.0)?;
            }
        }
    }
    Ok(b.model)
}
