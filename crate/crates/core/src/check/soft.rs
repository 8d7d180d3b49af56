use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hard::weekends_worked;
use super::{CheckError, Held};
use crate::derive::conflicts::chronological;
use crate::derive::{BlockPrev, DerivedSets, RestClass};
use crate::model::{Kind, PreferenceTarget, RosterInstance, WeekendPreference, WeightConfig};
use crate::rounding::round_half_up;
use crate::solver::RosterSolution;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreferenceCount {
    /// Selections made.
    pub selected: usize,
    /// Selections the roster holds.
    pub assigned: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoolTally {
    pub pool: String,
    pub below_floor: usize,
    pub above_ceiling: usize,
    /// Summed shortfall below the floor of the target.
    pub down_units: i64,
    pub up_units: i64,
    pub desired_max_excess: i64,
    pub desired_min_shortfall: i64,
    pub desired_per_day_excess: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SoftTally {
    pub assignments: usize,
    pub unassigned_duties: usize,
    pub covered_optional_duties: usize,
    pub soft_qualification_misses: usize,
    pub carryover_rest_hits: usize,
    /// Keyed by preference level label.
    pub duty_preferences: BTreeMap<String, PreferenceCount>,
    pub weekly_preferences: BTreeMap<String, PreferenceCount>,
    pub below_desired_staff: usize,
    pub below_min_staff: usize,
    pub desired_staff_units: i64,
    pub surplus_staff_units: i64,
    pub consecutive_duties: usize,
    pub consecutive_blocks: usize,
    /// Desired-rest violations keyed by the level in hours, e.g. `"48h"`.
    pub desired_rest: BTreeMap<String, usize>,
    pub block_run_violations: usize,
    pub weekend_preference_units: i64,
    pub max_weekend_excess: i64,
    pub free_weekend_shortfall: i64,
    /// Worked weekends per physician and month label.
    pub worked_weekends: BTreeMap<String, BTreeMap<String, usize>>,
    pub pools: Vec<PoolTally>,
    pub objective: f64,
}

fn level_key(hours: f64) -> String {
    format!("{hours}h")
}

/// Recounts every soft quantity of `roster` and the objective it earns.
pub fn recount_soft(
    roster: &RosterSolution,
    inst: &RosterInstance,
    der: &DerivedSets,
    w: &WeightConfig,
) -> Result<SoftTally, CheckError> {
    let held = Held::resolve(roster, inst, der)?;
    let np = inst.physicians.len();
    let mut t = SoftTally::default();
    let mut obj = 0.0;

    for p in 0..np {
        let ph = &inst.physicians[p];
        for &i in &held.by_physician[p] {
            t.assignments += 1;
            let x = &der.instances[i];
            if x.kind == Kind::Duty && !inst.duty_template(&x.template).expect("duty template").mandatory {
                obj += w.coverage;
                t.covered_optional_duties += 1;
            }
            if !inst.qualification_rules(&x.template).expect("known template").soft_ok(&ph.qualifications) {
                obj -= w.soft_qualification;
                t.soft_qualification_misses += 1;
            }
            if let Some(hit) = der.carryover.soft[p].get(&i) {
                obj -= hit.weight;
                t.carryover_rest_hits += 1;
            }
            for &level in der.preferences[p].get(&i).map(Vec::as_slice).unwrap_or_default() {
                obj += w.preference(level);
            }
        }
    }
    t.unassigned_duties = der.duties.iter().filter(|&&d| held.by_instance[d].is_empty()).count();

    for r in &inst.preferences {
        let Some(p) = inst.physician_index(&r.physician) else { continue };
        let (map, targets): (_, Vec<usize>) = match &r.target {
            PreferenceTarget::Instance { instance } => {
                (&mut t.duty_preferences, der.index_of(instance).into_iter().collect())
            }
            PreferenceTarget::Weekly { .. } => {
                let ts = (0..der.instances.len()).filter(|&i| weekly_match(inst, der, &r.target, i)).collect();
                (&mut t.weekly_preferences, ts)
            }
        };
        let held_any = targets.iter().any(|&i| held.holds(p, i));
        let e = map.entry(r.level.label().to_owned()).or_default();
        e.selected += 1;
        if held_any {
            e.assigned += 1;
        }
    }

    for &s in &der.shifts {
        let tpl = inst.shift_template(&der.instances[s].template).expect("shift template");
        let k = held.by_instance[s].len() as i64;
        let (min, des) = (i64::from(tpl.min_staff), i64::from(tpl.desired_min_staff));
        if k < des {
            t.below_desired_staff += 1;
        }
        if k < min {
            t.below_min_staff += 1;
        }
        let surplus = (k - min).max(0);
        let y_des = surplus.min(des - min);
        let y_max = surplus - y_des;
        t.desired_staff_units += y_des;
        t.surplus_staff_units += y_max;
        obj += tpl.desired_weight.unwrap_or(w.desired_staffing) * y_des as f64;
        obj += tpl.max_weight.unwrap_or(w.max_staffing) * y_max as f64;
    }

    for p in 0..np {
        for (&d, &prev) in &der.prev_duty {
            if held.holds(p, d) && held.holds(p, prev) {
                t.consecutive_duties += 1;
                obj += consecutive_weight(inst, der, w, d);
            }
        }
        for (&d, &q) in &der.carryover.prev_period_physician {
            if q == p && held.holds(p, d) {
                t.consecutive_duties += 1;
                obj += consecutive_weight(inst, der, w, d);
            }
        }
        for bl in &der.blocks {
            if !held.holds_all(p, &bl.members) {
                continue;
            }
            let follows = match &bl.prev {
                Some(BlockPrev::Current(b)) => held.holds_all(p, &der.blocks[*b].members),
                Some(BlockPrev::Past(ps)) => ps.contains(&p),
                None => false,
            };
            if bl.kind == Kind::Shift && follows {
                t.consecutive_blocks += 1;
                obj += bl.consecutive_weight;
            }
        }
    }
    for win in &der.block_windows {
        if (0..np).any(|p| win.blocks.iter().all(|&b| held.holds_all(p, &der.blocks[b].members))) {
            t.block_run_violations += 1;
            obj -= win.weight;
        }
    }

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
                if let RestClass::Desired(level) = rule.classify(xb.start - xa.end) {
                    *t.desired_rest.entry(level_key(level.hours)).or_default() += 1;
                    obj -= level.weight;
                }
            }
        }
    }

    let wp = &inst.weekend_policy;
    let worked = weekends_worked(&held, der);
    let pref_weight = wp.preference_weight.unwrap_or(w.weekend_preference);
    for p in 0..np {
        for ds in &der.weekend_duties {
            let n = ds.iter().filter(|&&d| held.holds(p, d)).count() as i64;
            let vio = match inst.physicians[p].weekend_preference {
                WeekendPreference::OneDuty => (n - 1).max(0),
                WeekendPreference::MultipleDuties => i64::from(n == 1),
                WeekendPreference::None => 0,
            };
            t.weekend_preference_units += vio;
            obj -= pref_weight * vio as f64;
        }
    }
    for m in der.calendar.months.iter().filter(|m| !m.weekends.is_empty()) {
        for p in 0..np {
            let n = m.weekends.iter().filter(|&&wk| worked[p][wk]).count();
            t.worked_weekends.entry(inst.physicians[p].id.to_string()).or_default().insert(m.label(), n);
            let n = n as i64;
            if let Some(sb) = wp.desired_max_weekends {
                let vio = (n - round_half_up(f64::from(sb.value) * m.we_factor)).max(0);
                t.max_weekend_excess += vio;
                obj -= sb.weight.unwrap_or(w.max_weekends) * vio as f64;
            }
            if let Some(sb) = wp.desired_min_free_weekends {
                let cap = round_half_up(m.weekends.len() as f64 - f64::from(sb.value) * m.we_factor);
                let vio = (n - cap).max(0);
                t.free_weekend_shortfall += vio;
                obj -= sb.weight.unwrap_or(w.free_weekends) * vio as f64;
            }
        }
    }

    for (pi, pl) in der.pools.iter().enumerate() {
        let cfg = &inst.pools[pi];
        let mut pt = PoolTally { pool: pl.id.to_string(), ..Default::default() };
        for (k, &p) in pl.members.iter().enumerate() {
            let n = pl.duties.iter().filter(|&&d| held.holds(p, d)).count() as i64;
            if let Some(sb) = cfg.desired_max_duties {
                let vio = (n - i64::from(sb.value)).max(0);
                pt.desired_max_excess += vio;
                obj -= sb.weight.unwrap_or(w.pool_max_duties) * vio as f64;
            }
            if let Some(sb) = cfg.desired_min_duties {
                let vio = (i64::from(sb.value) - n).max(0);
                pt.desired_min_shortfall += vio;
                obj -= sb.weight.unwrap_or(w.pool_min_duties) * vio as f64;
            }
            if let (Some(targets), Some(fair)) = (&pl.targets, cfg.fair) {
                let down = (targets[k].floor() as i64 - n).max(0);
                let up = (n - targets[k].ceil() as i64).max(0);
                pt.below_floor += usize::from(down > 0);
                pt.above_ceiling += usize::from(up > 0);
                pt.down_units += down;
                pt.up_units += up;
                obj -= fair.down_weight.unwrap_or(w.fair_down) * down as f64;
                obj -= fair.up_weight.unwrap_or(w.fair_up) * up as f64;
            }
        }
        if let Some(sb) = cfg.desired_max_per_day {
            let mut per_day: BTreeMap<i64, i64> = BTreeMap::new();
            for &d in &pl.duties {
                let n = pl.members.iter().filter(|&&p| held.holds(p, d)).count() as i64;
                *per_day.entry(der.instances[d].day).or_default() += n;
            }
            for n in per_day.into_values() {
                let vio = (n - i64::from(sb.value)).max(0);
                pt.desired_per_day_excess += vio;
                obj -= sb.weight.unwrap_or(w.pool_max_per_day) * vio as f64;
            }
        }
        t.pools.push(pt);
    }
    t.objective = obj;
    Ok(t)
}

fn consecutive_weight(inst: &RosterInstance, der: &DerivedSets, w: &WeightConfig, d: usize) -> f64 {
    let t = inst.duty_template(&der.instances[d].template).expect("duty template");
    t.consecutive_weight.unwrap_or(w.consecutive_duty)
}

fn weekly_match(inst: &RosterInstance, der: &DerivedSets, target: &PreferenceTarget, i: usize) -> bool {
    let PreferenceTarget::Weekly { set, week } = target else { return false };
    let x = &der.instances[i];
    inst.weekly_sets.iter().any(|ws| &ws.id == set && ws.templates.contains(&x.template))
        && crate::derive::week_of(inst.period.start_date, x.date) == i64::from(*week)
}
