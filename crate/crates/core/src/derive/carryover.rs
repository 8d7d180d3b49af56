//! Effects of the previous planning period on the current one.

use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::conflicts::{RestClass, RuleTable};
use super::expand::resolved_window;
use super::DeriveError;
use crate::model::{absolute_minute, BlockId, Instance, Kind, RosterInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarryoverHit {
    pub hours: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CarryoverSets {
    /// Per physician: instances ruled out by previous assignments or free days.
    pub hard: Vec<BTreeSet<usize>>,
    /// Per physician: instances that violate a desired rest after a previous
    /// assignment, with the heaviest level hit.
    pub soft: Vec<BTreeMap<usize, CarryoverHit>>,
    pub past_weekends: Vec<u32>,
    /// Physicians of previous-period blocks, by block id.
    pub past_block_physicians: BTreeMap<BlockId, Vec<usize>>,
    /// Physician of the last previous-period occurrence, per first duty of a
    /// consecutive template.
    pub prev_period_physician: BTreeMap<usize, usize>,
}

pub fn derive_carryover(
    inst: &RosterInstance,
    instances: &[Instance],
    rules: &RuleTable,
) -> Result<CarryoverSets, DeriveError> {
    let n = inst.physicians.len();
    let period = &inst.period;
    let mut sets = CarryoverSets {
        hard: vec![BTreeSet::new(); n],
        soft: vec![BTreeMap::new(); n],
        past_weekends: vec![0; n],
        ..Default::default()
    };
    let phys = |id| {
        inst.physician_index(id)
            .ok_or_else(|| DeriveError::Config(format!("carryover references unknown physician {id}")))
    };

    for a in &inst.carryover.assignments {
        let p = phys(&a.physician)?;
        let rec = inst.recurrence(&a.template).ok_or_else(|| {
            DeriveError::Config(format!("carryover references unknown template {}", a.template))
        })?;
        let w = a.times.unwrap_or_else(|| resolved_window(rec, period, a.date));
        let end = absolute_minute(period.start_date, a.date, w.end);
        for (i, b) in instances.iter().enumerate() {
            let Some(rule) = rules.get(&(a.template.clone(), b.template.clone())) else {
                continue;
            };
            match rule.classify(b.start - end) {
                RestClass::Ok => {}
                RestClass::Mandatory => {
                    sets.hard[p].insert(i);
                }
                RestClass::Desired(l) => {
                    let e = sets.soft[p].entry(i).or_insert(CarryoverHit { hours: l.hours, weight: l.weight });
                    if l.weight > e.weight {
                        *e = CarryoverHit { hours: l.hours, weight: l.weight };
                    }
                }
            }
        }
    }
    for p in 0..n {
        let hard = sets.hard[p].clone();
        sets.soft[p].retain(|i, _| !hard.contains(i));
    }

    for b in &inst.carryover.blocks {
        let members = b.physicians.iter().map(phys).collect::<Result<Vec<_>, _>>()?;
        for delta in 1..=i64::from(b.free_days_after) {
            let day = period.day_index(b.last_day + Duration::days(delta));
            for (i, x) in instances.iter().enumerate() {
                if x.day == day {
                    for &p in &members {
                        sets.hard[p].insert(i);
                        sets.soft[p].remove(&i);
                    }
                }
            }
        }
        sets.past_block_physicians.insert(b.id.clone(), members);
    }

    for (id, &count) in &inst.carryover.past_weekends {
        sets.past_weekends[phys(id)?] = count;
    }

    let eve = period.start_date - Duration::days(1);
    for (i, d) in instances.iter().enumerate() {
        if d.kind != Kind::Duty || d.day != 1 {
            continue;
        }
        let consecutive = inst.duty_template(&d.template).is_some_and(|t| t.desired_consecutive);
        if !consecutive {
            continue;
        }
        if let Some(a) = inst.carryover.assignments.iter().find(|a| a.template == d.template && a.date == eve) {
            sets.prev_period_physician.insert(i, phys(&a.physician)?);
        }
    }
    Ok(sets)
}
