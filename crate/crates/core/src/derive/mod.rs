//! Everything the model builder and the validator need beyond the raw instance.

pub mod calendar;
pub mod carryover;
pub mod conflicts;
pub mod expand;
pub mod quali;
pub mod targets;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

pub use calendar::{compute_calendar, Calendar, Month, Weekend};
pub use carryover::{derive_carryover, CarryoverHit, CarryoverSets};
pub use conflicts::{derive_conflicts, resolve_rules, Conflicts, ResolvedRule, RestClass, RuleTable, SoftConflict};
pub use expand::expand_instances;
pub use quali::derive_qualification_sets;
pub use targets::compute_target_numbers;

use crate::model::{
    BlockId, Instance, InstanceId, Kind, PoolId, PreferenceLevel, PreferenceTarget, RosterInstance, TemplateId,
    Weekday,
};
use crate::par::ExecMode;

#[derive(Debug, thiserror::Error)]
pub enum DeriveError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate pool {0}: no member is available on any pool duty day")]
    DegeneratePool(PoolId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockPrev {
    /// Index of a block of the current period.
    Current(usize),
    /// Physicians of a previous-period block.
    Past(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedBlock {
    pub id: BlockId,
    pub kind: Kind,
    /// Instance indices, chronological.
    pub members: Vec<usize>,
    pub start_day: i64,
    pub end_day: i64,
    pub free_days: u32,
    pub no_extra_duties: bool,
    pub no_extra_shifts: bool,
    pub prev: Option<BlockPrev>,
    pub consecutive_weight: f64,
}

/// A run of chained shift blocks that should not all go to one physician.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockWindow {
    pub blocks: Vec<usize>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedPool {
    pub id: PoolId,
    pub duties: Vec<usize>,
    pub members: Vec<usize>,
    /// Fair targets aligned with `members`, for fair pools only.
    pub targets: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedSets {
    /// Number of days `T`.
    pub days: i64,
    /// Duties first, then shifts.
    pub instances: Vec<Instance>,
    pub duties: Vec<usize>,
    pub shifts: Vec<usize>,
    /// Position of each instance within its kind list.
    pub ordinal: Vec<usize>,
    pub mandatory: Vec<bool>,
    pub before_absence: Vec<bool>,
    pub after_absence: Vec<bool>,
    /// `[t]` for `t` in `1..=T`; index 0 stays empty.
    pub duties_on_day: Vec<Vec<usize>>,
    pub shifts_on_day: Vec<Vec<usize>>,
    pub calendar: Calendar,
    pub weekend_duties: Vec<Vec<usize>>,
    pub month_duties: Vec<Vec<usize>>,
    pub quali_hard: Vec<Vec<bool>>,
    pub quali_soft: Vec<Vec<bool>>,
    /// Ward membership `[physician][instance]`; always true for duties.
    pub in_ward: Vec<Vec<bool>>,
    pub rules: Vec<(TemplateId, TemplateId, ResolvedRule)>,
    pub conflicts: Conflicts,
    pub carryover: CarryoverSets,
    pub absences: Vec<BTreeSet<i64>>,
    pub impossible: Vec<BTreeSet<usize>>,
    pub manual: Vec<BTreeSet<usize>>,
    pub planned_manually: Vec<bool>,
    /// Preference selections per physician and instance (duty-specific and weekly).
    pub preferences: Vec<BTreeMap<usize, Vec<PreferenceLevel>>>,
    pub blocks: Vec<DerivedBlock>,
    pub block_windows: Vec<BlockWindow>,
    /// In-period predecessor of each consecutive duty.
    pub prev_duty: BTreeMap<usize, usize>,
    pub pools: Vec<DerivedPool>,
}

impl DerivedSets {
    pub fn index_of(&self, id: &InstanceId) -> Option<usize> {
        self.instances.iter().position(|x| &x.id == id)
    }

    pub fn rule_table(&self) -> RuleTable {
        self.rules.iter().map(|(a, b, r)| ((a.clone(), b.clone()), r.clone())).collect()
    }

    pub fn on_day(&self, kind: Kind, day: i64) -> &[usize] {
        let table = match kind {
            Kind::Duty => &self.duties_on_day,
            Kind::Shift => &self.shifts_on_day,
        };
        if day < 1 || day > self.days {
            &[]
        } else {
            &table[day as usize]
        }
    }
}

pub fn monday_of(date: NaiveDate) -> NaiveDate {
    date - Duration::days(i64::from(date.weekday().num_days_from_monday()))
}

/// Week number of `date` where week 0 is the Monday-based week of `start`.
pub fn week_of(start: NaiveDate, date: NaiveDate) -> i64 {
    (monday_of(date) - monday_of(start)).num_days().div_euclid(7)
}

pub fn derive(inst: &RosterInstance, mode: ExecMode) -> Result<DerivedSets, DeriveError> {
    let period = &inst.period;
    let days = period.days().max(0);
    let instances = expand_instances(inst)?;
    let by_id: HashMap<&InstanceId, usize> = instances.iter().enumerate().map(|(i, x)| (&x.id, i)).collect();
    let lookup = |id: &InstanceId, what: &str| {
        by_id.get(id).copied().ok_or_else(|| DeriveError::Config(format!("{what} references unknown instance {id}")))
    };
    let phys = |id| {
        inst.physician_index(id).ok_or_else(|| DeriveError::Config(format!("unknown physician {id}")))
    };
    let n_phys = inst.physicians.len();

    let mut duties = Vec::new();
    let mut shifts = Vec::new();
    let mut ordinal = Vec::with_capacity(instances.len());
    let mut duties_on_day = vec![Vec::new(); days as usize + 1];
    let mut shifts_on_day = vec![Vec::new(); days as usize + 1];
    let mut mandatory = Vec::with_capacity(instances.len());
    let mut before_absence = Vec::with_capacity(instances.len());
    let mut after_absence = Vec::with_capacity(instances.len());
    for (i, x) in instances.iter().enumerate() {
        match x.kind {
            Kind::Duty => {
                ordinal.push(duties.len());
                duties.push(i);
                duties_on_day[x.day as usize].push(i);
                let t = inst.duty_template(&x.template).expect("known duty template");
                mandatory.push(t.mandatory);
                before_absence.push(t.forbidden_before_absence);
                after_absence.push(t.forbidden_after_absence);
            }
            Kind::Shift => {
                ordinal.push(shifts.len());
                shifts.push(i);
                shifts_on_day[x.day as usize].push(i);
                mandatory.push(false);
                before_absence.push(false);
                after_absence.push(false);
            }
        }
    }

    let calendar = compute_calendar(period);
    let weekend_duties = calendar.weekends.iter().map(|w| calendar::weekend_duties(period, w, &instances)).collect();
    let month_duties = calendar
        .months
        .iter()
        .map(|m| {
            duties
                .iter()
                .copied()
                .filter(|&d| (instances[d].date.year(), instances[d].date.month()) == (m.year, m.month))
                .collect()
        })
        .collect();

    let (quali_hard, quali_soft) = derive_qualification_sets(inst, &instances);
    let mut in_ward = vec![vec![true; instances.len()]; n_phys];
    for (i, x) in instances.iter().enumerate() {
        if x.kind != Kind::Shift {
            continue;
        }
        let t = inst.shift_template(&x.template).expect("known shift template");
        if let Some(ward) = &t.ward_members {
            for (p, row) in in_ward.iter_mut().enumerate() {
                row[i] = ward.contains(&inst.physicians[p].id);
            }
        }
    }

    let templates: BTreeSet<TemplateId> = inst
        .duty_templates
        .iter()
        .map(|t| t.id.clone())
        .chain(inst.shift_templates.iter().map(|t| t.id.clone()))
        .collect();
    let table = resolve_rules(&inst.rest_rules, &templates, &inst.weights)?;
    let conflicts = derive_conflicts(&instances, &table, mode);
    let carryover = derive_carryover(inst, &instances, &table)?;
    let rules = inst
        .rest_rules
        .iter()
        .map(|r| (r.from.clone(), r.to.clone(), table[&(r.from.clone(), r.to.clone())].clone()))
        .collect();

    let absences: Vec<BTreeSet<i64>> =
        inst.physicians.iter().map(|p| p.absences.iter().map(|d| period.day_index(*d)).collect()).collect();
    let planned_manually = inst.physicians.iter().map(|p| p.planned_manually).collect();
    let mut manual = vec![BTreeSet::new(); n_phys];
    for a in &inst.pre_assignments {
        manual[phys(&a.physician)?].insert(lookup(&a.instance, "pre-assignment")?);
    }

    let mut impossible = vec![BTreeSet::new(); n_phys];
    let mut preferences = vec![BTreeMap::<usize, Vec<PreferenceLevel>>::new(); n_phys];
    for r in &inst.preferences {
        let p = phys(&r.physician)?;
        match &r.target {
            PreferenceTarget::Instance { instance } => {
                let i = lookup(instance, "preference")?;
                if r.level == PreferenceLevel::Impossible {
                    impossible[p].insert(i);
                } else {
                    preferences[p].entry(i).or_default().push(r.level);
                }
            }
            PreferenceTarget::Weekly { set, week } => {
                let ws = inst
                    .weekly_sets
                    .iter()
                    .find(|w| &w.id == set)
                    .ok_or_else(|| DeriveError::Config(format!("unknown weekly set {set}")))?;
                if r.level == PreferenceLevel::Impossible {
                    return Err(DeriveError::Config(format!("impossible is not allowed for weekly set {set}")));
                }
                for (i, x) in instances.iter().enumerate() {
                    if ws.templates.contains(&x.template) && week_of(period.start_date, x.date) == i64::from(*week) {
                        preferences[p].entry(i).or_default().push(r.level);
                    }
                }
            }
        }
    }

    let mut blocks = Vec::with_capacity(inst.blocks.len());
    for b in &inst.blocks {
        let mut members = b.members.iter().map(|m| lookup(m, "block")).collect::<Result<Vec<_>, _>>()?;
        if members.is_empty() {
            return Err(DeriveError::Config(format!("block {} has no members", b.id)));
        }
        if let Some(&bad) = members.iter().find(|&&m| instances[m].kind != b.kind) {
            return Err(DeriveError::Config(format!("block {} mixes kinds at {}", b.id, instances[bad].id)));
        }
        members.sort_by_key(|&m| (instances[m].start, m));
        members.dedup();
        let start_day = members.iter().map(|&m| instances[m].day).min().unwrap_or(1);
        let end_day = members.iter().map(|&m| instances[m].day).max().unwrap_or(1);
        blocks.push(DerivedBlock {
            id: b.id.clone(),
            kind: b.kind,
            members,
            start_day,
            end_day,
            free_days: b.free_days_after,
            no_extra_duties: !b.allow_extra_duties,
            no_extra_shifts: !b.allow_extra_shifts,
            prev: None,
            consecutive_weight: b.consecutive_weight.unwrap_or(inst.weights.consecutive_block),
        });
    }
    for (bi, b) in inst.blocks.iter().enumerate() {
        let Some(pred) = &b.predecessor else { continue };
        if b.kind != Kind::Shift {
            return Err(DeriveError::Config(format!("duty block {} cannot have a predecessor", b.id)));
        }
        if let Some(pi) = inst.blocks.iter().position(|x| &x.id == pred) {
            if inst.blocks[pi].kind != Kind::Shift || pi == bi {
                return Err(DeriveError::Config(format!("block {} has an invalid predecessor {pred}", b.id)));
            }
            blocks[bi].prev = Some(BlockPrev::Current(pi));
        } else if let Some(ps) = carryover.past_block_physicians.get(pred) {
            if !ps.is_empty() {
                blocks[bi].prev = Some(BlockPrev::Past(ps.clone()));
            }
        } else {
            return Err(DeriveError::Config(format!("block {} references unknown predecessor {pred}", b.id)));
        }
    }
    let mut block_windows = Vec::new();
    for (bi, b) in inst.blocks.iter().enumerate() {
        let Some(n) = b.max_consecutive_run else { continue };
        let mut chain = vec![bi];
        let mut cur = bi;
        while chain.len() <= n as usize {
            match &blocks[cur].prev {
                Some(BlockPrev::Current(p)) if !chain.contains(p) => {
                    chain.push(*p);
                    cur = *p;
                }
                _ => break,
            }
        }
        if chain.len() == n as usize + 1 {
            chain.reverse();
            block_windows.push(BlockWindow { blocks: chain, weight: inst.weights.max_consecutive_blocks });
        }
    }

    let mut prev_duty = BTreeMap::new();
    for t in inst.duty_templates.iter().filter(|t| t.desired_consecutive) {
        let mut last: Option<usize> = None;
        for &d in &duties {
            if instances[d].template != t.id {
                continue;
            }
            if let Some(l) = last {
                if instances[l].day + 1 == instances[d].day {
                    prev_duty.insert(d, l);
                }
            }
            last = Some(d);
        }
    }

    let mut pools = Vec::with_capacity(inst.pools.len());
    for pool in &inst.pools {
        let mut set = BTreeSet::new();
        for t in &pool.duties.templates {
            if inst.duty_template(t).is_none() {
                return Err(DeriveError::Config(format!("pool {} references unknown duty template {t}", pool.id)));
            }
            for &d in &duties {
                let x = &instances[d];
                if &x.template != t {
                    continue;
                }
                let day_ok = pool.duties.weekdays.is_empty()
                    || pool.duties.weekdays.contains(&Weekday::of(x.date))
                    || (pool.duties.include_holidays && period.is_holiday(x.date));
                if day_ok {
                    set.insert(d);
                }
            }
        }
        for id in &pool.duties.instances {
            let d = lookup(id, "pool")?;
            if instances[d].kind != Kind::Duty {
                return Err(DeriveError::Config(format!("pool {} lists shift {id}", pool.id)));
            }
            set.insert(d);
        }
        let duties_of_pool: Vec<usize> = set.into_iter().collect();
        let mut members = pool.physicians.iter().map(phys).collect::<Result<Vec<_>, _>>()?;
        members.sort_unstable();
        let targets = match pool.fair {
            Some(_) => {
                let input: Vec<(f64, &BTreeSet<i64>)> =
                    members.iter().map(|&p| (inst.physicians[p].employment_rate, &absences[p])).collect();
                Some(compute_target_numbers(&pool.id, &duties_of_pool, &instances, &input)?)
            }
            None => None,
        };
        pools.push(DerivedPool { id: pool.id.clone(), duties: duties_of_pool, members, targets });
    }

    Ok(DerivedSets {
        days,
        instances,
        duties,
        shifts,
        ordinal,
        mandatory,
        before_absence,
        after_absence,
        duties_on_day,
        shifts_on_day,
        calendar,
        weekend_duties,
        month_duties,
        quali_hard,
        quali_soft,
        in_ward,
        rules,
        conflicts,
        carryover,
        absences,
        impossible,
        manual,
        planned_manually,
        preferences,
        blocks,
        block_windows,
        prev_duty,
        pools,
    })
}
