//! Conflicting instance pairs from mandatory and desired rest times.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::DeriveError;
use crate::model::{hours_to_minutes, Instance, RestRule, TemplateId, WeightConfig};
use crate::par::{map_range, ExecMode};

/// A desired rest level in minutes with its penalty weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestLevel {
    pub minutes: i64,
    pub hours: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRule {
    pub mandatory: i64,
    /// Ascending by duration.
    pub levels: Vec<RestLevel>,
}

impl ResolvedRule {
    /// Longest rest this rule can ask for.
    pub fn reach(&self) -> i64 {
        self.levels.last().map_or(self.mandatory, |l| l.minutes.max(self.mandatory))
    }
}

/// How a gap between two assignments relates to a rule.
#[derive(Clone, Debug, PartialEq)]
pub enum RestClass<'a> {
    Ok,
    Mandatory,
    Desired(&'a RestLevel),
}

impl ResolvedRule {
    pub fn classify(&self, gap: i64) -> RestClass<'_> {
        if gap < self.mandatory {
            return RestClass::Mandatory;
        }
        match self.levels.iter().find(|l| gap < l.minutes) {
            Some(l) => RestClass::Desired(l),
            None => RestClass::Ok,
        }
    }
}

pub type RuleTable = HashMap<(TemplateId, TemplateId), ResolvedRule>;

pub fn resolve_rules(
    rules: &[RestRule],
    templates: &BTreeSet<TemplateId>,
    weights: &WeightConfig,
) -> Result<RuleTable, DeriveError> {
    let mut table = HashMap::new();
    for r in rules {
        for t in [&r.from, &r.to] {
            if !templates.contains(t) {
                return Err(DeriveError::Config(format!(
                    "rest rule {} -> {} references unknown template {t}",
                    r.from, r.to
                )));
            }
        }
        let mut levels: Vec<_> = r.desired.iter().collect();
        levels.sort_by(|a, b| a.hours.total_cmp(&b.hours));
        let n = levels.len();
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(rank, l)| RestLevel {
                minutes: hours_to_minutes(l.hours),
                hours: l.hours,
                weight: l.weight.unwrap_or_else(|| weights.rest_ladder(rank, n)),
            })
            .collect();
        let resolved = ResolvedRule { mandatory: hours_to_minutes(r.mandatory_hours), levels };
        if table.insert((r.from.clone(), r.to.clone()), resolved).is_some() {
            return Err(DeriveError::Config(format!("duplicate rest rule {} -> {}", r.from, r.to)));
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftConflict {
    pub first: usize,
    pub second: usize,
    pub hours: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conflicts {
    /// Pairs that must not share a physician (instance indices, earlier first).
    pub hard: Vec<(usize, usize)>,
    pub soft: Vec<SoftConflict>,
}

/// Instance indices in the canonical pair order: start, then end, then id.
pub fn chronological(instances: &[Instance]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&instances[a], &instances[b]);
        (x.start, x.end, &x.id).cmp(&(y.start, y.end, &y.id))
    });
    order
}

enum Pair {
    Hard(usize, usize),
    Soft(SoftConflict),
}

pub fn derive_conflicts(instances: &[Instance], rules: &RuleTable, mode: ExecMode) -> Conflicts {
    if rules.is_empty() {
        return Conflicts::default();
    }
    let order = chronological(instances);
    let reach = rules.values().map(ResolvedRule::reach).max().unwrap_or(0);
    let per_first = map_range(mode, order.len(), |i| {
        let a = &instances[order[i]];
        let mut out = Vec::new();
        for &bj in &order[i + 1..] {
            let b = &instances[bj];
            let gap = b.start - a.end;
            if gap >= reach {
                break;
            }
            let Some(rule) = rules.get(&(a.template.clone(), b.template.clone())) else {
                continue;
            };
            match rule.classify(gap) {
                RestClass::Ok => {}
                RestClass::Mandatory => out.push(Pair::Hard(order[i], bj)),
                RestClass::Desired(l) => out.push(Pair::Soft(SoftConflict {
                    first: order[i],
                    second: bj,
                    hours: l.hours,
                    weight: l.weight,
                })),
            }
        }
        out
    });
    let mut c = Conflicts::default();
    for pair in per_first.into_iter().flatten() {
        match pair {
            Pair::Hard(a, b) => c.hard.push((a, b)),
            Pair::Soft(s) => c.soft.push(s),
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::model::{DesiredRest, InstanceId, Kind};

    fn inst(tpl: &str, day: i64, start_h: i64, len_h: i64) -> Instance {
        let date = NaiveDate::from_ymd_opt(2025, 3, 1).unwrap() + chrono::Duration::days(day - 1);
        let t = TemplateId::new(tpl);
        Instance {
            id: InstanceId::of(&t, date),
            kind: Kind::Duty,
            template: t,
            date,
            day,
            start: (day - 1) * 1440 + start_h * 60,
            end: (day - 1) * 1440 + (start_h + len_h) * 60,
        }
    }

    fn table(rule: RestRule) -> RuleTable {
        let templates = [rule.from.clone(), rule.to.clone()].into_iter().collect();
        resolve_rules(&[rule], &templates, &WeightConfig::default()).unwrap()
    }

    fn night_rule() -> RestRule {
        RestRule {
            from: "N".into(),
            to: "N".into(),
            mandatory_hours: 24.0,
            desired: vec![DesiredRest { hours: 48.0, weight: None }, DesiredRest { hours: 72.0, weight: None }],
        }
    }

    #[test]
    fn consecutive_nights_conflict() {
        // 20:00-08:00 on day 1 and day 2: gap 12 h < 24 h.
        let xs = vec![inst("N", 1, 20, 12), inst("N", 2, 20, 12)];
        let c = derive_conflicts(&xs, &table(night_rule()), ExecMode::Sequential);
        assert_eq!(c.hard, vec![(0, 1)]);
        assert!(c.soft.is_empty());
    }

    #[test]
    fn two_days_apart_is_soft_at_48h() {
        // day 1 ends day 2 08:00, day 3 starts 20:00: gap 36 h.
        let xs = vec![inst("N", 1, 20, 12), inst("N", 3, 20, 12)];
        let c = derive_conflicts(&xs, &table(night_rule()), ExecMode::Sequential);
        assert!(c.hard.is_empty());
        assert_eq!(c.soft.len(), 1);
        assert_eq!(c.soft[0].hours, 48.0);
        assert_eq!(c.soft[0].weight, 20.0);
        // three days apart: gap 60 h hits only the 72 h level
        let xs = vec![inst("N", 1, 20, 12), inst("N", 4, 20, 12)];
        let c = derive_conflicts(&xs, &table(night_rule()), ExecMode::Sequential);
        assert_eq!(c.soft[0].hours, 72.0);
        assert_eq!(c.soft[0].weight, 10.0);
    }

    #[test]
    fn negative_rest_allows_overlap() {
        let rule = RestRule { from: "A".into(), to: "B".into(), mandatory_hours: -2.0, desired: vec![] };
        // A 08:00-16:00, B 15:00-23:00: overlap 1 h, gap -60 min >= -120.
        let xs = vec![inst("A", 1, 8, 8), inst("B", 1, 15, 8)];
        let c = derive_conflicts(&xs, &table(rule.clone()), ExecMode::Sequential);
        assert!(c.hard.is_empty());
        // overlap 3 h is too much
        let xs = vec![inst("A", 1, 8, 8), inst("B", 1, 13, 8)];
        assert_eq!(derive_conflicts(&xs, &table(rule), ExecMode::Sequential).hard, vec![(0, 1)]);
    }

    #[test]
    fn unknown_template_is_config_error() {
        let rule = night_rule();
        let templates = BTreeSet::from([TemplateId::new("X")]);
        assert!(resolve_rules(&[rule], &templates, &WeightConfig::default()).is_err());
    }
}
