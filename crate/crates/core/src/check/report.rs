use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::soft::{PoolTally, PreferenceCount};
use super::{recount_soft, validate_hard, CheckError};
use crate::derive::DerivedSets;
use crate::model::{RosterInstance, WeightConfig};
use crate::solver::RosterSolution;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solver_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub department: String,
    pub period: String,
    pub timings: Timings,
    pub hard_findings: usize,
    pub unassigned_duties: Vec<String>,
    /// Shifts below their desired minimum staffing.
    pub understaffed_wards: usize,
    /// Shifts below their hard minimum; zero for any valid roster.
    pub below_hard_minimum: usize,
    pub duty_preferences: BTreeMap<String, PreferenceCount>,
    pub weekly_preferences: BTreeMap<String, PreferenceCount>,
    pub weekend_preference_violations: i64,
    pub fairness: Vec<PoolTally>,
    pub consecutive_duties: usize,
    pub consecutive_blocks: usize,
    pub desired_rest_violations: BTreeMap<String, usize>,
    pub worked_weekends: BTreeMap<String, BTreeMap<String, usize>>,
    pub objective: f64,
    pub notes: Vec<String>,
}

const NOTES: [&str; 3] = [
    "understaffed counts shifts below the desired minimum; shifts below the hard minimum are listed separately",
    "fairness is reported as deviations from the target band of each fair pool",
    "consecutive assignments count adjacent pairs held by the same physician",
];

pub fn quality_report(
    roster: &RosterSolution,
    inst: &RosterInstance,
    der: &DerivedSets,
    w: &WeightConfig,
    timings: Timings,
) -> Result<QualityReport, CheckError> {
    let hard = validate_hard(roster, inst, der)?;
    let t = recount_soft(roster, inst, der, w)?;
    let held = super::Held::resolve(roster, inst, der)?;
    let unassigned = der
        .duties
        .iter()
        .filter(|&&d| held.by_instance[d].is_empty())
        .map(|&d| der.instances[d].id.to_string())
        .collect();
    Ok(QualityReport {
        department: inst.department.clone(),
        period: format!("{} to {}", inst.period.start_date, inst.period.end_date),
        timings,
        hard_findings: hard.len(),
        unassigned_duties: unassigned,
        understaffed_wards: t.below_desired_staff,
        below_hard_minimum: t.below_min_staff,
        duty_preferences: t.duty_preferences,
        weekly_preferences: t.weekly_preferences,
        weekend_preference_violations: t.weekend_preference_units,
        fairness: t.pools,
        consecutive_duties: t.consecutive_duties,
        consecutive_blocks: t.consecutive_blocks,
        desired_rest_violations: t.desired_rest,
        worked_weekends: t.worked_weekends,
        objective: t.objective,
        notes: NOTES.iter().map(|s| (*s).to_owned()).collect(),
    })
}

impl QualityReport {
    /// Flat numeric indicators in display order.
    pub fn indicators(&self) -> Vec<(String, f64)> {
        let mut v = vec![
            ("Solver time (s)".to_owned(), self.timings.solver_seconds),
            ("Total computation time (s)".to_owned(), self.timings.total_seconds),
            ("Hard violations".to_owned(), self.hard_findings as f64),
            ("Unassigned duties".to_owned(), self.unassigned_duties.len() as f64),
            ("Understaffed wards".to_owned(), self.understaffed_wards as f64),
            ("Below hard minimum".to_owned(), self.below_hard_minimum as f64),
        ];
        for (label, c) in &self.duty_preferences {
            v.push((format!("Number of {label} duties"), c.selected as f64));
            v.push((format!("{} duties assigned", capitalise(label)), c.assigned as f64));
        }
        for (label, c) in &self.weekly_preferences {
            v.push((format!("Number of {label} weekly selections"), c.selected as f64));
            v.push((format!("{} weekly selections assigned", capitalise(label)), c.assigned as f64));
        }
        v.push(("Weekend preference violations".to_owned(), self.weekend_preference_violations as f64));
        for p in &self.fairness {
            v.push((format!("Pool {}: below target", p.pool), p.below_floor as f64));
            v.push((format!("Pool {}: above target", p.pool), p.above_ceiling as f64));
            v.push((
                format!("Pool {}: desired bound breaches", p.pool),
                (p.desired_max_excess + p.desired_min_shortfall + p.desired_per_day_excess) as f64,
            ));
        }
        v.push(("Consecutive duty assignments".to_owned(), self.consecutive_duties as f64));
        v.push(("Consecutive block assignments".to_owned(), self.consecutive_blocks as f64));
        for (level, n) in &self.desired_rest_violations {
            v.push((format!("Violated desired rest times ({level})"), *n as f64));
        }
        let worked: usize = self.worked_weekends.values().flat_map(|m| m.values()).sum();
        v.push(("Worked weekends".to_owned(), worked as f64));
        v.push(("Objective".to_owned(), self.objective));
        v
    }
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

/// Fixed-width two-column table.
pub fn render_report(r: &QualityReport) -> String {
    let rows = r.indicators();
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(9);
    let mut out = String::new();
    let _ = writeln!(out, "{} ({})", r.department, r.period);
    let _ = writeln!(out, "{:<width$}  {:>12}", "Indicator", "Value");
    let _ = writeln!(out, "{}", "-".repeat(width + 14));
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {:>12}", number(v));
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorDelta {
    pub indicator: String,
    pub first: Option<f64>,
    pub second: Option<f64>,
    /// `second - first` where both exist.
    pub delta: Option<f64>,
}

pub fn compare_rosters(first: &QualityReport, second: &QualityReport) -> Vec<IndicatorDelta> {
    let a = first.indicators();
    let b: BTreeMap<String, f64> = second.indicators().into_iter().collect();
    let mut out: Vec<IndicatorDelta> = a
        .iter()
        .map(|(k, x)| {
            let y = b.get(k).copied();
            IndicatorDelta { indicator: k.clone(), first: Some(*x), second: y, delta: y.map(|y| y - x) }
        })
        .collect();
    for (k, y) in second.indicators() {
        if !a.iter().any(|(ka, _)| *ka == k) {
            out.push(IndicatorDelta { indicator: k, first: None, second: Some(y), delta: None });
        }
    }
    out
}
