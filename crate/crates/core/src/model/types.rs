use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::ids::*;
use super::time::{ClockTime, TimeWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];
    pub const WORKDAYS: [Weekday; 5] =
        [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri];
    pub const WEEKEND: [Weekday; 2] = [Weekday::Sat, Weekday::Sun];

    pub fn of(date: NaiveDate) -> Self {
        Self::ALL[date.weekday().num_days_from_monday() as usize]
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Sat | Weekday::Sun)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Duty,
    Shift,
}

/// How a template treats public holidays (or days before them).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolidayRule {
    /// The weekday set alone decides.
    #[default]
    Ignore,
    /// Occurs on such days in addition to its weekdays.
    Also,
    /// Occurs on such days only.
    Only,
    /// Never occurs on such days.
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanningPeriod {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    #[serde(default)]
    pub public_holidays: BTreeSet<NaiveDate>,
    pub weekend_threshold: ClockTime,
}

impl PlanningPeriod {
    pub fn days(&self) -> i64 {
        (self.end_date - self.start_date).num_days() + 1
    }

    /// 1-based day index; days of the previous period map to 0 and below.
    pub fn day_index(&self, date: NaiveDate) -> i64 {
        (date - self.start_date).num_days() + 1
    }

    pub fn date_of(&self, day: i64) -> NaiveDate {
        self.start_date + chrono::Duration::days(day - 1)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.start_date && date <= self.end_date
    }

    pub fn is_holiday(&self, date: NaiveDate) -> bool {
        self.public_holidays.contains(&date)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekendPreference {
    #[default]
    None,
    OneDuty,
    MultipleDuties,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physician {
    pub id: PhysicianId,
    pub name: String,
    pub employment_rate: f64,
    #[serde(default)]
    pub qualifications: BTreeSet<QualificationId>,
    #[serde(default)]
    pub absences: BTreeSet<NaiveDate>,
    #[serde(default)]
    pub planned_manually: bool,
    #[serde(default)]
    pub weekend_preference: WeekendPreference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qualification {
    pub id: QualificationId,
    pub label: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualificationRules {
    #[serde(default)]
    pub required: BTreeSet<QualificationId>,
    #[serde(default)]
    pub excluded: BTreeSet<QualificationId>,
    #[serde(default)]
    pub desired: BTreeSet<QualificationId>,
    #[serde(default)]
    pub undesired: BTreeSet<QualificationId>,
}

impl QualificationRules {
    pub fn hard_ok(&self, quals: &BTreeSet<QualificationId>) -> bool {
        self.required.is_subset(quals) && self.excluded.is_disjoint(quals)
    }

    pub fn soft_ok(&self, quals: &BTreeSet<QualificationId>) -> bool {
        self.hard_ok(quals) && self.desired.is_subset(quals) && self.undesired.is_disjoint(quals)
    }
}

/// Alternate working times for holidays and the days around them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidayTimes {
    pub times: TimeWindow,
    #[serde(default = "yes")]
    pub on_holiday: bool,
    #[serde(default)]
    pub before_holiday: bool,
    #[serde(default)]
    pub after_holiday: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recurrence {
    pub weekdays: BTreeSet<Weekday>,
    #[serde(default)]
    pub holidays: HolidayRule,
    #[serde(default)]
    pub pre_holidays: HolidayRule,
    pub times: TimeWindow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holiday_times: Option<HolidayTimes>,
}

impl Recurrence {
    pub fn on(weekdays: &[Weekday], times: TimeWindow) -> Self {
        Self {
            weekdays: weekdays.iter().copied().collect(),
            holidays: HolidayRule::Ignore,
            pre_holidays: HolidayRule::Ignore,
            times,
            holiday_times: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DutyTemplate {
    pub id: TemplateId,
    pub label: String,
    pub recurrence: Recurrence,
    #[serde(default)]
    pub mandatory: bool,
    #[serde(default)]
    pub forbidden_before_absence: bool,
    #[serde(default)]
    pub forbidden_after_absence: bool,
    #[serde(default)]
    pub qualifications: QualificationRules,
    /// Assign consecutive occurrences to the same physician where possible.
    #[serde(default)]
    pub desired_consecutive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consecutive_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftTemplate {
    pub id: TemplateId,
    pub label: String,
    pub recurrence: Recurrence,
    /// Physicians of the ward; `None` admits every physician.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ward_members: Option<BTreeSet<PhysicianId>>,
    pub min_staff: u32,
    pub desired_min_staff: u32,
    pub max_staff: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_weight: Option<f64>,
    /// Signed reward per physician above the desired level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<f64>,
    #[serde(default)]
    pub qualifications: QualificationRules,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreAssignment {
    pub physician: PhysicianId,
    pub instance: InstanceId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDefinition {
    pub id: BlockId,
    pub kind: Kind,
    pub members: Vec<InstanceId>,
    #[serde(default)]
    pub allow_extra_duties: bool,
    #[serde(default)]
    pub allow_extra_shifts: bool,
    #[serde(default)]
    pub free_days_after: u32,
    /// Shift block (current or previous period) whose physicians should continue here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predecessor: Option<BlockId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consecutive_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_consecutive_run: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesiredRest {
    pub hours: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestRule {
    pub from: TemplateId,
    pub to: TemplateId,
    pub mandatory_hours: f64,
    #[serde(default)]
    pub desired: Vec<DesiredRest>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftBound {
    pub value: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl SoftBound {
    pub fn new(value: u32) -> Self {
        Self { value, weight: None }
    }
}

/// Duty instances selected by template, optionally filtered by weekday.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DutySelection {
    #[serde(default)]
    pub templates: Vec<TemplateId>,
    /// Restrict template occurrences to these weekdays (empty keeps all).
    #[serde(default)]
    pub weekdays: BTreeSet<Weekday>,
    /// With a weekday filter, keep holiday occurrences regardless of weekday.
    #[serde(default)]
    pub include_holidays: bool,
    #[serde(default)]
    pub instances: Vec<InstanceId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fairness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub id: PoolId,
    pub label: String,
    pub physicians: BTreeSet<PhysicianId>,
    pub duties: DutySelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_duties: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_max_duties: Option<SoftBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_duties: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_min_duties: Option<SoftBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_per_day: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_max_per_day: Option<SoftBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fair: Option<Fairness>,
}

impl Pool {
    pub fn new(id: &str, physicians: BTreeSet<PhysicianId>, duties: DutySelection) -> Self {
        Self {
            id: PoolId::new(id),
            label: id.to_owned(),
            physicians,
            duties,
            exact: None,
            max_duties: None,
            desired_max_duties: None,
            min_duties: None,
            desired_min_duties: None,
            max_per_day: None,
            desired_max_per_day: None,
            fair: None,
        }
    }
}

/// A named group of templates that physicians rate week by week.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeeklySet {
    pub id: WeeklySetId,
    pub label: String,
    pub templates: Vec<TemplateId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceLevel {
    StronglyDesired,
    Desired,
    Indifferent,
    Undesired,
    Impossible,
}

impl PreferenceLevel {
    pub fn label(self) -> &'static str {
        match self {
            PreferenceLevel::StronglyDesired => "strongly desired",
            PreferenceLevel::Desired => "desired",
            PreferenceLevel::Indifferent => "indifferent",
            PreferenceLevel::Undesired => "undesired",
            PreferenceLevel::Impossible => "impossible",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PreferenceTarget {
    Instance { instance: InstanceId },
    /// Week 0 is the Monday-based week containing the period start.
    Weekly { set: WeeklySetId, week: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceRecord {
    pub physician: PhysicianId,
    pub target: PreferenceTarget,
    pub level: PreferenceLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapPer {
    Month,
    Period,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapDays {
    #[default]
    All,
    WeekendsAndHolidays,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapTargets {
    Any,
    Instance,
    Weekly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapLimit {
    Count(u32),
    /// Share of the days in scope, rounded down.
    FractionOfDays(f64),
}

/// Upper bound on how often one physician may select a preference level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceCap {
    pub level: PreferenceLevel,
    pub per: CapPer,
    #[serde(default)]
    pub days: CapDays,
    #[serde(default = "any_target")]
    pub targets: CapTargets,
    pub limit: CapLimit,
}

fn any_target() -> CapTargets {
    CapTargets::Any
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeekendPolicy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weekends: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_max_weekends: Option<SoftBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_free_weekends: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_min_free_weekends: Option<SoftBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_consecutive_weekends: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PastAssignment {
    pub physician: PhysicianId,
    pub template: TemplateId,
    pub date: NaiveDate,
    /// Working times when they differ from the template's regular times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PastBlock {
    pub id: BlockId,
    pub kind: Kind,
    pub physicians: Vec<PhysicianId>,
    pub last_day: NaiveDate,
    #[serde(default)]
    pub free_days_after: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CarryoverState {
    #[serde(default)]
    pub assignments: Vec<PastAssignment>,
    #[serde(default)]
    pub blocks: Vec<PastBlock>,
    /// Consecutive worked weekends at the end of the previous period.
    #[serde(default)]
    pub past_weekends: BTreeMap<PhysicianId, u32>,
}

impl CarryoverState {
    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty() && self.blocks.is_empty() && self.past_weekends.is_empty()
    }
}

pub fn window(start: ClockTime, end: ClockTime) -> TimeWindow {
    TimeWindow::new(start, end)
}
