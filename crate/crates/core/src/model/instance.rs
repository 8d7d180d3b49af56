use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ids::*;
use super::time::Minute;
use super::types::*;
use super::weights::WeightConfig;

/// One concrete occurrence of a duty or shift template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: InstanceId,
    pub kind: Kind,
    pub template: TemplateId,
    pub date: NaiveDate,
    /// 1-based day index within the period.
    pub day: i64,
    pub start: Minute,
    pub end: Minute,
}

/// A department configuration together with the input for one planning period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RosterInstance {
    pub department: String,
    pub period: PlanningPeriod,
    #[serde(default)]
    pub qualifications: Vec<Qualification>,
    pub physicians: Vec<Physician>,
    #[serde(default)]
    pub duty_templates: Vec<DutyTemplate>,
    #[serde(default)]
    pub shift_templates: Vec<ShiftTemplate>,
    #[serde(default)]
    pub pre_assignments: Vec<PreAssignment>,
    #[serde(default)]
    pub blocks: Vec<BlockDefinition>,
    #[serde(default)]
    pub rest_rules: Vec<RestRule>,
    #[serde(default)]
    pub pools: Vec<Pool>,
    #[serde(default)]
    pub weekly_sets: Vec<WeeklySet>,
    #[serde(default)]
    pub preferences: Vec<PreferenceRecord>,
    #[serde(default)]
    pub preference_caps: Vec<PreferenceCap>,
    #[serde(default)]
    pub weekend_policy: WeekendPolicy,
    #[serde(default)]
    pub carryover: CarryoverState,
    #[serde(default)]
    pub weights: WeightConfig,
}

impl RosterInstance {
    pub fn empty(department: &str, period: PlanningPeriod) -> Self {
        Self {
            department: department.to_owned(),
            period,
            qualifications: Vec::new(),
            physicians: Vec::new(),
            duty_templates: Vec::new(),
            shift_templates: Vec::new(),
            pre_assignments: Vec::new(),
            blocks: Vec::new(),
            rest_rules: Vec::new(),
            pools: Vec::new(),
            weekly_sets: Vec::new(),
            preferences: Vec::new(),
            preference_caps: Vec::new(),
            weekend_policy: WeekendPolicy::default(),
            carryover: CarryoverState::default(),
            weights: WeightConfig::default(),
        }
    }

    pub fn physician_index(&self, id: &PhysicianId) -> Option<usize> {
        self.physicians.iter().position(|p| &p.id == id)
    }

    pub fn duty_template(&self, id: &TemplateId) -> Option<&DutyTemplate> {
        self.duty_templates.iter().find(|t| &t.id == id)
    }

    pub fn shift_template(&self, id: &TemplateId) -> Option<&ShiftTemplate> {
        self.shift_templates.iter().find(|t| &t.id == id)
    }

    pub fn template_kind(&self, id: &TemplateId) -> Option<Kind> {
        if self.duty_template(id).is_some() {
            Some(Kind::Duty)
        } else if self.shift_template(id).is_some() {
            Some(Kind::Shift)
        } else {
            None
        }
    }

    pub fn recurrence(&self, id: &TemplateId) -> Option<&Recurrence> {
        self.duty_template(id)
            .map(|t| &t.recurrence)
            .or_else(|| self.shift_template(id).map(|t| &t.recurrence))
    }

    pub fn qualification_rules(&self, id: &TemplateId) -> Option<&QualificationRules> {
        self.duty_template(id)
            .map(|t| &t.qualifications)
            .or_else(|| self.shift_template(id).map(|t| &t.qualifications))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// A structured observation about input data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Finding {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, code: code.to_owned(), message: message.into() }
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, code: code.to_owned(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}
