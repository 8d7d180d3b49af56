use serde::{Deserialize, Serialize};

use super::types::PreferenceLevel;

/// Objective weights. All entries are magnitudes; the builder applies the
/// sign (rewards positive, penalties negative). `max_staffing` is the only
/// signed entry because surplus staff can be welcome or unwelcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightConfig {
    /// Reward for covering a non-mandatory duty.
    pub coverage: f64,
    /// Penalty for an assignment outside the desired qualification profile.
    pub soft_qualification: f64,
    pub strongly_desired: f64,
    pub desired: f64,
    pub undesired: f64,
    /// Reward per physician between the hard and the desired staffing level.
    pub desired_staffing: f64,
    pub max_staffing: f64,
    pub consecutive_duty: f64,
    pub consecutive_block: f64,
    pub weekend_preference: f64,
    pub max_weekends: f64,
    pub free_weekends: f64,
    pub pool_max_duties: f64,
    pub pool_min_duties: f64,
    pub pool_max_per_day: f64,
    pub fair_down: f64,
    pub fair_up: f64,
    pub max_consecutive_blocks: f64,
    /// Base of the default desired-rest ladder (lowest-priority level).
    pub rest_base: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            coverage: 1000.0,
            soft_qualification: 10.0,
            strongly_desired: 20.0,
            desired: 10.0,
            undesired: 10.0,
            desired_staffing: 200.0,
            max_staffing: 0.0,
            consecutive_duty: 1.0,
            consecutive_block: 1.0,
            weekend_preference: 10.0,
            max_weekends: 50.0,
            free_weekends: 50.0,
            pool_max_duties: 50.0,
            pool_min_duties: 50.0,
            pool_max_per_day: 50.0,
            fair_down: 50.0,
            fair_up: 50.0,
            max_consecutive_blocks: 10.0,
            rest_base: 10.0,
        }
    }
}

impl WeightConfig {
    /// Signed objective contribution of one preference selection.
    pub fn preference(&self, level: PreferenceLevel) -> f64 {
        match level {
            PreferenceLevel::StronglyDesired => self.strongly_desired,
            PreferenceLevel::Desired => self.desired,
            PreferenceLevel::Indifferent | PreferenceLevel::Impossible => 0.0,
            PreferenceLevel::Undesired => -self.undesired,
        }
    }

    /// Default weight of desired-rest level `rank` (0 = shortest) out of `levels`.
    /// Shorter rest violations weigh more: 4·b, 2·b, b for three levels.
    pub fn rest_ladder(&self, rank: usize, levels: usize) -> f64 {
        let exp = levels.saturating_sub(1).saturating_sub(rank);
        self.rest_base * f64::from(1u32 << exp.min(30))
    }

    pub fn is_finite(&self) -> bool {
        [
            self.coverage,
            self.soft_qualification,
            self.strongly_desired,
            self.desired,
            self.undesired,
            self.desired_staffing,
            self.max_staffing,
            self.consecutive_duty,
            self.consecutive_block,
            self.weekend_preference,
            self.max_weekends,
            self.free_weekends,
            self.pool_max_duties,
            self.pool_min_duties,
            self.pool_max_per_day,
            self.fair_down,
            self.fair_up,
            self.max_consecutive_blocks,
            self.rest_base,
        ]
        .iter()
        .all(|w| w.is_finite())
    }
}
