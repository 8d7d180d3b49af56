//! Availability-proportional fair duty counts.

use std::collections::BTreeSet;

use super::DeriveError;
use crate::model::{Instance, PoolId};

/// `target(p) = n · v(p)·attend(p) / Σ_q v(q)·attend(q)` where `attend(p)` is
/// the number of pool duties on days that `p` is not absent.
pub fn compute_target_numbers(
    pool: &PoolId,
    duties: &[usize],
    instances: &[Instance],
    members: &[(f64, &BTreeSet<i64>)],
) -> Result<Vec<f64>, DeriveError> {
    let n = duties.len() as f64;
    let weights: Vec<f64> = members
        .iter()
        .map(|(rate, absent)| {
            let attend = duties.iter().filter(|&&d| !absent.contains(&instances[d].day)).count();
            rate * attend as f64
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(DeriveError::DegeneratePool(pool.clone()));
    }
    Ok(weights.iter().map(|w| n * w / total).collect())
}
