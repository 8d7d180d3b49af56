//! Exact optimisation by exhaustive search with bound propagation.
//!
//! Assignment variables are enumerated; the remaining variables are settled
//! by the same depth-first search once the assignments are fixed, which for
//! the builder's linking constraints is almost always pure propagation.

use super::{RawSolution, SolveError, SolveStatus};
use crate::mip::{CanonicalModel, Sense, VarClass};
use crate::par::{map_range, ExecMode};

pub const ORACLE_MAX_FREE: usize = 24;
const EPS: f64 = 1e-9;
/// Assignment variables fixed per parallel task prefix.
const PREFIX_BITS: usize = 6;

struct Problem<'a> {
    model: &'a CanonicalModel,
    /// Constraints touching each variable.
    touching: Vec<Vec<usize>>,
    obj: Vec<f64>,
    /// Search order: assignment variables first, then the rest.
    order: Vec<usize>,
}

#[derive(Clone)]
struct Domains {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Problem<'_> {
    fn activity_bounds(&self, c: usize, d: &Domains) -> (f64, f64) {
        let mut min = 0.0;
        let mut max = 0.0;
        for &(j, a) in &self.model.constraints[c].terms {
            let (l, h) = (d.lo[j] as f64, d.hi[j] as f64);
            if a > 0.0 {
                min += a * l;
                max += a * h;
            } else {
                min += a * h;
                max += a * l;
            }
        }
        (min, max)
    }

    /// Tightens bounds to a fixpoint; `false` means a domain became empty.
    fn propagate(&self, d: &mut Domains, seeds: impl IntoIterator<Item = usize>) -> bool {
        let m = self.model.constraints.len();
        let mut queued = vec![false; m];
        let mut stack: Vec<usize> = Vec::new();
        for c in seeds {
            if !queued[c] {
                queued[c] = true;
                stack.push(c);
            }
        }
        while let Some(c) = stack.pop() {
            queued[c] = false;
            let con = &self.model.constraints[c];
            let (min, max) = self.activity_bounds(c, d);
            let upper = matches!(con.sense, Sense::Le | Sense::Eq);
            let lower = matches!(con.sense, Sense::Ge | Sense::Eq);
            if (upper && min > con.rhs + EPS) || (lower && max < con.rhs - EPS) {
                return false;
            }
            for &(j, a) in &con.terms {
                let (l, h) = (d.lo[j] as f64, d.hi[j] as f64);
                let (own_min, own_max) = if a > 0.0 { (a * l, a * h) } else { (a * h, a * l) };
                let mut new_lo = d.lo[j];
                let mut new_hi = d.hi[j];
                if upper {
                    // a x <= rhs - (min - own_min)
                    let slack = con.rhs - (min - own_min);
                    if a > 0.0 {
                        new_hi = new_hi.min((slack / a + EPS).floor() as i64);
                    } else {
                        new_lo = new_lo.max((slack / a - EPS).ceil() as i64);
                    }
                }
                if lower {
                    // a x >= rhs - (max - own_max)
                    let need = con.rhs - (max - own_max);
                    if a > 0.0 {
                        new_lo = new_lo.max((need / a - EPS).ceil() as i64);
                    } else {
                        new_hi = new_hi.min((need / a + EPS).floor() as i64);
                    }
                }
                if new_lo > new_hi {
                    return false;
                }
                if new_lo != d.lo[j] || new_hi != d.hi[j] {
                    d.lo[j] = new_lo;
                    d.hi[j] = new_hi;
                    for &c2 in &self.touching[j] {
                        if c2 != c && !queued[c2] {
                            queued[c2] = true;
                            stack.push(c2);
                        }
                    }
                    // bounds of this row moved too; revisit it once the others settle
                    if !queued[c] {
                        queued[c] = true;
                        stack.push(c);
                    }
                    break;
                }
            }
        }
        true
    }

    fn upper_bound(&self, d: &Domains) -> f64 {
        self.order
            .iter()
            .map(|&j| {
                let c = self.obj[j];
                if c > 0.0 {
                    c * d.hi[j] as f64
                } else {
                    c * d.lo[j] as f64
                }
            })
            .sum()
    }

    /// Value order for a variable: the objective-preferred end first.
    fn values(&self, j: usize, d: &Domains) -> Vec<i64> {
        let mut v: Vec<i64> = (d.lo[j]..=d.hi[j]).collect();
        if self.obj[j] > 0.0 {
            v.reverse();
        }
        v
    }

    fn fix(&self, d: &Domains, j: usize, v: i64) -> Option<Domains> {
        let mut next = d.clone();
        next.lo[j] = v;
        next.hi[j] = v;
        self.propagate(&mut next, self.touching[j].iter().copied()).then_some(next)
    }

    fn search(&self, d: Domains, best: &mut Option<(f64, Vec<i64>)>) {
        let bound = self.upper_bound(&d);
        if let Some((b, _)) = best {
            if bound <= *b + EPS {
                return;
            }
        }
        let Some(&j) = self.order.iter().find(|&&j| d.lo[j] < d.hi[j]) else {
            let values: Vec<f64> = d.lo.iter().map(|&v| v as f64).collect();
            if self.model.first_violation(&values, 1e-9).is_none() {
                *best = Some((self.model.objective_value(&values), d.lo));
            }
            return;
        };
        for v in self.values(j, &d) {
            if let Some(next) = self.fix(&d, j, v) {
                self.search(next, best);
            }
        }
    }
}

fn setup(model: &CanonicalModel) -> Result<Option<(Problem<'_>, Domains, Vec<usize>)>, SolveError> {
    let n = model.variables.len();
    let mut touching = vec![Vec::new(); n];
    for (c, con) in model.constraints.iter().enumerate() {
        for &(j, _) in &con.terms {
            touching[j].push(c);
        }
    }
    let mut decisions: Vec<usize> = Vec::new();
    let mut others: Vec<usize> = Vec::new();
    for (j, v) in model.variables.iter().enumerate() {
        if v.class().is_some_and(VarClass::is_decision) {
            decisions.push(j);
        } else {
            others.push(j);
        }
    }
    let mut order = decisions.clone();
    order.extend(others);
    let p = Problem { model, touching, obj: model.variables.iter().map(|v| v.objective).collect(), order };
    let mut d = Domains {
        lo: model.variables.iter().map(|v| v.lower.ceil() as i64).collect(),
        hi: model.variables.iter().map(|v| v.upper.floor() as i64).collect(),
    };
    if d.lo.iter().zip(&d.hi).any(|(l, h)| l > h) || !p.propagate(&mut d, 0..model.constraints.len()) {
        return Ok(None);
    }
    let free: Vec<usize> = decisions.into_iter().filter(|&j| d.lo[j] < d.hi[j]).collect();
    if free.len() > ORACLE_MAX_FREE {
        return Err(SolveError::TooLarge { free: free.len(), limit: ORACLE_MAX_FREE });
    }
    Ok(Some((p, d, free)))
}

/// Number of assignment variables left free after root propagation, or
/// `None` when propagation alone proves infeasibility.
pub fn free_decisions(model: &CanonicalModel) -> Option<usize> {
    match setup(model) {
        Ok(Some((_, _, free))) => Some(free.len()),
        Ok(None) => None,
        Err(SolveError::TooLarge { free, .. }) => Some(free),
        Err(_) => None,
    }
}

pub fn exhaustive_oracle(model: &CanonicalModel, mode: ExecMode) -> Result<RawSolution, SolveError> {
    let Some((p, root, free)) = setup(model)? else {
        return Ok(RawSolution::without_solution(SolveStatus::Infeasible, 0.0));
    };
    let k = free.len().min(PREFIX_BITS);
    let prefixes = 1usize << k;
    let results = map_range(mode, prefixes, |code| {
        let mut d = root.clone();
        for (bit, &j) in free[..k].iter().enumerate() {
            // bit 0 takes the objective-preferred value, as the search does
            let &v = p.values(j, &d).get((code >> (k - 1 - bit)) & 1)?;
            d = p.fix(&d, j, v)?;
        }
        let mut best = None;
        p.search(d, &mut best);
        best
    });
    let mut best: Option<(f64, Vec<i64>)> = None;
    for r in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| r.0 > *b + EPS) {
            best = Some(r);
        }
    }
    Ok(match best {
        None => RawSolution::without_solution(SolveStatus::Infeasible, 0.0),
        Some((obj, vals)) => RawSolution {
            status: SolveStatus::OptimalWithinGap,
            values: vals.into_iter().map(|v| v as f64).collect(),
            objective: Some(obj),
            bound: Some(obj),
            gap: Some(0.0),
            solver_seconds: 0.0,
        },
    })
}
