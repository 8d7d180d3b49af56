//! Qualification filters per physician and instance.

use crate::model::{Instance, RosterInstance};

/// `(hard, soft)` eligibility matrices indexed `[physician][instance]`.
pub fn derive_qualification_sets(inst: &RosterInstance, instances: &[Instance]) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let mut hard = Vec::with_capacity(inst.physicians.len());
    let mut soft = Vec::with_capacity(inst.physicians.len());
    for p in &inst.physicians {
        let mut h = Vec::with_capacity(instances.len());
        let mut s = Vec::with_capacity(instances.len());
        for x in instances {
            let rules = inst.qualification_rules(&x.template).expect("expanded from a known template");
            h.push(rules.hard_ok(&p.qualifications));
            s.push(rules.soft_ok(&p.qualifications));
        }
        hard.push(h);
        soft.push(s);
    }
    (hard, soft)
}
