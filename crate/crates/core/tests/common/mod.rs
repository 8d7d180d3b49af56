#![allow(dead_code)]

use dutyroster_core::model::*;
use dutyroster_core::scenarios::{date, duty, hm, next, period, physician};

/// Physicians a and b, one mandatory night on Mar 3 and one on Mar 4.
pub fn two_by_two() -> RosterInstance {
    let start = date(2025, 3, 3);
    let mut inst = RosterInstance::empty("2x2", period(start, date(2025, 3, 4), &[]));
    inst.physicians = vec![physician("a", 1.0, &[]), physician("b", 1.0, &[])];
    inst.duty_templates = vec![duty("N", Recurrence::on(&Weekday::ALL, window(hm(20, 0), next(8, 0))), true)];
    inst
}

pub fn night(d: u32) -> InstanceId {
    InstanceId::of(&TemplateId::new("N"), date(2025, 3, d))
}
