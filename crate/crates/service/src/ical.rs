use chrono::{DateTime, Utc};
use icalendar::{Calendar, Component, Event, EventLike};

use dutyroster_core::derive::DerivedSets;
use dutyroster_core::model::{to_datetime, Kind, PhysicianId, RosterInstance};
use dutyroster_core::solver::RosterSolution;

/// One event per duty or shift `physician` holds, in local floating time.
pub fn calendar_for(
    physician: &PhysicianId,
    roster: &RosterSolution,
    inst: &RosterInstance,
    der: &DerivedSets,
    stamp: DateTime<Utc>,
) -> Calendar {
    let origin = inst.period.start_date;
    let mut cal = Calendar::new();
    cal.name(&format!("{} {}", inst.department, physician));
    for id in roster.of_physician(physician) {
        let Some(x) = der.index_of(id).map(|i| &der.instances[i]) else { continue };
        let label = match x.kind {
            Kind::Duty => inst.duty_template(&x.template).map(|t| t.label.clone()),
            Kind::Shift => inst.shift_template(&x.template).map(|t| t.label.clone()),
        }
        .unwrap_or_else(|| x.template.to_string());
        cal.push(
            Event::new()
                .uid(&format!("{}/{}/{}", inst.department, physician, x.id))
                .timestamp(stamp)
                .summary(&label)
                .starts(to_datetime(origin, x.start))
                .ends(to_datetime(origin, x.end))
                .done(),
        );
    }
    cal.done()
}
