//! Clock times and the absolute minute scale used for all rest arithmetic.
//!
//! Every instant inside the engine is an [`Minute`] offset from 00:00 of the
//! first day of the planning period. Calendar dates appear only at the
//! boundary (documents, reports, calendar export).

use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Absolute minutes from the start of the planning period (may be negative
/// for previous-period instants).
pub type Minute = i64;

pub const MINUTES_PER_DAY: i64 = 24 * 60;

/// Minutes after 00:00 of an occurrence day. Values of 1440 and above fall on
/// a following day and are written with a `+N` suffix, e.g. `08:00+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClockTime(u32);

impl ClockTime {
    pub fn hm(hour: u32, minute: u32) -> Self {
        Self(hour * 60 + minute)
    }

    /// `hh:mm` on the day after the occurrence day.
    pub fn next_day(hour: u32, minute: u32) -> Self {
        Self(MINUTES_PER_DAY as u32 + hour * 60 + minute)
    }

    pub fn from_minutes(m: u32) -> Self {
        Self(m)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }

    pub fn day_offset(self) -> u32 {
        self.0 / MINUTES_PER_DAY as u32
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid clock time {0:?}, expected HH:MM or HH:MM+N")]
pub struct ClockTimeParseError(String);

impl FromStr for ClockTime {
    type Err = ClockTimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ClockTimeParseError(s.to_owned());
        let (clock, days) = match s.split_once('+') {
            Some((c, d)) => (c, d.parse::<u32>().map_err(|_| err())?),
            None => (s, 0),
        };
        let (h, m) = clock.split_once(':').ok_or_else(err)?;
        let h: u32 = h.parse().map_err(|_| err())?;
        let m: u32 = m.parse().map_err(|_| err())?;
        if h > 23 || m > 59 {
            return Err(err());
        }
        Ok(Self(days * MINUTES_PER_DAY as u32 + h * 60 + m))
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let day = self.day_offset();
        let rem = self.0 % MINUTES_PER_DAY as u32;
        write!(f, "{:02}:{:02}", rem / 60, rem % 60)?;
        if day > 0 {
            write!(f, "+{day}")?;
        }
        Ok(())
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Working times of a duty or shift relative to its occurrence day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: ClockTime,
    pub end: ClockTime,
}

impl TimeWindow {
    pub fn new(start: ClockTime, end: ClockTime) -> Self {
        Self { start, end }
    }

    pub fn is_valid(&self) -> bool {
        self.end > self.start && self.start.day_offset() == 0
    }

    pub fn duration_minutes(&self) -> i64 {
        self.end.minutes() as i64 - self.start.minutes() as i64
    }
}

/// Absolute minute of `clock` on `date`, relative to `origin` 00:00.
pub fn absolute_minute(origin: NaiveDate, date: NaiveDate, clock: ClockTime) -> Minute {
    (date - origin).num_days() * MINUTES_PER_DAY + clock.minutes() as i64
}

pub fn to_datetime(origin: NaiveDate, minute: Minute) -> NaiveDateTime {
    origin.and_time(NaiveTime::MIN) + Duration::minutes(minute)
}

/// Hours (possibly fractional or negative) converted to whole minutes.
pub fn hours_to_minutes(hours: f64) -> i64 {
    (hours * 60.0).round() as i64
}
