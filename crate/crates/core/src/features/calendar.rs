//! Date and time encodings. Every categorical is ordinal-encoded.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DateFeature {
    Month,
    DayOfYear,
    DayOfMonth,
    WeekOfYear,
    WeekOfMonth,
    DayOfWeek,
    IsWeekend,
    Quarter,
    Season,
    FashionSeason,
    IsMonthStart,
    IsMonthEnd,
    IsQuarterStart,
    IsQuarterEnd,
    IsYearStart,
    IsYearEnd,
    IsLeapYear,
}

impl DateFeature {
    pub const ALL: [DateFeature; 17] = [
        DateFeature::Month,
        DateFeature::DayOfYear,
        DateFeature::DayOfMonth,
        DateFeature::WeekOfYear,
        DateFeature::WeekOfMonth,
        DateFeature::DayOfWeek,
        DateFeature::IsWeekend,
        DateFeature::Quarter,
        DateFeature::Season,
        DateFeature::FashionSeason,
        DateFeature::IsMonthStart,
        DateFeature::IsMonthEnd,
        DateFeature::IsQuarterStart,
        DateFeature::IsQuarterEnd,
        DateFeature::IsYearStart,
        DateFeature::IsYearEnd,
        DateFeature::IsLeapYear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DateFeature::Month => "month",
            DateFeature::DayOfYear => "day-of-year",
            DateFeature::DayOfMonth => "day-of-month",
            DateFeature::WeekOfYear => "week-of-year",
            DateFeature::WeekOfMonth => "week-of-month",
            DateFeature::DayOfWeek => "day-of-week",
            DateFeature::IsWeekend => "is-weekend",
            DateFeature::Quarter => "quarter",
            DateFeature::Season => "season",
            DateFeature::FashionSeason => "fashion-season",
            DateFeature::IsMonthStart => "is-month-start",
            DateFeature::IsMonthEnd => "is-month-end",
            DateFeature::IsQuarterStart => "is-quarter-start",
            DateFeature::IsQuarterEnd => "is-quarter-end",
            DateFeature::IsYearStart => "is-year-start",
            DateFeature::IsYearEnd => "is-year-end",
            DateFeature::IsLeapYear => "is-leap-year",
        }
    }

    pub fn value(self, ts: NaiveDateTime) -> f64 {
        let d = ts.date();
        let month = d.month();
        let day = d.day();
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            DateFeature::Month => month as f64,
            DateFeature::DayOfYear => d.ordinal() as f64,
            DateFeature::DayOfMonth => day as f64,
            DateFeature::WeekOfYear => d.iso_week().week() as f64,
            DateFeature::WeekOfMonth => day.div_ceil(7) as f64,
            DateFeature::DayOfWeek => d.weekday().num_days_from_monday() as f64,
            DateFeature::IsWeekend => flag(matches!(d.weekday(), Weekday::Sat | Weekday::Sun)),
            DateFeature::Quarter => quarter(month) as f64,
            DateFeature::Season => season(month) as f64,
            DateFeature::FashionSeason => flag(month >= 7),
            DateFeature::IsMonthStart => flag(day == 1),
            DateFeature::IsMonthEnd => flag(day == days_in_month(d)),
            DateFeature::IsQuarterStart => flag(day == 1 && (month - 1) % 3 == 0),
            DateFeature::IsQuarterEnd => flag(month % 3 == 0 && day == days_in_month(d)),
            DateFeature::IsYearStart => flag(month == 1 && day == 1),
            DateFeature::IsYearEnd => flag(month == 12 && day == 31),
            DateFeature::IsLeapYear => flag(NaiveDate::from_ymd_opt(d.year(), 2, 29).is_some()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeFeature {
    Hour,
    Minute,
    Second,
}

impl TimeFeature {
    pub const ALL: [TimeFeature; 3] = [TimeFeature::Hour, TimeFeature::Minute, TimeFeature::Second];

    pub fn name(self) -> &'static str {
        match self {
            TimeFeature::Hour => "hour",
            TimeFeature::Minute => "minute",
            TimeFeature::Second => "second",
        }
    }

    pub fn value(self, ts: NaiveDateTime) -> f64 {
        match self {
            TimeFeature::Hour => ts.hour() as f64,
            TimeFeature::Minute => ts.minute() as f64,
            TimeFeature::Second => ts.second() as f64,
        }
    }
}

/// Encode every requested date and time feature of `ts`.
pub fn encode_timestamp(
    ts: NaiveDateTime,
    dates: &[DateFeature],
    times: &[TimeFeature],
) -> Vec<(&'static str, f64)> {
    dates
        .iter()
        .map(|f| (f.name(), f.value(ts)))
        .chain(times.iter().map(|f| (f.name(), f.value(ts))))
        .collect()
}

fn quarter(month: u32) -> u32 {
    (month - 1) / 3 + 1
}

/// Meteorological seasons, Northern Hemisphere:
/// 0 Spring (Mar-May), 1 Summer (Jun-Aug), 2 Fall (Sep-Nov), 3 Winter (Dec-Feb).
fn season(month: u32) -> u32 {
    match month {
        3..=5 => 0,
        6..=8 => 1,
        9..=11 => 2,
        _ => 3,
    }
}

fn days_in_month(d: NaiveDate) -> u32 {
    let (y, m) = if d.month() == 12 {
        (d.year() + 1, 1)
    } else {
        (d.year(), d.month() + 1)
    };
    NaiveDate::from_ymd_opt(y, m, 1)
        .and_then(|n| n.pred_opt())
        .map(|last| last.day())
        .expect("valid calendar date")
}
