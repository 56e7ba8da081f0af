//! Univariate time series with calendar-aware periodicity and optional
//! external regressor columns.

use std::fmt;
use std::path::Path;

use chrono::{DateTime, Duration, Months, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling period of a series. Weekly and monthly stepping is calendar
/// based, so months of different length are handled correctly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Hourly,
    Daily,
    Weekly,
    Monthly,
}

impl Periodicity {
    /// The timestamp `n` periods after `origin`.
    pub fn offset(self, origin: NaiveDateTime, n: usize) -> NaiveDateTime {
        match self {
            Periodicity::Hourly => origin + Duration::hours(n as i64),
            Periodicity::Daily => origin + Duration::days(n as i64),
            Periodicity::Weekly => origin + Duration::weeks(n as i64),
            Periodicity::Monthly => origin
                .checked_add_months(Months::new(n as u32))
                .expect("timestamp out of range"),
        }
    }

    /// Guess the periodicity from the first gap of a timestamp list.
    pub fn infer(timestamps: &[NaiveDateTime]) -> Option<Self> {
        let (a, b) = (timestamps.first()?, timestamps.get(1)?);
        [
            Periodicity::Hourly,
            Periodicity::Daily,
            Periodicity::Weekly,
            Periodicity::Monthly,
        ]
        .into_iter()
        .find(|p| p.offset(*a, 1) == *b)
    }

    /// Conventional season length used for default seasonal lags.
    pub fn season_length(self) -> usize {
        match self {
            Periodicity::Hourly => 24,
            Periodicity::Daily => 7,
            Periodicity::Weekly => 52,
            Periodicity::Monthly => 12,
        }
    }
}

impl fmt::Display for Periodicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Periodicity::Hourly => "hourly",
            Periodicity::Daily => "daily",
            Periodicity::Weekly => "weekly",
            Periodicity::Monthly => "monthly",
        };
        f.write_str(s)
    }
}

/// Number of future steps to forecast. Always at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Horizon(usize);

impl Horizon {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(Horizon(steps))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for Horizon {
    type Error = Error;
    fn try_from(steps: usize) -> Result<Self> {
        Horizon::new(steps)
    }
}

impl From<Horizon> for usize {
    fn from(h: Horizon) -> usize {
        h.0
    }
}

/// One time point: ordinal position plus calendar timestamp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimePoint {
    pub index: usize,
    pub timestamp: NaiveDateTime,
}

/// A named external regressor column z_k(t).
///
/// The column may be longer than the target series; the extra values are
/// known future regressor values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    pub name: String,
    pub values: Vec<f64>,
}

impl Regressor {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Regressor {
            name: name.into(),
            values,
        }
    }
}

/// Immutable, validated univariate series.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<NaiveDateTime>,
    values: Vec<f64>,
    periodicity: Periodicity,
    regressors: Vec<Regressor>,
}

/// Build a validated [`TimeSeries`].
///
/// Regressor columns must have length `T`, or `T + H` when `horizon` is
/// declared (future regressor values).
pub fn make_series(
    timestamps: Vec<NaiveDateTime>,
    values: Vec<f64>,
    periodicity: Periodicity,
    regressors: Vec<Regressor>,
    horizon: Option<Horizon>,
) -> Result<TimeSeries> {
    let len = values.len();
    if timestamps.len() != len {
        return Err(Error::LengthMismatch {
            what: "timestamps".into(),
            expected: len,
            actual: timestamps.len(),
        });
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                index: i,
                value: *v,
            });
        }
    }
    for i in 1..len {
        if timestamps[i] <= timestamps[i - 1] {
            return Err(Error::NonMonotonicTimestamps { index: i });
        }
    }
    if let Some(&origin) = timestamps.first() {
        for (i, ts) in timestamps.iter().enumerate().skip(1) {
            let expected = periodicity.offset(origin, i);
            if *ts != expected {
                return Err(Error::PeriodicityViolation {
                    index: i,
                    found: ts.to_string(),
                    expected: expected.to_string(),
                    periodicity: periodicity.to_string(),
                });
            }
        }
    }
    let future = horizon.map_or(0, Horizon::get);
    let mut seen = std::collections::HashSet::new();
    for reg in &regressors {
        if !seen.insert(reg.name.as_str()) {
            return Err(Error::ConfigInvalid(format!(
                "duplicate regressor column `{}`",
                reg.name
            )));
        }
        let n = reg.values.len();
        if n != len && n != len + future {
            return Err(Error::LengthMismatch {
                what: format!("regressor `{}`", reg.name),
                expected: len + future,
                actual: n,
            });
        }
        if let Some((i, v)) = reg.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                index: i,
                value: *v,
            });
        }
    }
    Ok(TimeSeries {
        timestamps,
        values,
        periodicity,
        regressors,
    })
}

impl TimeSeries {
    /// Series without regressors on a regular calendar starting at `start`.
    pub fn from_values(
        start: NaiveDateTime,
        periodicity: Periodicity,
        values: Vec<f64>,
    ) -> Result<Self> {
        let timestamps = (0..values.len())
            .map(|i| periodicity.offset(start, i))
            .collect();
        make_series(timestamps, values, periodicity, Vec::new(), None)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn periodicity(&self) -> Periodicity {
        self.periodicity
    }

    pub fn regressors(&self) -> &[Regressor] {
        &self.regressors
    }

    pub fn regressor(&self, name: &str) -> Option<&Regressor> {
        self.regressors.iter().find(|r| r.name == name)
    }

    pub fn points(&self) -> impl Iterator<Item = TimePoint> + '_ {
        self.timestamps
            .iter()
            .enumerate()
            .map(|(index, &timestamp)| TimePoint { index, timestamp })
    }

    /// Timestamp of position `index`, extrapolated past the end of the
    /// series using the periodicity.
    pub fn timestamp_at(&self, index: usize) -> NaiveDateTime {
        match self.timestamps.get(index) {
            Some(ts) => *ts,
            None => {
                let origin = *self
                    .timestamps
                    .first()
                    .expect("empty series has no calendar");
                self.periodicity.offset(origin, index)
            }
        }
    }

    /// Number of future regressor values available past the end of the
    /// target (the minimum over all columns; 0 without regressors).
    pub fn future_regressor_len(&self) -> usize {
        self.regressors
            .iter()
            .map(|r| r.values.len().saturating_sub(self.len()))
            .min()
            .unwrap_or(0)
    }

    /// The first `len` observations. Regressor columns are kept whole:
    /// values past the cut become known future values.
    pub fn truncate(&self, len: usize) -> TimeSeries {
        let len = len.min(self.len());
        TimeSeries {
            timestamps: self.timestamps[..len].to_vec(),
            values: self.values[..len].to_vec(),
            periodicity: self.periodicity,
            regressors: self.regressors.clone(),
        }
    }

    /// Same calendar and regressors with replaced target values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<TimeSeries> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "values".into(),
                expected: self.len(),
                actual: values.len(),
            });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                index: i,
                value: *v,
            });
        }
        Ok(TimeSeries {
            values,
            ..self.clone()
        })
    }

    /// Replace regressor values past the end of the target with the given
    /// future columns, matched by name.
    pub fn with_future_regressors(&self, future: &[Regressor]) -> Result<TimeSeries> {
        let mut out = self.clone();
        let len = self.len();
        for f in future {
            let reg = out
                .regressors
                .iter_mut()
                .find(|r| r.name == f.name)
                .ok_or_else(|| Error::UnknownRegressor(f.name.clone()))?;
            if let Some((i, v)) = f.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    index: len + i,
                    value: *v,
                });
            }
            reg.values.truncate(len);
            reg.values.extend_from_slice(&f.values);
        }
        Ok(out)
    }

    /// Append one value at the next calendar step.
    pub(crate) fn push_value(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue {
                index: self.len(),
                value,
            });
        }
        let next = self.timestamp_at(self.len());
        self.timestamps.push(next);
        self.values.push(value);
        Ok(())
    }

    /// Regressor value at `index`, if the column reaches that far.
    pub fn regressor_value(&self, name: &str, index: usize) -> Result<f64> {
        let reg = self
            .regressor(name)
            .ok_or_else(|| Error::UnknownRegressor(name.to_string()))?;
        reg.values
            .get(index)
            .copied()
            .ok_or_else(|| Error::RegressorUnavailable {
                name: name.to_string(),
                index,
            })
    }
}

/// How ingestion treats missing target values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    ForwardFill,
}

/// Parse an ISO-8601 date or date-time, normalising offsets to UTC.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(ts);
        }
    }
    DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|d| d.naive_utc())
}

/// Read a series from CSV.
///
/// The header is mandatory: `timestamp`, `value`, then any number of
/// regressor columns. Trailing rows with an empty `value` but complete
/// regressors are read as future regressor values.
pub fn read_csv(
    path: &Path,
    periodicity: Option<Periodicity>,
    missing: MissingPolicy,
) -> Result<TimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::InputUnreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    read_csv_from(file, periodicity, missing).map_err(|e| match e {
        Error::InputUnreadable { reason, .. } => Error::InputUnreadable {
            path: path.display().to_string(),
            reason,
        },
        other => other,
    })
}

/// [`read_csv`] over any reader.
pub fn read_csv_from<R: std::io::Read>(
    reader: R,
    periodicity: Option<Periodicity>,
    missing: MissingPolicy,
) -> Result<TimeSeries> {
    let unreadable = |reason: String| Error::InputUnreadable {
        path: "<reader>".into(),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| unreadable(e.to_string()))?
        .clone();
    if headers.len() < 2 || headers[0].trim() != "timestamp" || headers[1].trim() != "value" {
        return Err(unreadable(
            "header must start with `timestamp,value`".to_string(),
        ));
    }
    let reg_names: Vec<String> = headers
        .iter()
        .skip(2)
        .map(|h| h.trim().to_string())
        .collect();

    let mut timestamps = Vec::new();
    let mut values: Vec<Option<f64>> = Vec::new();
    let mut reg_cols: Vec<Vec<f64>> = vec![Vec::new(); reg_names.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| unreadable(e.to_string()))?;
        let line = row + 2;
        let ts = parse_timestamp(record.get(0).unwrap_or(""))
            .ok_or_else(|| unreadable(format!("line {line}: bad timestamp")))?;
        timestamps.push(ts);
        values.push(parse_cell(record.get(1).unwrap_or(""), line)?);
        for (k, col) in reg_cols.iter_mut().enumerate() {
            let cell = parse_cell(record.get(k + 2).unwrap_or(""), line)?.ok_or_else(|| {
                unreadable(format!("line {line}: empty regressor `{}`", reg_names[k]))
            })?;
            col.push(cell);
        }
    }

    // trailing empty targets with regressors present are the future block
    let mut observed = values.len();
    if !reg_names.is_empty() {
        while observed > 0 && values[observed - 1].is_none() {
            observed -= 1;
        }
    }
    let future = values.len() - observed;
    let values = fill_missing(&values[..observed], missing)?;
    let periodicity = match periodicity {
        Some(p) => p,
        None => Periodicity::infer(&timestamps)
            .ok_or_else(|| unreadable("cannot infer periodicity from timestamps".into()))?,
    };
    let origin_stamps = timestamps[..observed].to_vec();
    // future timestamps must continue the calendar too
    if let Some(&origin) = timestamps.first() {
        for (i, ts) in timestamps.iter().enumerate().skip(observed) {
            if *ts != periodicity.offset(origin, i) {
                return Err(Error::PeriodicityViolation {
                    index: i,
                    found: ts.to_string(),
                    expected: periodicity.offset(origin, i).to_string(),
                    periodicity: periodicity.to_string(),
                });
            }
        }
    }
    let regressors = reg_names
        .into_iter()
        .zip(reg_cols)
        .map(|(name, values)| Regressor { name, values })
        .collect();
    let horizon = if future > 0 {
        Some(Horizon::new(future)?)
    } else {
        None
    };
    make_series(origin_stamps, values, periodicity, regressors, horizon)
}

fn parse_cell(raw: &str, line: usize) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("nan") || raw.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::InputUnreadable {
            path: "<reader>".into(),
            reason: format!("line {line}: `{raw}` is not a number"),
        })
}

/// Apply the missing-value policy to a column of optional observations.
pub fn fill_missing(values: &[Option<f64>], policy: MissingPolicy) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut last: Option<f64> = None;
    for (i, v) in values.iter().enumerate() {
        match (v, policy) {
            (Some(x), _) => {
                last = Some(*x);
                out.push(*x);
            }
            (None, MissingPolicy::ForwardFill) if last.is_some() => out.push(last.unwrap()),
            (None, _) => return Err(Error::MissingValue { index: i }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2021, 3, d)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    #[test]
    fn three_daily_points() {
        let s = make_series(
            vec![day(1), day(2), day(3)],
            vec![1.0, 2.0, 3.0],
            Periodicity::Daily,
            vec![],
            None,
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        let idx: Vec<usize> = s.points().map(|p| p.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn gap_violates_daily_periodicity() {
        let err = make_series(
            vec![day(1), day(3)],
            vec![1.0, 2.0],
            Periodicity::Daily,
            vec![],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PeriodicityViolation { index: 1, .. }));
    }

    #[test]
    fn future_regressor_values_accepted_with_horizon() {
        let reg = Regressor::new("discount", vec![0.0, 0.1, 0.2, 0.3, 0.4]);
        let s = make_series(
            vec![day(1), day(2), day(3)],
            vec![1.0, 2.0, 3.0],
            Periodicity::Daily,
            vec![reg.clone()],
            Some(Horizon::new(2).unwrap()),
        )
        .unwrap();
        assert_eq!(s.future_regressor_len(), 2);
        // without the declared horizon the long column is a mismatch
        let err = make_series(
            vec![day(1), day(2), day(3)],
            vec![1.0, 2.0, 3.0],
            Periodicity::Daily,
            vec![reg],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn rejects_nan_and_non_monotonic() {
        let err = make_series(
            vec![day(1), day(2)],
            vec![1.0, f64::NAN],
            Periodicity::Daily,
            vec![],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { index: 1, .. }));
        let err = make_series(
            vec![day(2), day(1)],
            vec![1.0, 2.0],
            Periodicity::Daily,
            vec![],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTimestamps { index: 1 }));
    }

    #[test]
    fn monthly_stepping_is_calendar_aware() {
        let origin = NaiveDate::from_ymd_opt(2019, 1, 31)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let feb = Periodicity::Monthly.offset(origin, 1);
        assert_eq!(feb.date(), NaiveDate::from_ymd_opt(2019, 2, 28).unwrap());
        // stepping from the origin (not chaining) keeps the 31st where it exists
        let mar = Periodicity::Monthly.offset(origin, 2);
        assert_eq!(mar.date(), NaiveDate::from_ymd_opt(2019, 3, 31).unwrap());
        let first = NaiveDate::from_ymd_opt(1985, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let stamps: Vec<_> = (0..3)
            .map(|i| Periodicity::Monthly.offset(first, i))
            .collect();
        assert_eq!(Periodicity::infer(&stamps), Some(Periodicity::Monthly));
    }

    #[test]
    fn csv_with_future_regressor_rows() {
        let csv = "timestamp,value,temp\n2021-03-01,1,10\n2021-03-02,2,11\n2021-03-03,,12\n";
        let s = read_csv_from(csv.as_bytes(), None, MissingPolicy::Reject).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.periodicity(), Periodicity::Daily);
        assert_eq!(s.regressor("temp").unwrap().values, vec![10.0, 11.0, 12.0]);
        assert_eq!(s.future_regressor_len(), 1);
    }

    #[test]
    fn csv_missing_value_policy() {
        let csv = "timestamp,value\n2021-03-01,1\n2021-03-02,\n2021-03-03,3\n";
        let err = read_csv_from(csv.as_bytes(), None, MissingPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::MissingValue { index: 1 }));
        let s = read_csv_from(csv.as_bytes(), None, MissingPolicy::ForwardFill).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 3.0]);
    }

    #[test]
    fn csv_requires_header() {
        let csv = "2021-03-01,1\n2021-03-02,2\n";
        assert!(matches!(
            read_csv_from(csv.as_bytes(), None, MissingPolicy::Reject),
            Err(Error::InputUnreadable { .. })
        ));
    }

    #[test]
    fn push_value_advances_calendar() {
        let mut s = TimeSeries::from_values(day(1), Periodicity::Daily, vec![1.0, 2.0]).unwrap();
        s.push_value(3.0).unwrap();
        assert_eq!(s.timestamps()[2], day(3));
        assert!(s.push_value(f64::INFINITY).is_err());
    }

    #[test]
    fn timestamps_with_offsets_normalise_to_utc() {
        let ts = parse_timestamp("2021-03-01T05:00:00+02:00").unwrap();
        assert_eq!(ts, day(1) + Duration::hours(3));
    }
}
