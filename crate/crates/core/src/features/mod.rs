//! Interpretable features: lags, seasonal lags, rolling and expanding
//! window statistics, polynomial trend, calendar encodings, holidays and
//! external regressors.
//!
//! The row for time index `t` only reads `y(t')` for `t' < t`, plus the
//! timestamp and regressor values at `t`. This makes the same builder
//! usable on a series extended with forecasts.

mod calendar;

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize};

pub use calendar::{encode_timestamp, DateFeature, TimeFeature};

use crate::error::{Error, Result};
use crate::series::{parse_timestamp, Periodicity, TimeSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowStat {
    Mean,
    Max,
    Min,
}

impl WindowStat {
    pub const ALL: [WindowStat; 3] = [WindowStat::Mean, WindowStat::Max, WindowStat::Min];

    fn name(self) -> &'static str {
        match self {
            WindowStat::Mean => "mean",
            WindowStat::Max => "max",
            WindowStat::Min => "min",
        }
    }

    fn apply(self, window: &[f64]) -> f64 {
        match self {
            WindowStat::Mean => window.iter().sum::<f64>() / window.len() as f64,
            WindowStat::Max => window.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            WindowStat::Min => window.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// `count` seasonal lags `y(t - j*period)` for `j = 1..=count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonalLags {
    pub count: usize,
    pub period: usize,
}

/// Holiday indicator read from a calendar file (one ISO date per line).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolidayConfig {
    pub calendar: PathBuf,
    #[serde(default)]
    pub buffer: u32,
    /// Suffix of the feature name, e.g. `IN` gives `holiday-IN`.
    #[serde(default = "default_holiday_label")]
    pub label: String,
}

fn default_holiday_label() -> String {
    "calendar".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Prefix used in lag-style feature names, e.g. `sales(t-1)`.
    pub target_name: String,
    pub lags: Vec<usize>,
    pub seasonal_lags: Option<SeasonalLags>,
    pub rolling_windows: Vec<usize>,
    pub rolling_stats: Vec<WindowStat>,
    pub expanding: bool,
    pub expanding_stats: Vec<WindowStat>,
    pub trend_degree: usize,
    #[serde(deserialize_with = "all_or_list")]
    pub date_features: Vec<DateFeature>,
    #[serde(deserialize_with = "all_or_list")]
    pub time_features: Vec<TimeFeature>,
    pub holidays: Option<HolidayConfig>,
    pub regressors: Vec<String>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            target_name: "y".to_string(),
            lags: vec![1, 2, 3],
            seasonal_lags: None,
            rolling_windows: vec![3, 6],
            rolling_stats: WindowStat::ALL.to_vec(),
            expanding: true,
            expanding_stats: WindowStat::ALL.to_vec(),
            trend_degree: 1,
            date_features: DateFeature::ALL.to_vec(),
            time_features: Vec::new(),
            holidays: None,
            regressors: Vec::new(),
        }
    }
}

impl FeatureConfig {
    /// Defaults plus one seasonal lag at the periodicity's natural season,
    /// and time-of-day features for hourly data.
    pub fn for_periodicity(periodicity: Periodicity) -> Self {
        let mut cfg = FeatureConfig {
            seasonal_lags: Some(SeasonalLags {
                count: 1,
                period: periodicity.season_length(),
            }),
            ..FeatureConfig::default()
        };
        if periodicity == Periodicity::Hourly {
            cfg.time_features = vec![TimeFeature::Hour];
        }
        cfg
    }

    /// A config with no features enabled; useful as a builder base.
    pub fn empty(target_name: impl Into<String>) -> Self {
        FeatureConfig {
            target_name: target_name.into(),
            lags: Vec::new(),
            seasonal_lags: None,
            rolling_windows: Vec::new(),
            rolling_stats: WindowStat::ALL.to_vec(),
            expanding: false,
            expanding_stats: WindowStat::ALL.to_vec(),
            trend_degree: 0,
            date_features: Vec::new(),
            time_features: Vec::new(),
            holidays: None,
            regressors: Vec::new(),
        }
    }

    /// Largest number of past observations any feature reads.
    pub fn lookback(&self) -> usize {
        let lag = self.lags.iter().copied().max().unwrap_or(0);
        let seasonal = self.seasonal_lags.map_or(0, |s| s.count * s.period);
        let window = self.rolling_windows.iter().copied().max().unwrap_or(0);
        let expanding = usize::from(self.expanding && !self.expanding_stats.is_empty());
        lag.max(seasonal).max(window).max(expanding)
    }
}

fn all_or_list<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de> + AllVariants,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Sel<T> {
        Flag(bool),
        List(Vec<T>),
    }
    Ok(match Sel::<T>::deserialize(de)? {
        Sel::Flag(true) => T::all(),
        Sel::Flag(false) => Vec::new(),
        Sel::List(v) => v,
    })
}

trait AllVariants: Sized {
    fn all() -> Vec<Self>;
}
impl AllVariants for DateFeature {
    fn all() -> Vec<Self> {
        DateFeature::ALL.to_vec()
    }
}
impl AllVariants for TimeFeature {
    fn all() -> Vec<Self> {
        TimeFeature::ALL.to_vec()
    }
}

/// Whether a feature is a continuous quantity or a small ordinal code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Ordinal,
}

#[derive(Clone, Debug, PartialEq)]
enum Term {
    Lag(usize),
    Rolling(usize, WindowStat),
    Expanding(WindowStat),
    Trend(i32),
    Date(DateFeature),
    Time(TimeFeature),
    Holiday,
    Regressor(String),
}

/// A validated, ready-to-evaluate feature configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    config: FeatureConfig,
    terms: Vec<Term>,
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    holidays: Vec<NaiveDate>,
    holiday_buffer: i64,
}

impl FeatureSet {
    pub fn new(config: &FeatureConfig) -> Result<Self> {
        let y = &config.target_name;
        let mut terms = Vec::new();
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut push = |term: Term, name: String, kind: FeatureKind| {
            terms.push(term);
            names.push(name);
            kinds.push(kind);
        };
        for &lag in &config.lags {
            if lag == 0 {
                return Err(Error::ConfigInvalid("lags must be positive".into()));
            }
            push(
                Term::Lag(lag),
                format!("{y}(t-{lag})"),
                FeatureKind::Continuous,
            );
        }
        if let Some(s) = config.seasonal_lags {
            if s.count == 0 || s.period == 0 {
                return Err(Error::ConfigInvalid(
                    "seasonal lags need positive count and period".into(),
                ));
            }
            for j in 1..=s.count {
                let name = if j == 1 {
                    format!("{y}(t-{})", s.period)
                } else {
                    format!("{y}(t-{j}*{})", s.period)
                };
                push(Term::Lag(j * s.period), name, FeatureKind::Continuous);
            }
        }
        for &w in &config.rolling_windows {
            if w == 0 {
                return Err(Error::ConfigInvalid(
                    "rolling windows must be positive".into(),
                ));
            }
            for &stat in &config.rolling_stats {
                push(
                    Term::Rolling(w, stat),
                    format!("{y}-{}(t-1,t-{w})", stat.name()),
                    FeatureKind::Continuous,
                );
            }
        }
        if config.expanding {
            for &stat in &config.expanding_stats {
                push(
                    Term::Expanding(stat),
                    format!("{y}-{}(0,t-1)", stat.name()),
                    FeatureKind::Continuous,
                );
            }
        }
        for p in 1..=config.trend_degree {
            let name = if p == 1 {
                "t".to_string()
            } else {
                format!("t{p}")
            };
            push(Term::Trend(p as i32), name, FeatureKind::Continuous);
        }
        for &f in &config.date_features {
            push(Term::Date(f), f.name().to_string(), FeatureKind::Ordinal);
        }
        for &f in &config.time_features {
            push(Term::Time(f), f.name().to_string(), FeatureKind::Ordinal);
        }
        let mut holidays = Vec::new();
        let mut holiday_buffer = 0;
        if let Some(h) = &config.holidays {
            holidays = read_holiday_calendar(&h.calendar)?;
            holiday_buffer = h.buffer as i64;
            push(
                Term::Holiday,
                format!("holiday-{}", h.label),
                FeatureKind::Ordinal,
            );
        }
        for reg in &config.regressors {
            push(
                Term::Regressor(reg.clone()),
                format!("{reg}(t)"),
                FeatureKind::Continuous,
            );
        }

        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateFeature(n.clone()));
            }
        }
        Ok(FeatureSet {
            config: config.clone(),
            terms,
            names,
            kinds,
            holidays,
            holiday_buffer,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookback(&self) -> usize {
        self.config.lookback()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check_regressors(&self, series: &TimeSeries) -> Result<()> {
        for reg in &self.config.regressors {
            if series.regressor(reg).is_none() {
                return Err(Error::UnknownRegressor(reg.clone()));
            }
        }
        Ok(())
    }

    /// Feature vector for time index `t`, where `lookback <= t <= len`.
    /// `t == len` is the next, not yet observed, point.
    pub fn row(&self, series: &TimeSeries, t: usize) -> Result<Vec<f64>> {
        self.check_regressors(series)?;
        let lookback = self.lookback();
        if t < lookback || t > series.len() {
            return Err(Error::InsufficientHistory {
                required: lookback.max(t),
                available: series.len().min(t),
            });
        }
        self.row_unchecked(series, t)
    }

    fn row_unchecked(&self, series: &TimeSeries, t: usize) -> Result<Vec<f64>> {
        let y = series.values();
        let ts = series.timestamp_at(t);
        self.terms
            .iter()
            .map(|term| {
                Ok(match term {
                    Term::Lag(l) => y[t - l],
                    Term::Rolling(w, stat) => stat.apply(&y[t - w..t]),
                    Term::Expanding(stat) => stat.apply(&y[..t]),
                    Term::Trend(p) => (t as f64).powi(*p),
                    Term::Date(f) => f.value(ts),
                    Term::Time(f) => f.value(ts),
                    Term::Holiday => self.holiday_flag(ts.date()),
                    Term::Regressor(name) => series.regressor_value(name, t)?,
                })
            })
            .collect()
    }

    fn holiday_flag(&self, date: NaiveDate) -> f64 {
        let lo = date - chrono::Duration::days(self.holiday_buffer);
        let hi = date + chrono::Duration::days(self.holiday_buffer);
        let start = self.holidays.partition_point(|d| *d < lo);
        if self.holidays.get(start).is_some_and(|d| *d <= hi) {
            1.0
        } else {
            0.0
        }
    }

    /// Rows for every observed index whose lookback is satisfiable.
    pub fn build(&self, series: &TimeSeries) -> Result<FeatureMatrix> {
        self.check_regressors(series)?;
        let lookback = self.lookback();
        if series.len() <= lookback {
            return Err(Error::InsufficientHistory {
                required: lookback + 1,
                available: series.len(),
            });
        }
        let row_index: Vec<usize> = (lookback..series.len()).collect();
        let rows = row_index
            .iter()
            .map(|&t| self.row_unchecked(series, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            names: self.names.clone(),
            rows,
            row_index,
        })
    }
}

/// Convenience wrapper: compile `config` and build the matrix.
pub fn build_features(series: &TimeSeries, config: &FeatureConfig) -> Result<FeatureMatrix> {
    FeatureSet::new(config)?.build(series)
}

/// A copy of `series` with `predicted` appended at the next time step.
pub fn extend_with_prediction(series: &TimeSeries, predicted: f64) -> Result<TimeSeries> {
    let mut out = series.clone();
    out.push_value(predicted)?;
    Ok(out)
}

fn read_holiday_calendar(path: &std::path::Path) -> Result<Vec<NaiveDate>> {
    let unreadable = |reason: String| Error::HolidayCalendarUnreadable {
        path: path.display().to_string(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
    let mut dates = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ts =
            parse_timestamp(line).ok_or_else(|| unreadable(format!("line {}: `{line}`", i + 1)))?;
        dates.push(ts.date());
    }
    dates.sort();
    dates.dedup();
    Ok(dates)
}

/// Feature rows aligned to time indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub row_index: Vec<usize>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with a `t` column followed by one column per feature.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("t").chain(self.names.iter().map(String::as_str));
        w.write_record(header).map_err(csv_err)?;
        for (t, row) in self.row_index.iter().zip(&self.rows) {
            let rec = std::iter::once(t.to_string()).chain(row.iter().map(|v| v.to_string()));
            w.write_record(rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_series, Regressor};
    use chrono::NaiveDateTime;
    use proptest::prelude::*;

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2019, 7, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(start(), Periodicity::Daily, values.to_vec()).unwrap()
    }

    fn value(fs: &FeatureSet, s: &TimeSeries, t: usize, name: &str) -> f64 {
        fs.row(s, t).unwrap()[fs.index_of(name).unwrap()]
    }

    #[test]
    fn lag_one_at_t2() {
        let s = series(&[10.0, 20.0, 30.0]);
        let cfg = FeatureConfig {
            lags: vec![1],
            ..FeatureConfig::empty("sales")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        assert_eq!(value(&fs, &s, 2, "sales(t-1)"), 20.0);
        let m = fs.build(&s).unwrap();
        assert_eq!(m.row_index, vec![1, 2]);
        assert_eq!(m.column("sales(t-1)").unwrap(), vec![10.0, 20.0]);
    }

    #[test]
    fn rolling_max_and_expanding_mean_at_t3() {
        let s = series(&[10.0, 20.0, 30.0]);
        let cfg = FeatureConfig {
            rolling_windows: vec![3],
            expanding: true,
            ..FeatureConfig::empty("sales")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        // t = 3 is the point after the last observation
        assert_eq!(value(&fs, &s, 3, "sales-max(t-1,t-3)"), 30.0);
        assert_eq!(value(&fs, &s, 3, "sales-mean(0,t-1)"), 20.0);
        assert_eq!(value(&fs, &s, 3, "sales-min(t-1,t-3)"), 10.0);
    }

    #[test]
    fn date_row_for_first_of_july() {
        let s = series(&[1.0, 2.0]);
        let cfg = FeatureConfig {
            date_features: DateFeature::ALL.to_vec(),
            ..FeatureConfig::empty("sales")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        assert_eq!(fs.lookback(), 0);
        assert_eq!(value(&fs, &s, 0, "month"), 7.0);
        assert_eq!(value(&fs, &s, 0, "quarter"), 3.0);
        assert_eq!(value(&fs, &s, 0, "fashion-season"), 1.0);
    }

    #[test]
    fn naming_patterns_and_column_count() {
        let cfg = FeatureConfig {
            lags: vec![3],
            seasonal_lags: Some(SeasonalLags {
                count: 2,
                period: 365,
            }),
            rolling_windows: vec![3],
            expanding: true,
            trend_degree: 2,
            ..FeatureConfig::empty("sales")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        let names = fs.names();
        for expected in [
            "sales(t-3)",
            "sales(t-365)",
            "sales(t-2*365)",
            "sales-max(t-1,t-3)",
            "sales-mean(0,t-1)",
            "t",
            "t2",
        ] {
            assert!(names.iter().any(|n| n == expected), "missing {expected}");
        }
        assert_eq!(fs.len(), 1 + 2 + 3 + 3 + 2);
        assert_eq!(fs.lookback(), 730);
    }

    #[test]
    fn duplicate_names_rejected() {
        let cfg = FeatureConfig {
            lags: vec![7],
            seasonal_lags: Some(SeasonalLags {
                count: 1,
                period: 7,
            }),
            ..FeatureConfig::empty("y")
        };
        assert!(matches!(
            FeatureSet::new(&cfg),
            Err(Error::DuplicateFeature(_))
        ));
    }

    #[test]
    fn insufficient_history_and_unknown_regressor() {
        let s = series(&[1.0, 2.0]);
        let cfg = FeatureConfig {
            lags: vec![5],
            ..FeatureConfig::empty("y")
        };
        assert!(matches!(
            build_features(&s, &cfg),
            Err(Error::InsufficientHistory { .. })
        ));
        let cfg = FeatureConfig {
            regressors: vec!["discount".into()],
            ..FeatureConfig::empty("y")
        };
        assert!(matches!(
            build_features(&s, &cfg),
            Err(Error::UnknownRegressor(_))
        ));
    }

    #[test]
    fn regressor_columns_and_future_values() {
        let stamps = (0..3)
            .map(|i| Periodicity::Daily.offset(start(), i))
            .collect();
        let s = make_series(
            stamps,
            vec![1.0, 2.0, 3.0],
            Periodicity::Daily,
            vec![Regressor::new("discount", vec![0.0, 0.1, 0.2, 0.3])],
            Some(crate::series::Horizon::new(1).unwrap()),
        )
        .unwrap();
        let cfg = FeatureConfig {
            regressors: vec!["discount".into()],
            ..FeatureConfig::empty("y")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        assert_eq!(fs.row(&s, 3).unwrap(), vec![0.3]);
        let ext = extend_with_prediction(&s, 4.0).unwrap();
        assert!(matches!(
            fs.row(&ext, 4),
            Err(Error::RegressorUnavailable { .. })
        ));
    }

    #[test]
    fn holiday_buffer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("holidays.txt");
        std::fs::write(&path, "# national\n2019-07-04\n").unwrap();
        let cfg = FeatureConfig {
            holidays: Some(HolidayConfig {
                calendar: path,
                buffer: 2,
                label: "US".into(),
            }),
            ..FeatureConfig::empty("y")
        };
        let fs = FeatureSet::new(&cfg).unwrap();
        let s = series(&[0.0; 10]);
        let flags: Vec<f64> = (0..10).map(|t| value(&fs, &s, t, "holiday-US")).collect();
        // July 1..10: the 4th +/- 2 days is flagged
        assert_eq!(
            flags,
            vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );

        let missing = FeatureConfig {
            holidays: Some(HolidayConfig {
                calendar: "/nonexistent/h.txt".into(),
                buffer: 0,
                label: "X".into(),
            }),
            ..FeatureConfig::empty("y")
        };
        assert!(matches!(
            FeatureSet::new(&missing),
            Err(Error::HolidayCalendarUnreadable { .. })
        ));
    }

    #[test]
    fn extension_appends_and_rejects_nan() {
        let s = series(&[1.0, 2.0]);
        let e = extend_with_prediction(&s, 3.0).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(e.timestamps()[2], Periodicity::Daily.offset(start(), 2));
        let e2 = extend_with_prediction(&e, 4.0).unwrap();
        crate::series::make_series(
            e2.timestamps().to_vec(),
            e2.values().to_vec(),
            Periodicity::Daily,
            vec![],
            None,
        )
        .expect("periodicity kept");
        assert!(matches!(
            extend_with_prediction(&s, f64::NAN),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn csv_export_has_header() {
        let s = series(&[10.0, 20.0, 30.0]);
        let cfg = FeatureConfig {
            lags: vec![1],
            ..FeatureConfig::empty("sales")
        };
        let m = build_features(&s, &cfg).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,sales(t-1)\n1,10\n2,20\n"
        );
    }

    #[test]
    fn toml_accepts_all_or_list() {
        let cfg: FeatureConfig =
            toml::from_str("date_features = true\ntime_features = [\"hour\"]").unwrap();
        assert_eq!(cfg.date_features.len(), 17);
        assert_eq!(cfg.time_features, vec![TimeFeature::Hour]);
        let cfg: FeatureConfig =
            toml::from_str("date_features = [\"month\", \"is-weekend\"]").unwrap();
        assert_eq!(
            cfg.date_features,
            vec![DateFeature::Month, DateFeature::IsWeekend]
        );
    }

    proptest! {
        #[test]
        fn rows_are_causal(values in proptest::collection::vec(-100.0f64..100.0, 20..40), t in 8usize..20, bump in 1.0f64..50.0) {
            let cfg = FeatureConfig {
                seasonal_lags: Some(SeasonalLags { count: 1, period: 7 }),
                ..FeatureConfig::default()
            };
            let fs = FeatureSet::new(&cfg).unwrap();
            let s = series(&values);
            let before = fs.row(&s, t).unwrap();
            let mut changed = values.clone();
            for v in changed.iter_mut().skip(t) {
                *v += bump;
            }
            let after = fs.row(&s.with_values(changed).unwrap(), t).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn build_is_deterministic(values in proptest::collection::vec(-100.0f64..100.0, 10..30)) {
            let s = series(&values);
            let cfg = FeatureConfig::default();
            let a = build_features(&s, &cfg).unwrap();
            let b = build_features(&s, &cfg).unwrap();
            prop_assert_eq!(a.n_features(), FeatureSet::new(&cfg).unwrap().len());
            prop_assert!(a.rows.iter().flatten().all(|v| v.is_finite()));
            prop_assert_eq!(a, b);
        }
    }
}
