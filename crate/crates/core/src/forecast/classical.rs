//! Baseline forecasters that are refit on every backtest window.

use crate::error::{Error, Result};
use crate::series::{Horizon, Regressor, TimeSeries};

use super::{ForecastPath, Forecaster};

/// Every step repeats the last observation.
pub fn naive_predict(history: &[f64], horizon: Horizon) -> Result<ForecastPath> {
    let last = *history.last().ok_or(Error::EmptyHistory)?;
    Ok(ForecastPath {
        origin: history.len(),
        values: vec![last; horizon.get()],
    })
}

/// Step `h` repeats the observation one or more whole seasons back:
/// `y(T + h - m * ceil(h / m))`.
pub fn seasonal_naive_predict(
    history: &[f64],
    horizon: Horizon,
    season: usize,
) -> Result<ForecastPath> {
    if season == 0 {
        return Err(Error::invalid("season", "must be at least 1"));
    }
    let t = history.len();
    if t == 0 {
        return Err(Error::EmptyHistory);
    }
    if t < season {
        return Err(Error::SeasonTooLong {
            season,
            available: t,
        });
    }
    // 1-based y(T + h - m*ceil(h/m)) is 0-based index T - 1 + h - m*ceil(h/m)
    let values = (1..=horizon.get())
        .map(|h| history[t - 1 + h - season * h.div_ceil(season)])
        .collect();
    Ok(ForecastPath { origin: t, values })
}

/// Mean of the last `order` values, applied recursively over the history
/// extended with earlier forecasts.
pub fn moving_average_predict(
    history: &[f64],
    horizon: Horizon,
    order: usize,
) -> Result<ForecastPath> {
    if order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if history.len() < order {
        return Err(Error::OrderTooLong {
            order,
            available: history.len(),
        });
    }
    let mut window: Vec<f64> = history[history.len() - order..].to_vec();
    let mut values = Vec::with_capacity(horizon.get());
    for _ in 0..horizon.get() {
        let next = window.iter().sum::<f64>() / order as f64;
        values.push(next);
        window.remove(0);
        window.push(next);
    }
    Ok(ForecastPath {
        origin: history.len(),
        values,
    })
}

/// Flat forecast at the final smoothed level, with the level started at
/// the first observation.
pub fn ses_predict(history: &[f64], horizon: Horizon, alpha: f64) -> Result<ForecastPath> {
    check_alpha(alpha)?;
    let (first, rest) = history.split_first().ok_or(Error::EmptyHistory)?;
    let level = rest
        .iter()
        .fold(*first, |l, y| alpha * y + (1.0 - alpha) * l);
    Ok(ForecastPath {
        origin: history.len(),
        values: vec![level; horizon.get()],
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

fn stored(history: &Option<Vec<f64>>) -> Result<&[f64]> {
    history.as_deref().ok_or(Error::NotFitted)
}

#[derive(Clone, Debug, Default)]
pub struct Naive {
    history: Option<Vec<f64>>,
}

impl Forecaster for Naive {
    fn name(&self) -> String {
        "Naive".into()
    }

    fn fit(&mut self, history: &TimeSeries) -> Result<()> {
        if history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        self.history = Some(history.values().to_vec());
        Ok(())
    }

    fn predict(&self, horizon: Horizon, _: Option<&[Regressor]>) -> Result<Vec<f64>> {
        Ok(naive_predict(stored(&self.history)?, horizon)?.values)
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SeasonalNaive {
    season: usize,
    history: Option<Vec<f64>>,
}

impl SeasonalNaive {
    pub fn new(season: usize) -> Result<Self> {
        if season == 0 {
            return Err(Error::invalid("season", "must be at least 1"));
        }
        Ok(SeasonalNaive {
            season,
            history: None,
        })
    }

    pub fn season(&self) -> usize {
        self.season
    }
}

impl Forecaster for SeasonalNaive {
    fn name(&self) -> String {
        format!("SeasonalNaive({})", self.season)
    }

    fn fit(&mut self, history: &TimeSeries) -> Result<()> {
        if history.len() < self.season {
            return Err(Error::SeasonTooLong {
                season: self.season,
                available: history.len(),
            });
        }
        self.history = Some(history.values().to_vec());
        Ok(())
    }

    fn predict(&self, horizon: Horizon, _: Option<&[Regressor]>) -> Result<Vec<f64>> {
        Ok(seasonal_naive_predict(stored(&self.history)?, horizon, self.season)?.values)
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

#[derive(Clone, Debug)]
pub struct MovingAverage {
    order: usize,
    history: Option<Vec<f64>>,
}

impl MovingAverage {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        Ok(MovingAverage {
            order,
            history: None,
        })
    }
}

impl Forecaster for MovingAverage {
    fn name(&self) -> String {
        format!("MovingAverage({})", self.order)
    }

    fn fit(&mut self, history: &TimeSeries) -> Result<()> {
        if history.len() < self.order {
            return Err(Error::OrderTooLong {
                order: self.order,
                available: history.len(),
            });
        }
        self.history = Some(history.values().to_vec());
        Ok(())
    }

    fn predict(&self, horizon: Horizon, _: Option<&[Regressor]>) -> Result<Vec<f64>> {
        Ok(moving_average_predict(stored(&self.history)?, horizon, self.order)?.values)
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SimpleExpSmoothing {
    alpha: f64,
    history: Option<Vec<f64>>,
}

impl SimpleExpSmoothing {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(SimpleExpSmoothing {
            alpha,
            history: None,
        })
    }
}

impl Forecaster for SimpleExpSmoothing {
    fn name(&self) -> String {
        format!("SimpleExponentialSmoothing({})", self.alpha)
    }

    fn fit(&mut self, history: &TimeSeries) -> Result<()> {
        if history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        self.history = Some(history.values().to_vec());
        Ok(())
    }

    fn predict(&self, horizon: Horizon, _: Option<&[Regressor]>) -> Result<Vec<f64>> {
        Ok(ses_predict(stored(&self.history)?, horizon, self.alpha)?.values)
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(n: usize) -> Horizon {
        Horizon::new(n).unwrap()
    }

    #[test]
    fn naive() {
        assert_eq!(
            naive_predict(&[3.0, 7.0, 5.0], h(2)).unwrap().values,
            vec![5.0, 5.0]
        );
        assert_eq!(naive_predict(&[42.0], h(1)).unwrap().values, vec![42.0]);
        assert!(matches!(naive_predict(&[], h(1)), Err(Error::EmptyHistory)));
    }

    #[test]
    fn seasonal_naive() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            seasonal_naive_predict(&y, h(2), 2).unwrap().values,
            vec![3.0, 4.0]
        );
        assert_eq!(
            seasonal_naive_predict(&y, h(3), 2).unwrap().values,
            vec![3.0, 4.0, 3.0]
        );
        assert!(matches!(
            seasonal_naive_predict(&[1.0, 2.0], h(1), 4),
            Err(Error::SeasonTooLong {
                season: 4,
                available: 2
            })
        ));
    }

    #[test]
    fn moving_average() {
        assert_eq!(
            moving_average_predict(&[1.0, 2.0, 3.0], h(1), 3)
                .unwrap()
                .values,
            vec![2.0]
        );
        assert_eq!(
            moving_average_predict(&[1.0, 2.0, 3.0], h(2), 2)
                .unwrap()
                .values,
            vec![2.5, 2.75]
        );
        assert!(matches!(
            moving_average_predict(&[5.0], h(1), 2),
            Err(Error::OrderTooLong { .. })
        ));
    }

    #[test]
    fn ses() {
        assert_eq!(
            ses_predict(&[0.0, 2.0], h(2), 0.5).unwrap().values,
            vec![1.0, 1.0]
        );
        assert_eq!(
            ses_predict(&[3.0, 7.0], h(1), 1.0).unwrap().values,
            vec![7.0]
        );
        assert!(matches!(
            ses_predict(&[1.0], h(1), 1.5),
            Err(Error::AlphaOutOfRange(_))
        ));
        assert!(SimpleExpSmoothing::new(0.0).is_err());
    }

    #[test]
    fn predict_before_fit() {
        assert!(matches!(
            Naive::default().predict(h(1), None),
            Err(Error::NotFitted)
        ));
        assert!(matches!(
            MovingAverage::new(2).unwrap().predict(h(1), None),
            Err(Error::NotFitted)
        ));
    }

    proptest! {
        #[test]
        fn ses_alpha_one_is_naive(y in proptest::collection::vec(-1e3f64..1e3, 1..50), hz in 1usize..10) {
            prop_assert_eq!(ses_predict(&y, h(hz), 1.0).unwrap(), naive_predict(&y, h(hz)).unwrap());
        }

        #[test]
        fn seasonal_naive_unit_season_is_naive(y in proptest::collection::vec(-1e3f64..1e3, 1..50)) {
            prop_assert_eq!(seasonal_naive_predict(&y, h(1), 1).unwrap(), naive_predict(&y, h(1)).unwrap());
        }

        #[test]
        fn outputs_are_finite(y in proptest::collection::vec(-1e3f64..1e3, 6..50), hz in 1usize..20) {
            for path in [
                naive_predict(&y, h(hz)).unwrap(),
                seasonal_naive_predict(&y, h(hz), 6).unwrap(),
                moving_average_predict(&y, h(hz), 6).unwrap(),
                ses_predict(&y, h(hz), 0.3).unwrap(),
            ] {
                prop_assert_eq!(path.values.len(), hz);
                prop_assert!(path.values.iter().all(|v| v.is_finite()));
            }
        }
    }
}
