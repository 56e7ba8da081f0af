//! Trend-cycle decomposition and residual block bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Centered moving-average decomposition of odd order `m = 2k + 1`.
/// Both parts are defined on `defined = k..len - k` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub order: usize,
    pub defined: std::ops::Range<usize>,
    pub trend_cycle: Vec<f64>,
    pub residual: Vec<f64>,
}

impl Decomposition {
    pub fn half_width(&self) -> usize {
        self.order / 2
    }
}

pub fn decompose(values: &[f64], order: usize) -> Result<Decomposition> {
    if order % 2 == 0 {
        return Err(Error::EvenOrder(order));
    }
    if order > values.len() {
        return Err(Error::OrderTooLong {
            order,
            available: values.len(),
        });
    }
    let k = order / 2;
    let defined = k..values.len() - k;
    let trend_cycle: Vec<f64> = defined
        .clone()
        .map(|t| values[t - k..=t + k].iter().sum::<f64>() / order as f64)
        .collect();
    let residual = defined
        .clone()
        .zip(&trend_cycle)
        .map(|(t, c)| values[t] - c)
        .collect();
    Ok(Decomposition {
        order,
        defined,
        trend_cycle,
        residual,
    })
}

/// One bootstrapped neighbour of the original series.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedSample {
    pub series: TimeSeries,
    /// Bootstrapped residual on the decomposition's defined range.
    pub residual: Vec<f64>,
    pub block_length: usize,
    pub seed: u64,
    pub stream: u64,
}

/// Resample contiguous residual blocks with replacement and add them back
/// to the trend-cycle. Boundary points without a full averaging window
/// are copied unchanged. Sample `i` draws from ChaCha stream `i` of
/// `seed`, so samples do not depend on each other.
pub fn block_bootstrap(
    series: &TimeSeries,
    block_length: usize,
    n_samples: usize,
    seed: u64,
    order: usize,
) -> Result<Vec<PerturbedSample>> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let dec = decompose(series.values(), order)?;
    let n = dec.residual.len();
    if block_length == 0 {
        return Err(Error::invalid("block_length", "must be at least 1"));
    }
    if block_length > n {
        return Err(Error::BlockTooLong {
            block: block_length,
            available: n,
        });
    }
    (0..n_samples as u64)
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let residual = resample(&dec.residual, block_length, &mut rng);
            let mut values = series.values().to_vec();
            // y + (r* - r) equals trend + r* and keeps y bit-exact when r* = r
            for (i, t) in dec.defined.clone().enumerate() {
                values[t] += residual[i] - dec.residual[i];
            }
            Ok(PerturbedSample {
                series: series.with_values(values)?,
                residual,
                block_length,
                seed,
                stream,
            })
        })
        .collect()
}

fn resample(residual: &[f64], block: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = residual.len();
    let blocks = n.div_ceil(block);
    let mut out = Vec::with_capacity(blocks * block);
    for _ in 0..blocks {
        let start = rng.random_range(0..=n - block);
        out.extend_from_slice(&residual[start..start + block]);
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Periodicity;
    use crate::synthetic::{constant, Seasonal};
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn series(values: Vec<f64>) -> TimeSeries {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        TimeSeries::from_values(start, Periodicity::Daily, values).unwrap()
    }

    #[test]
    fn linear_trend() {
        let y: Vec<f64> = (0..10).map(f64::from).collect();
        let d = decompose(&y, 3).unwrap();
        assert_eq!(d.defined, 1..9);
        assert_eq!(d.trend_cycle, (1..9).map(f64::from).collect::<Vec<_>>());
        assert!(d.residual.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn constant_residual_is_zero() {
        let d = decompose(&[2.5; 12], 5).unwrap();
        assert!(d.residual.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn order_errors() {
        assert!(matches!(decompose(&[1.0; 10], 4), Err(Error::EvenOrder(4))));
        assert!(matches!(
            decompose(&[1.0; 3], 5),
            Err(Error::OrderTooLong {
                order: 5,
                available: 3
            })
        ));
    }

    #[test]
    fn full_block_reproduces_series() {
        let s = Seasonal::default().series().unwrap();
        let n = s.len() - 6;
        for p in block_bootstrap(&s, n, 5, 3, 7).unwrap() {
            assert_eq!(p.series.values(), s.values());
        }
        assert!(matches!(
            block_bootstrap(&s, n + 1, 1, 0, 7),
            Err(Error::BlockTooLong { .. })
        ));
    }

    #[test]
    fn zero_residual_leaves_series_unchanged() {
        let s = constant(50, 3.0, Periodicity::Daily).unwrap();
        for seed in 0..5 {
            for p in block_bootstrap(&s, 4, 3, seed, 7).unwrap() {
                assert_eq!(p.series.values(), s.values());
            }
        }
    }

    #[test]
    fn boundaries_copied_and_trend_kept() {
        let s = Seasonal::default().series().unwrap();
        let d = decompose(s.values(), 5).unwrap();
        for p in block_bootstrap(&s, 10, 4, 11, 5).unwrap() {
            let y = p.series.values();
            assert_eq!(&y[..2], &s.values()[..2]);
            assert_eq!(&y[y.len() - 2..], &s.values()[s.len() - 2..]);
            for (i, t) in d.defined.clone().enumerate() {
                assert!((y[t] - p.residual[i] - d.trend_cycle[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_mean_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let y: Vec<f64> = (0..400).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = series(y);
        let d = decompose(s.values(), 7).unwrap();
        let mean = d.residual.iter().sum::<f64>() / d.residual.len() as f64;
        let sd = (d.residual.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
            / d.residual.len() as f64)
            .sqrt();
        let samples = block_bootstrap(&s, 10, 200, 5, 7).unwrap();
        let bound = 3.0 * sd / (200f64).sqrt();
        let mut outside = 0;
        for i in 0..d.residual.len() {
            let m = samples.iter().map(|p| p.residual[i]).sum::<f64>() / 200.0;
            if m.abs() > bound {
                outside += 1;
            }
        }
        // a 3-sigma band: allow a small fraction of excursions
        assert!(
            outside * 100 <= d.residual.len(),
            "{outside} of {} outside",
            d.residual.len()
        );
    }

    proptest! {
        #[test]
        fn reconstruction(y in proptest::collection::vec(-1e3f64..1e3, 9..60), k in 0usize..4) {
            let d = decompose(&y, 2 * k + 1).unwrap();
            for (i, t) in d.defined.clone().enumerate() {
                prop_assert!((d.trend_cycle[i] + d.residual[i] - y[t]).abs() <= 1e-12 * y[t].abs().max(1.0));
            }
        }

        #[test]
        fn deterministic(seed in any::<u64>()) {
            let s = Seasonal::default().series().unwrap();
            prop_assert_eq!(block_bootstrap(&s, 12, 3, seed, 5).unwrap(), block_bootstrap(&s, 12, 3, seed, 5).unwrap());
        }
    }
}
