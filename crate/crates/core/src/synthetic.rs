//! Seeded synthetic series for tests, examples and demos.

use chrono::{NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::series::{Periodicity, TimeSeries};

fn origin() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid origin")
}

/// `level + amplitude * sin(2 pi t / period) + slope * t + noise` on a
/// calendar starting 2000-01-01.
#[derive(Clone, Debug)]
pub struct Seasonal {
    pub len: usize,
    pub period: usize,
    pub level: f64,
    pub amplitude: f64,
    pub slope: f64,
    pub noise: f64,
    pub periodicity: Periodicity,
    pub seed: u64,
}

impl Default for Seasonal {
    fn default() -> Self {
        Seasonal {
            len: 240,
            period: 12,
            level: 50.0,
            amplitude: 10.0,
            slope: 0.05,
            noise: 1.0,
            periodicity: Periodicity::Monthly,
            seed: 7,
        }
    }
}

impl Seasonal {
    pub fn values(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.noise.max(0.0)).expect("finite noise scale");
        (0..self.len)
            .map(|t| {
                let phase = 2.0 * std::f64::consts::PI * t as f64 / self.period as f64;
                self.level
                    + self.amplitude * phase.sin()
                    + self.slope * t as f64
                    + normal.sample(&mut rng)
            })
            .collect()
    }

    pub fn series(&self) -> Result<TimeSeries> {
        TimeSeries::from_values(origin(), self.periodicity, self.values())
    }
}

/// Constant series of the given length.
pub fn constant(len: usize, value: f64, periodicity: Periodicity) -> Result<TimeSeries> {
    TimeSeries::from_values(origin(), periodicity, vec![value; len])
}

/// Gaussian random walk.
pub fn random_walk(
    len: usize,
    start: f64,
    step_sd: f64,
    periodicity: Periodicity,
    seed: u64,
) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, step_sd).expect("finite step scale");
    let values = (0..len)
        .scan(start, |y, _| {
            let out = *y;
            *y += normal.sample(&mut rng);
            Some(out)
        })
        .collect();
    TimeSeries::from_values(origin(), periodicity, values)
}
