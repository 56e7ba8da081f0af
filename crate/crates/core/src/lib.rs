pub mod backtest;
pub mod cli;
pub mod error;
pub mod explain;
pub mod features;
pub mod forecast;
pub mod gbt;
pub mod robustness;
pub mod series;
pub mod split;
pub mod synthetic;
pub mod treeshap;

pub use error::{Error, Result};
