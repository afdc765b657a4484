//! Plain-text `key = value` form of [`DetectorModel`].
//!
//! ```text
//! # detector
//! efficiency = 0.9
//! excess_noise = 1.1
//! mean_gain = 1
//! dark_sigma = 0
//! v_max = 100
//! dv = 0.1
//! variance_convention = as-printed
//! ```
//!
//! Blank lines and `#` comments are ignored. `v_max`, `dv`, `mean_gain`,
//! `dark_sigma` and `variance_convention` are optional.

use std::fmt;
use std::str::FromStr;

use super::{DetectorModel, VarianceConvention, DEFAULT_DV};
use crate::error::{Error, Result};

const KEYS: [&str; 7] = [
    "efficiency",
    "excess_noise",
    "mean_gain",
    "dark_sigma",
    "v_max",
    "dv",
    "variance_convention",
];

impl fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` on f64 is the shortest round-tripping representation
        writeln!(f, "efficiency = {:?}", self.efficiency)?;
        writeln!(f, "excess_noise = {:?}", self.excess_noise)?;
        writeln!(f, "mean_gain = {:?}", self.mean_gain)?;
        writeln!(f, "dark_sigma = {:?}", self.dark_sigma)?;
        writeln!(f, "v_max = {:?}", self.v_max)?;
        writeln!(f, "dv = {:?}", self.dv)?;
        writeln!(f, "variance_convention = {}", self.variance_convention.as_str())
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a number")))
}

impl FromStr for DetectorModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: [Option<&str>; 7] = [None; 7];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let idx = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if values[idx].replace(value.trim()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        let required = |i: usize| values[i].ok_or_else(|| Error::Config(format!("missing `{}`", KEYS[i])));
        let efficiency = number(KEYS[0], required(0)?)?;
        let excess_noise = number(KEYS[1], required(1)?)?;
        let mean_gain = values[2].map(|v| number(KEYS[2], v)).transpose()?.unwrap_or(1.0);
        let dark_sigma = values[3].map(|v| number(KEYS[3], v)).transpose()?.unwrap_or(0.0);
        let v_max = values[4].map(|v| number(KEYS[4], v)).transpose()?;
        let dv = values[5].map(|v| number(KEYS[5], v)).transpose()?.unwrap_or(DEFAULT_DV);
        let variance_convention = values[6]
            .map(VarianceConvention::from_str)
            .transpose()?
            .unwrap_or_default();
        let v_max = v_max.ok_or_else(|| Error::Config("missing `v_max`".into()))?;
        DetectorModel::new(
            efficiency,
            excess_noise,
            mean_gain,
            dark_sigma,
            v_max,
            dv,
            variance_convention,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }
}
