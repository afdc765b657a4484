//! Experiment configuration, read from TOML.
//!
//! ```toml
//! resources = ["split_squeezed", "epr"]
//! squeezing_db = 10.0
//! alpha_mag = 4.0
//! alpha_phases = [0.0, 1.5707963267948966]
//! conditioning = [{ m = 24 }, { m_range = [1, 50] }, { posterior_mode = 25 }, { v = 15.3 }]
//! output = "out/fig2"
//! seed = 0
//!
//! [cutoffs]
//! signal = 50
//! ancilla = 80
//! m_max = 60
//!
//! [detector]
//! efficiency = 0.9
//! excess_noise = 1.1
//!
//! [wigner]
//! enabled = true
//! convention = "complex_amplitude"
//! ```
//!
//! Every source (resource × phase) is run against every conditioning target.

use std::path::{Path, PathBuf};

use mesoherald::fock::{DEFAULT_ANCILLA_CUTOFF, DEFAULT_DEFICIT_TOL, DEFAULT_SIGNAL_CUTOFF};
use mesoherald::{DetectorModel, GridSpec, Resource, VarianceConvention, WignerConvention, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_resources")]
    pub resources: Vec<Resource>,
    pub squeezing_db: f64,
    pub alpha_mag: f64,
    /// Radians; 0 displaces along the squeezed quadrature.
    #[serde(default = "default_phases")]
    pub alpha_phases: Vec<f64>,
    #[serde(default)]
    pub conditioning: Vec<Conditioning>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Only feeds the Monte-Carlo detector check.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cutoffs: Cutoffs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub wigner: WignerSettings,
}

fn default_resources() -> Vec<Resource> {
    vec![Resource::SplitSqueezed]
}

fn default_phases() -> Vec<f64> {
    vec![0.0]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// Ideal count.
    M(usize),
    /// Ideal counts `lo..=hi`.
    MRange([usize; 2]),
    /// Detector output value `v`; needs a detector.
    V(f64),
    /// The output bin whose posterior mode is this count; needs a detector.
    PosteriorMode(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    #[serde(default = "default_signal")]
    pub signal: usize,
    #[serde(default = "default_ancilla")]
    pub ancilla: usize,
    /// Largest count in the distribution and the detector model.
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_tol")]
    pub deficit_tolerance: f64,
}

fn default_signal() -> usize {
    DEFAULT_SIGNAL_CUTOFF
}
fn default_ancilla() -> usize {
    DEFAULT_ANCILLA_CUTOFF
}
fn default_m_max() -> usize {
    60
}
fn default_tol() -> f64 {
    DEFAULT_DEFICIT_TOL
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            signal: default_signal(),
            ancilla: default_ancilla(),
            m_max: default_m_max(),
            deficit_tolerance: default_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub efficiency: f64,
    pub excess_noise: f64,
    #[serde(default = "one")]
    pub mean_gain: f64,
    #[serde(default)]
    pub dark_sigma: f64,
    #[serde(default = "default_dv")]
    pub dv: f64,
    /// Defaults to the smallest range covering `m_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub variance_convention: VarianceConvention,
    /// Samples per checked column for the Monte-Carlo cross-check; 0 skips it.
    #[serde(default)]
    pub monte_carlo_samples: usize,
}

fn one() -> f64 {
    1.0
}
fn default_dv() -> f64 {
    mesoherald::detector::DEFAULT_DV
}

impl DetectorConfig {
    pub fn model(&self, m_max: usize) -> mesoherald::Result<DetectorModel> {
        let v_max = self.v_max.unwrap_or_else(|| {
            let need = DetectorModel::required_v_max(self.excess_noise, m_max);
            (need / self.dv).ceil() * self.dv
        });
        DetectorModel::new(
            self.efficiency,
            self.excess_noise,
            self.mean_gain,
            self.dark_sigma,
            v_max,
            self.dv,
            self.variance_convention,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSettings {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub convention: WignerConvention,
    /// Fixed square grid; sized per state when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for WignerSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            convention: WignerConvention::default(),
            half_width: None,
            points: None,
        }
    }
}

impl WignerSettings {
    pub fn grid_for(&self, rho: &mesoherald::DensityMatrix) -> GridSpec {
        let auto = GridSpec::auto(rho);
        match (self.half_width, self.points) {
            (Some(h), Some(n)) => GridSpec::square(h, n),
            (Some(h), None) => GridSpec::square(h, auto.nx),
            (None, Some(n)) => GridSpec::square(auto.x_max, n),
            (None, None) => auto,
        }
    }
}

/// One resource at one displacement phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub resource: Resource,
    pub phase: f64,
}

impl Source {
    pub fn label(&self) -> String {
        format!("{}_phase{:.4}", self.resource.as_str(), self.phase)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn r(&self) -> f64 {
        mesoherald::db_to_r(self.squeezing_db).unwrap_or(f64::NAN)
    }

    pub fn alpha(&self, phase: f64) -> C64 {
        C64::from_polar(self.alpha_mag, phase)
    }

    pub fn sources(&self) -> Vec<Source> {
        self.resources
            .iter()
            .flat_map(|&resource| self.alpha_phases.iter().map(move |&phase| Source { resource, phase }))
            .collect()
    }

    /// Ideal counts requested, expanded and deduplicated, in order.
    pub fn counts(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for c in &self.conditioning {
            match *c {
                Conditioning::M(m) => out.push(m),
                Conditioning::MRange([lo, hi]) => out.extend(lo..=hi),
                _ => {}
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All violated preconditions, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.squeezing_db >= 0.0) || !self.squeezing_db.is_finite() {
            v.push(format!("squeezing_db = {} must be finite and >= 0", self.squeezing_db));
        }
        if !(self.alpha_mag >= 0.0) || !self.alpha_mag.is_finite() {
            v.push(format!("alpha_mag = {} must be finite and >= 0", self.alpha_mag));
        }
        if self.resources.is_empty() {
            v.push("resources must not be empty".into());
        }
        if self.alpha_phases.is_empty() {
            v.push("alpha_phases must not be empty".into());
        }
        if let Some(p) = self.alpha_phases.iter().find(|p| !p.is_finite()) {
            v.push(format!("alpha_phases contains {p}"));
        }
        let c = &self.cutoffs;
        if c.signal == 0 || c.ancilla == 0 {
            v.push("cutoffs.signal and cutoffs.ancilla must be >= 1".into());
        }
        if !(c.deficit_tolerance > 0.0 && c.deficit_tolerance < 1.0) {
            v.push(format!(
                "cutoffs.deficit_tolerance = {} must be in (0, 1)",
                c.deficit_tolerance
            ));
        }
        for cond in &self.conditioning {
            match *cond {
                Conditioning::M(m) if m > c.m_max => {
                    v.push(format!("conditioning m = {m} exceeds cutoffs.m_max = {}", c.m_max))
                }
                Conditioning::MRange([lo, hi]) if lo > hi || hi > c.m_max => v.push(format!(
                    "conditioning m_range [{lo}, {hi}] must be increasing and within m_max = {}",
                    c.m_max
                )),
                Conditioning::V(_) | Conditioning::PosteriorMode(_) if self.detector.is_none() => {
                    v.push(format!("conditioning {cond:?} needs a [detector] section"))
                }
                Conditioning::PosteriorMode(m) if m > c.m_max => {
                    v.push(format!("posterior_mode = {m} exceeds cutoffs.m_max = {}", c.m_max))
                }
                Conditioning::V(x) if !(x >= 0.0) => v.push(format!("conditioning v = {x} must be >= 0")),
                _ => {}
            }
        }
        if let Some(d) = &self.detector {
            match d.model(c.m_max) {
                Err(e) => v.push(format!("detector: {e}")),
                Ok(model) => {
                    let need = DetectorModel::required_v_max(model.excess_noise, c.m_max);
                    if model.v_max + 1e-9 < need {
                        v.push(format!(
                            "detector.v_max = {} does not cover m_max (needs >= {need:.3})",
                            model.v_max
                        ));
                    }
                    for cond in &self.conditioning {
                        if let Conditioning::V(x) = cond {
                            if model.bin_of(*x).is_none() {
                                v.push(format!("conditioning v = {x} lies outside [0, {}]", model.v_max));
                            }
                        }
                    }
                }
            }
            if d.monte_carlo_samples > 0 && d.monte_carlo_samples < 1000 {
                v.push("detector.monte_carlo_samples must be 0 or >= 1000".into());
            }
        }
        let w = &self.wigner;
        if let Some(h) = w.half_width {
            if !(h > 0.0) || !h.is_finite() {
                v.push(format!("wigner.half_width = {h} must be > 0"));
            }
        }
        if let Some(n) = w.points {
            if n < 3 {
                v.push(format!("wigner.points = {n} must be >= 3"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
resources = ["split_squeezed", "epr"]
squeezing_db = 10.0
alpha_mag = 4.0
alpha_phases = [0.0, 1.5707963267948966]
conditioning = [{ m = 24 }, { m_range = [1, 3] }, { posterior_mode = 25 }, { v = 15.3 }]
output = "out/x"
seed = 9

[cutoffs]
signal = 40
ancilla = 70

[detector]
efficiency = 0.9
excess_noise = 1.1
monte_carlo_samples = 100000

[wigner]
convention = "quadrature"
points = 101
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(FULL).unwrap();
        assert_eq!(cfg.sources().len(), 4);
        assert_eq!(cfg.counts(), vec![1, 2, 3, 24]);
        assert_eq!(cfg.cutoffs.m_max, 60);
        assert_eq!(cfg.wigner.convention, WignerConvention::Quadrature);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_toml("squeezing_db = 3\nalpha_mag = 1\n").unwrap();
        assert_eq!(cfg.resources, vec![Resource::SplitSqueezed]);
        assert_eq!(cfg.cutoffs, Cutoffs::default());
        assert!(cfg.detector.is_none());
    }

    #[test]
    fn lists_every_violation() {
        let text = "squeezing_db = -1\nalpha_mag = 2\nconditioning = [{ m = 99 }, { v = 3.0 }]\n";
        let Err(CliError::Config(v)) = ExperimentConfig::from_toml(text) else {
            panic!("expected a config error");
        };
        assert_eq!(v.len(), 3, "{v:?}");
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::from_toml("squeezing_db = 3\nalpha_mag = 1\nsqueezing = 2\n").is_err());
    }
}
