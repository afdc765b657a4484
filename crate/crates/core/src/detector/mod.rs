//! Mesoscopic detector model: binomial loss, Gaussian amplification noise and
//! dark-noise broadening, combined into a response matrix `P(V|m)` on a
//! discrete grid of normalized output values `v = V/⟨M⟩`.
//!
//! The conditioned signal state for an output bin is the posterior-weighted
//! mixture of the ideal heralded states.

mod config;
pub mod sampling;

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::heralding::HeraldedEnsemble;
use crate::special::ln_binomial;

pub const DEFAULT_DV: f64 = 0.1;

/// Variance of the amplified output for `b` absorbed photons, in `v` units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceConvention {
    /// `exp(−(v−b)² / (b(F_e−1)))`, i.e. variance `b(F_e−1)/2`.
    #[default]
    AsPrinted,
    /// Variance `b(F_e−1)`, i.e. `b Var(M)/⟨M⟩²`.
    Classical,
}

impl VarianceConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            VarianceConvention::AsPrinted => "as-printed",
            VarianceConvention::Classical => "classical",
        }
    }

    /// Output variance per absorbed photon.
    pub fn per_carrier(self, excess_noise: f64) -> f64 {
        match self {
            VarianceConvention::AsPrinted => (excess_noise - 1.0) / 2.0,
            VarianceConvention::Classical => excess_noise - 1.0,
        }
    }
}

impl std::str::FromStr for VarianceConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "as-printed" | "as_printed" => Ok(VarianceConvention::AsPrinted),
            "classical" => Ok(VarianceConvention::Classical),
            other => Err(Error::Config(format!(
                "unknown variance_convention `{other}` (expected as-printed or classical)"
            ))),
        }
    }
}

/// Detector parameters and the output grid.
///
/// The grid has bin centres `0, dv, 2dv, …` up to `v_max`; `v = 0` is always
/// a bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub excess_noise: f64,
    /// Mean gain `⟨M⟩`, carriers per absorbed photon. Only used to convert raw
    /// outputs to `v`.
    pub mean_gain: f64,
    pub dark_sigma: f64,
    pub v_max: f64,
    pub dv: f64,
    #[serde(default)]
    pub variance_convention: VarianceConvention,
}

impl DetectorModel {
    pub fn new(
        efficiency: f64,
        excess_noise: f64,
        mean_gain: f64,
        dark_sigma: f64,
        v_max: f64,
        dv: f64,
        variance_convention: VarianceConvention,
    ) -> Result<Self> {
        let model = Self {
            efficiency,
            excess_noise,
            mean_gain,
            dark_sigma,
            v_max,
            dv,
            variance_convention,
        };
        model.validate()?;
        Ok(model)
    }

    /// Default grid (`dv = 0.1`, `v_max = m_max + 5√(m_max(F_e−1))`), unit
    /// gain, no dark noise.
    pub fn for_conditioning(efficiency: f64, excess_noise: f64, m_max: usize) -> Result<Self> {
        let v_max = Self::required_v_max(excess_noise, m_max);
        Self::new(
            efficiency,
            excess_noise,
            1.0,
            0.0,
            v_max,
            DEFAULT_DV,
            VarianceConvention::default(),
        )
    }

    pub fn required_v_max(excess_noise: f64, m_max: usize) -> f64 {
        let m = m_max as f64;
        m + 5.0 * (m * (excess_noise - 1.0).max(0.0)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(invalid("efficiency", format!("{} not in [0, 1]", self.efficiency)));
        }
        if !(self.excess_noise >= 1.0) || !self.excess_noise.is_finite() {
            return Err(invalid("excess_noise", format!("{} must be >= 1", self.excess_noise)));
        }
        if !(self.mean_gain > 0.0) || !self.mean_gain.is_finite() {
            return Err(invalid("mean_gain", format!("{} must be > 0", self.mean_gain)));
        }
        if !(self.dark_sigma >= 0.0) || !self.dark_sigma.is_finite() {
            return Err(invalid("dark_sigma", format!("{} must be >= 0", self.dark_sigma)));
        }
        if !(self.dv > 0.0) || !self.dv.is_finite() {
            return Err(invalid("dv", format!("{} must be > 0", self.dv)));
        }
        if !(self.v_max >= 0.0) || !self.v_max.is_finite() {
            return Err(invalid("v_max", format!("{} must be >= 0", self.v_max)));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        (self.v_max / self.dv + 1e-9).floor() as usize + 1
    }

    pub fn v_grid(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|i| i as f64 * self.dv).collect()
    }

    /// Nearest bin to `v`, or `None` off the grid.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let i = (v / self.dv).round();
        if i < 0.0 || i as usize >= self.n_bins() {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Raw output `V` (carriers) to the normalized value `V/⟨M⟩`.
    pub fn normalize_output(&self, raw: f64) -> f64 {
        raw / self.mean_gain
    }

    /// Amplification standard deviation for `b` absorbed photons.
    pub fn gain_sigma(&self, b: usize) -> f64 {
        (b as f64 * self.variance_convention.per_carrier(self.excess_noise)).sqrt()
    }
}

/// `P(b|m) = C(m,b) ε^b (1−ε)^{m−b}` for `b = 0..=m`.
pub fn binomial_response(efficiency: f64, m: usize) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&efficiency), "efficiency out of range");
    if efficiency == 1.0 || efficiency == 0.0 {
        let mut out = vec![0.0; m + 1];
        out[if efficiency == 1.0 { m } else { 0 }] = 1.0;
        return out;
    }
    let (le, lq) = (efficiency.ln(), (1.0 - efficiency).ln());
    (0..=m)
        .map(|b| (ln_binomial(m, b) + b as f64 * le + (m - b) as f64 * lq).exp())
        .collect()
}

fn normalize(col: &mut [f64]) {
    let s: f64 = col.iter().sum();
    if s > 0.0 {
        col.iter_mut().for_each(|x| *x /= s);
    }
}

/// `P(v|b)` on the model's grid, before dark noise.
///
/// For `b ≥ 1` a Gaussian centred at `b` sampled at the bin centres and
/// renormalized; if its width is far below the bin spacing it collapses onto
/// the nearest bin. For `b = 0` all mass sits in the `v = 0` bin.
pub fn amplification_response(model: &DetectorModel, b: usize) -> Result<Vec<f64>> {
    let n = model.n_bins();
    let mut col = vec![0.0; n];
    let sigma = model.gain_sigma(b);
    let centre = b as f64;
    if b == 0 || sigma < 1e-3 * model.dv {
        let bin = model.bin_of(centre).ok_or(Error::GridCoverage {
            m_max: b,
            v_max: model.v_max,
            required: centre,
        })?;
        col[bin] = 1.0;
        return Ok(col);
    }
    let two_var = 2.0 * sigma * sigma;
    for (i, c) in col.iter_mut().enumerate() {
        let v = i as f64 * model.dv;
        *c = (-(v - centre).powi(2) / two_var).exp();
    }
    if col.iter().sum::<f64>() == 0.0 {
        return Err(Error::GridCoverage {
            m_max: b,
            v_max: model.v_max,
            required: centre,
        });
    }
    normalize(&mut col);
    Ok(col)
}

/// Convolves a column with a zero-mean Gaussian of width `sigma` (in `v`
/// units) and renormalizes on the grid.
pub fn dark_noise_convolve(resp: &[f64], sigma: f64, dv: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return resp.to_vec();
    }
    let half = (8.0 * sigma / dv).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let x = (i as f64 - half as f64) * dv;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    normalize(&mut kernel);
    let n = resp.len();
    let mut out = vec![0.0; n];
    for (j, &w) in resp.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (i, &k) in kernel.iter().enumerate() {
            let target = j as i64 + i as i64 - half as i64;
            if (0..n as i64).contains(&target) {
                out[target as usize] += w * k;
            }
        }
    }
    normalize(&mut out);
    out
}

/// `P(v|m)` for `m = 0..=m_max`; columns sum to one over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    dv: f64,
    columns: Vec<Vec<f64>>,
}

impl ResponseMatrix {
    pub fn m_max(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn n_bins(&self) -> usize {
        self.columns[0].len()
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn v(&self, bin: usize) -> f64 {
        bin as f64 * self.dv
    }

    pub fn column(&self, m: usize) -> &[f64] {
        &self.columns[m]
    }

    pub fn likelihood(&self, bin: usize, m: usize) -> f64 {
        self.columns[m][bin]
    }

    /// `Σ_{bins} P(v|m)` over a window of bins.
    pub fn window_likelihood(&self, bins: &RangeInclusive<usize>, m: usize) -> f64 {
        self.columns[m][bins.clone()].iter().sum()
    }

    /// Mean and variance of column `m` in `v` units.
    pub fn column_moments(&self, m: usize) -> (f64, f64) {
        let col = &self.columns[m];
        let mean: f64 = col.iter().enumerate().map(|(i, p)| p * self.v(i)).sum();
        let var = col
            .iter()
            .enumerate()
            .map(|(i, p)| p * (self.v(i) - mean).powi(2))
            .sum();
        (mean, var)
    }

    /// `P(V) = Σ_m P(V|m) P(m)` per bin.
    pub fn evidence(&self, prior: &[f64]) -> Vec<f64> {
        (0..self.n_bins())
            .map(|bin| prior.iter().zip(&self.columns).map(|(p, col)| p * col[bin]).sum())
            .collect()
    }
}

/// Full response: `P(v|m) = Σ_b P(v|b) P(b|m)`, then dark-noise broadening.
pub fn detector_response(model: &DetectorModel, m_max: usize) -> Result<ResponseMatrix> {
    model.validate()?;
    let required = DetectorModel::required_v_max(model.excess_noise, m_max);
    if model.v_max + 1e-9 < required {
        return Err(Error::GridCoverage {
            m_max,
            v_max: model.v_max,
            required,
        });
    }
    let amp: Vec<Vec<f64>> = (0..=m_max)
        .into_par_iter()
        .map(|b| amplification_response(model, b))
        .collect::<Result<_>>()?;
    let n = model.n_bins();
    let columns = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let pb = binomial_response(model.efficiency, m);
            let mut col = vec![0.0; n];
            for (b, w) in pb.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                for (c, a) in col.iter_mut().zip(&amp[b]) {
                    *c += w * a;
                }
            }
            let mut col = dark_noise_convolve(&col, model.dark_sigma, model.dv);
            normalize(&mut col);
            col
        })
        .collect();
    Ok(ResponseMatrix { dv: model.dv, columns })
}

/// `P(m|V) = P(V|m) P(m) / P(V)` for a single output bin.
pub fn posterior(response: &ResponseMatrix, prior: &[f64], v_bin: usize) -> Result<Vec<f64>> {
    posterior_window(response, prior, v_bin..=v_bin)
}

/// Posterior for the event "output fell in any of `bins`".
pub fn posterior_window(response: &ResponseMatrix, prior: &[f64], bins: RangeInclusive<usize>) -> Result<Vec<f64>> {
    if prior.len() > response.m_max() + 1 {
        return Err(Error::Dimension(format!(
            "prior covers m = 0..{} but the response only 0..={}",
            prior.len(),
            response.m_max()
        )));
    }
    if *bins.end() >= response.n_bins() || bins.is_empty() {
        return Err(invalid("v_bin", format!("{bins:?} outside 0..{}", response.n_bins())));
    }
    let joint: Vec<f64> = prior
        .iter()
        .enumerate()
        .map(|(m, p)| p * response.window_likelihood(&bins, m))
        .collect();
    let evidence: f64 = joint.iter().sum();
    if !(evidence > 0.0) {
        return Err(Error::ZeroEvidence { bin: *bins.start() });
    }
    Ok(joint.into_iter().map(|j| j / evidence).collect())
}

/// The output bin whose posterior is most concentrated on `target_m` among
/// those whose posterior mode is `target_m`.
pub fn bin_for_posterior_mode(response: &ResponseMatrix, prior: &[f64], target_m: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for bin in 0..response.n_bins() {
        let Ok(post) = posterior(response, prior, bin) else {
            continue;
        };
        let mode = post
            .iter()
            .enumerate()
            .fold(0, |best, (m, &p)| if p > post[best] { m } else { best });
        if mode == target_m && best.is_none_or(|(_, w)| post[target_m] > w) {
            best = Some((bin, post[target_m]));
        }
    }
    best.map(|(bin, _)| bin)
}

/// Conditioned signal state `Σ_m P(m|V) |ψ_m⟩⟨ψ_m|` for an output bin.
pub fn herald_mixed(ensemble: &HeraldedEnsemble, response: &ResponseMatrix, v_bin: usize) -> Result<DensityMatrix> {
    herald_mixed_window(ensemble, response, v_bin..=v_bin)
}

pub fn herald_mixed_window(
    ensemble: &HeraldedEnsemble,
    response: &ResponseMatrix,
    bins: RangeInclusive<usize>,
) -> Result<DensityMatrix> {
    let m_max = ensemble.m_max().min(response.m_max());
    let prior: Vec<f64> = ensemble.probabilities()[..=m_max].to_vec();
    let post = posterior_window(response, &prior, bins)?;
    mixture_from_posterior(ensemble, &post)
}

/// `Σ_m w_m |ψ_m⟩⟨ψ_m|` with weights over the ensemble's outcomes.
pub fn mixture_from_posterior(ensemble: &HeraldedEnsemble, weights: &[f64]) -> Result<DensityMatrix> {
    let terms = weights
        .iter()
        .zip(&ensemble.outcomes)
        .filter(|(w, h)| **w > 0.0 && h.probability > 0.0)
        .map(|(w, h)| (*w, &h.state));
    let rho = DensityMatrix::mixture(terms)?;
    rho.normalized()
}
