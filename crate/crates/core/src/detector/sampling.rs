//! Direct Monte-Carlo sampling of the detector chain, used to cross-check
//! [`detector_response`](super::detector_response).
//!
//! Each trial draws the absorbed count from a binomial, gives every absorbed
//! photon an independent Gaussian gain of unit mean, sums, adds dark noise,
//! and bins to the nearest grid centre. Trials landing off the grid are
//! dropped, matching the renormalization of the analytic response.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use super::DetectorModel;

/// Normalized histogram of `samples` trials for an `m`-photon input.
pub fn sample_response<R: Rng + ?Sized>(model: &DetectorModel, m: usize, samples: usize, rng: &mut R) -> Vec<f64> {
    let n = model.n_bins();
    let mut hist = vec![0u64; n];
    let absorbed = Binomial::new(m as u64, model.efficiency).expect("efficiency validated");
    let per_carrier = model.variance_convention.per_carrier(model.excess_noise).sqrt();
    let gain = Normal::new(1.0, per_carrier).expect("finite width");
    let dark = Normal::new(0.0, model.dark_sigma).expect("finite width");
    let mut kept = 0u64;
    for _ in 0..samples {
        let b = absorbed.sample(rng);
        let mut v: f64 = (0..b).map(|_| gain.sample(rng)).sum();
        if model.dark_sigma > 0.0 {
            v += dark.sample(rng);
        }
        if let Some(bin) = model.bin_of(v) {
            hist[bin] += 1;
            kept += 1;
        }
    }
    hist.into_iter()
        .map(|c| if kept == 0 { 0.0 } else { c as f64 / kept as f64 })
        .collect()
}
