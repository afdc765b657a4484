//! Simulation of non-Gaussian optical states heralded by displaced photon
//! counting on one arm of a split squeezed vacuum (or an EPR pair).
//!
//! The pipeline is
//!
//! 1. build a two-mode resource in a truncated Fock basis ([`fock`]),
//! 2. project the ancilla onto displaced Fock states ([`heralding`]), using
//!    the displacement matrix elements of [`displacement`],
//! 3. optionally blur the projection through a lossy, noisy mesoscopic
//!    detector ([`detector`]), which gives mixed heralded states,
//! 4. characterise the result in phase space ([`phasespace`]).
//!
//! ```
//! use mesoherald::{db_to_r, split_squeezed_state, herald_pure, C64};
//!
//! let r = db_to_r(10.0).unwrap();
//! let resource = split_squeezed_state(r, 0.0, 50, 80).unwrap();
//! let outcome = herald_pure(&resource, C64::new(4.0, 0.0), 22);
//! assert!(outcome.state.parity() < -0.4);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod density;
pub mod detector;
pub mod displacement;
mod error;
pub mod fock;
pub mod heralding;
pub mod phasespace;
pub mod special;

pub use num_complex::Complex64 as C64;

pub use density::DensityMatrix;
pub use detector::{
    bin_for_posterior_mode, binomial_response, dark_noise_convolve, detector_response, herald_mixed, posterior,
    DetectorModel, ResponseMatrix, VarianceConvention,
};
pub use displacement::{displacement_element, displacement_matrix, upsilon_operator};
pub use error::{Error, Result};
pub use fock::{db_to_r, epr_state, split_squeezed_state, squeezed_vacuum, FockVector, Operator, TwoModeState};
pub use heralding::{
    cat_fidelity, cat_state, herald_distribution, herald_pure, herald_series_oracle, phase_role_diagnostics, CatParity,
    Heralded, HeraldedEnsemble, Resource, SourceDescriptor,
};
pub use phasespace::{
    negativity_metrics, parity_expectation, purity, wigner, GridSpec, NegativityMetrics, WignerConvention, WignerMap,
};
