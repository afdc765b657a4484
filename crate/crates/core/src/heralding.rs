//! Ideal heralding: projecting the ancilla onto displaced Fock states.
//!
//! The signal state heralded by outcome `m` is `⟨m|D(α)|ψ⟩_A`, computed as a
//! contraction of the ancilla index of the two-mode amplitude matrix against
//! row `m` of the displacement matrix. Its squared norm is the outcome
//! probability `P(m)`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::displacement::{displacement_element, displacement_row, near_diagonal_approx};
use crate::error::{invalid, Error, Result};
use crate::fock::{split_squeezed_state, FockVector, TwoModeState};
use crate::special::ln_factorial;

/// Heralding probabilities below this are reported but flagged.
pub const DEFAULT_PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    SplitSqueezed,
    Epr,
}

impl Resource {
    pub fn as_str(self) -> &'static str {
        match self {
            Resource::SplitSqueezed => "split_squeezed",
            Resource::Epr => "epr",
        }
    }
}

/// Where an ensemble came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDescriptor {
    pub resource: Resource,
    pub r: f64,
    pub alpha: C64,
    pub signal_cutoff: usize,
    pub ancilla_cutoff: usize,
}

/// One heralding outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Heralded {
    pub m: usize,
    /// Normalized signal state, or the raw zero vector if `probability == 0`.
    pub state: FockVector,
    pub probability: f64,
    /// `probability` fell below the floor; the normalized state is dominated
    /// by truncation noise.
    pub unreliable: bool,
}

fn finish(m: usize, raw: FockVector, floor: f64) -> Heralded {
    let probability = raw.norm_sqr();
    let state = raw.normalized().unwrap_or(raw);
    Heralded {
        m,
        state,
        probability,
        unreliable: probability < floor,
    }
}

fn contract(state: &TwoModeState, row: &[C64]) -> FockVector {
    let amps = state.amplitudes();
    let row = DVector::from_column_slice(row);
    FockVector::from_dvector(amps * row)
}

/// Signal state heralded by the displaced-Fock outcome `m`, with its probability.
pub fn herald_pure(state: &TwoModeState, alpha: C64, m: usize) -> Heralded {
    herald_pure_with_floor(state, alpha, m, DEFAULT_PROBABILITY_FLOOR)
}

pub fn herald_pure_with_floor(state: &TwoModeState, alpha: C64, m: usize, floor: f64) -> Heralded {
    let row = displacement_row(alpha, m, state.ancilla_cutoff());
    finish(m, contract(state, &row), floor)
}

/// `P(m)` for `m = 0..=m_max`, plus the probability mass not accounted for
/// (outcomes above `m_max` and the state's own truncation deficit).
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldDistribution {
    pub probabilities: Vec<f64>,
    pub tail: f64,
}

impl HeraldDistribution {
    /// Argmax, ties broken toward the smaller `m`.
    pub fn modal_m(&self) -> usize {
        modal(&self.probabilities)
    }
}

fn modal(p: &[f64]) -> usize {
    let mut best = 0;
    for (m, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = m;
        }
    }
    best
}

pub fn herald_distribution(state: &TwoModeState, alpha: C64, m_max: usize) -> HeraldDistribution {
    let probabilities: Vec<f64> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let row = displacement_row(alpha, m, state.ancilla_cutoff());
            contract(state, &row).norm_sqr()
        })
        .collect();
    let tail = (1.0 - probabilities.iter().sum::<f64>()).max(0.0);
    HeraldDistribution { probabilities, tail }
}

/// All heralding outcomes `0..=m_max` for one resource and displacement.
#[derive(Debug, Clone)]
pub struct HeraldedEnsemble {
    pub source: SourceDescriptor,
    pub outcomes: Vec<Heralded>,
}

impl HeraldedEnsemble {
    pub fn build(state: &TwoModeState, source: SourceDescriptor, m_max: usize) -> Self {
        Self::build_with_floor(state, source, m_max, DEFAULT_PROBABILITY_FLOOR)
    }

    pub fn build_with_floor(state: &TwoModeState, source: SourceDescriptor, m_max: usize, floor: f64) -> Self {
        let alpha = source.alpha;
        let outcomes = (0..=m_max)
            .into_par_iter()
            .map(|m| herald_pure_with_floor(state, alpha, m, floor))
            .collect();
        Self { source, outcomes }
    }

    pub fn m_max(&self) -> usize {
        self.outcomes.len() - 1
    }

    pub fn get(&self, m: usize) -> Option<&Heralded> {
        self.outcomes.get(m)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|h| h.probability).collect()
    }

    /// `1 − Σ P(m)` over the ensemble.
    pub fn tail_probability(&self) -> f64 {
        (1.0 - self.outcomes.iter().map(|h| h.probability).sum::<f64>()).max(0.0)
    }

    pub fn modal_m(&self) -> usize {
        modal(&self.probabilities())
    }
}

/// `ln |c_J|` for the split-squeezed coefficients, and their sign `(−1)^J`.
fn ln_c(j: usize, r: f64) -> (f64, f64) {
    if j == 0 {
        return (-0.5 * r.cosh().ln(), 1.0);
    }
    let t = r.tanh();
    let ln = -0.5 * r.cosh().ln() + j as f64 * (t / 4.0).ln() - ln_factorial(j);
    (ln, if j % 2 == 0 { 1.0 } else { -1.0 })
}

/// Heralded state from the explicit parity-split double series
///
/// ```text
/// |ψ_m⟩ ∝ Σ_j ( Σ_{k even} c_{j+k/2} (2j+k)!/√((2j)! k!) Δ_mk ) |2j⟩
///        + Σ_j ( Σ_{k odd} c_{j+(k+1)/2} (2j+k+1)!/√((2j+1)! k!) Δ_mk ) |2j+1⟩
/// ```
///
/// for the split squeezed vacuum with θ = 0. Returned unnormalized, so its
/// squared norm is `P(m)`. An independent cross-check of [`herald_pure`], not
/// a production path.
pub fn herald_series_oracle(r: f64, alpha: C64, m: usize, signal_cutoff: usize) -> Result<FockVector> {
    if !(r >= 0.0) {
        return Err(invalid("r", format!("{r} must be >= 0")));
    }
    let x = alpha.norm_sqr();
    let k_max = 2 * (m + x.ceil() as usize) + 4 * signal_cutoff + 400;
    let delta: Vec<C64> = (0..=k_max).map(|k| displacement_element(alpha, m, k)).collect();

    let mut amps = vec![C64::default(); signal_cutoff + 1];
    let mut residual: f64 = 0.0;
    for (n, amp) in amps.iter_mut().enumerate() {
        // n = 2j uses even k, n = 2j + 1 uses odd k; either way n + k = 2J.
        let mut acc = C64::default();
        let mut tail = 0.0;
        let first_k = n % 2;
        for k in (first_k..=k_max).step_by(2) {
            if r == 0.0 && n + k > 0 {
                break;
            }
            let big_j = (n + k) / 2;
            let (ln_cj, sign) = ln_c(big_j, r);
            let ln_coef = ln_cj + ln_factorial(n + k) - 0.5 * (ln_factorial(n) + ln_factorial(k));
            let term = delta[k] * (sign * ln_coef.exp());
            acc += term;
            if k + 40 > k_max {
                tail += term.norm();
            }
        }
        residual = residual.max(tail);
        *amp = acc;
    }
    let psi = FockVector::from_amplitudes(amps);
    let scale = psi.norm_sqr().sqrt();
    if residual > 1e-14 * scale.max(1e-300) {
        return Err(Error::SeriesNotConverged { terms: k_max, residual });
    }
    if scale == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatParity {
    Even,
    Odd,
}

/// Normalized cat state `(|β⟩ ± |−β⟩) / √(2(1 ± e^{−2|β|²}))`.
///
/// The exact normalization is used; `1/√2` is only its large-|β| limit. As
/// β → 0 the even cat tends to `|0⟩` and the odd cat to `e^{i arg β}|1⟩`.
pub fn cat_state(beta: C64, parity: CatParity, cutoff: usize) -> Result<FockVector> {
    cat_state_tol(beta, parity, cutoff, crate::fock::DEFAULT_DEFICIT_TOL)
}

pub fn cat_state_tol(beta: C64, parity: CatParity, cutoff: usize, tol: f64) -> Result<FockVector> {
    let x = beta.norm_sqr();
    let want = match parity {
        CatParity::Even => 0,
        CatParity::Odd => 1,
    };
    if want > cutoff {
        return Err(invalid("cutoff", "odd cat needs cutoff >= 1"));
    }
    let mut amps = vec![C64::default(); cutoff + 1];
    if x == 0.0 {
        amps[want] = C64::new(1.0, 0.0);
        return Ok(FockVector::from_amplitudes(amps));
    }
    // 2 e^{-x/2} β^n/√n! / √(2(1 ± e^{-2x})) = β^n/√n! / √(sinh x) or √(cosh x)
    let ln_norm = match parity {
        CatParity::Even => -0.5 * x.cosh().ln(),
        CatParity::Odd => -0.5 * x.sinh().ln(),
    };
    for n in (want..=cutoff).step_by(2) {
        let ln_mag = ln_norm + n as f64 * beta.norm().ln() - 0.5 * ln_factorial(n);
        amps[n] = C64::from_polar(ln_mag.exp(), n as f64 * beta.arg());
    }
    let psi = FockVector::from_amplitudes(amps);
    let deficit = psi.truncation_deficit();
    if deficit > tol {
        return Err(Error::Truncation {
            cutoff,
            deficit,
            tolerance: tol,
        });
    }
    Ok(psi)
}

/// `|⟨cat(β)|ψ⟩|²`, with the cat parity matching the dominant parity of `ψ`.
pub fn cat_fidelity(psi: &FockVector, beta: C64) -> f64 {
    let (even, odd) = psi.parity_weights();
    let parity = if even >= odd { CatParity::Even } else { CatParity::Odd };
    let cutoff = psi.cutoff().max(1);
    let cat = cat_state_tol(beta, parity, cutoff, 1.0).expect("cutoff >= 1");
    psi.fidelity(&cat).clamp(0.0, 1.0)
}

/// Cat amplitude associated with the α = 0 heralding count `m`:
/// `β = i √(m tanh r / 2)`, with `m` rounded up to even for odd counts.
pub fn cat_limit_beta(r: f64, m: usize) -> C64 {
    let mu = if m % 2 == 0 { m } else { m + 1 };
    C64::new(0.0, (mu as f64 * r.tanh() / 2.0).sqrt())
}

/// Even/odd photon-number weight of a heralded state, relative to the parity
/// of the heralding count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParitySplit {
    pub same: f64,
    pub opposite: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearDiagonalCheck {
    pub delta: i64,
    pub exact: C64,
    pub approx: C64,
    /// `|approx/exact − 1|`
    pub relative_error: f64,
}

/// How the phase of α shapes the heralded state at weak displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRoleReport {
    pub r: f64,
    pub alpha_mag: f64,
    pub m: usize,
    /// `|α|² ≤ m / 10`; outside it the weak-displacement picture is not
    /// expected to hold, but everything is still computed.
    pub weak_displacement: bool,
    /// Displacement along the squeezed quadrature (φ = 0).
    pub real_alpha: ParitySplit,
    /// Displacement along the antisqueezed quadrature (φ = π/2).
    pub imaginary_alpha: ParitySplit,
    pub near_diagonal: Vec<NearDiagonalCheck>,
    /// Fidelity of the φ = π/2 state with the coherent state at its own `⟨a⟩`.
    pub imaginary_coherent_fidelity: f64,
}

pub fn phase_role_diagnostics(
    r: f64,
    alpha_mag: f64,
    m: usize,
    signal_cutoff: usize,
    ancilla_cutoff: usize,
) -> Result<PhaseRoleReport> {
    if !(alpha_mag >= 0.0) {
        return Err(invalid("alpha_mag", format!("{alpha_mag} must be >= 0")));
    }
    let state = split_squeezed_state(r, 0.0, signal_cutoff, ancilla_cutoff)?;
    let split = |h: &Heralded| {
        let (even, odd) = h.state.parity_weights();
        if m % 2 == 0 {
            ParitySplit {
                same: even,
                opposite: odd,
            }
        } else {
            ParitySplit {
                same: odd,
                opposite: even,
            }
        }
    };
    let real = herald_pure(&state, C64::new(alpha_mag, 0.0), m);
    let imag_alpha = C64::new(0.0, alpha_mag);
    let imag = herald_pure(&state, imag_alpha, m);

    let near_diagonal = [-3i64, -2, -1, 1, 2, 3]
        .into_iter()
        .filter(|d| m as i64 + d >= 0)
        .map(|delta| {
            let k = (m as i64 + delta) as usize;
            let exact = displacement_element(C64::new(alpha_mag, 0.0), m, k);
            let approx = near_diagonal_approx(C64::new(alpha_mag, 0.0), m, delta);
            let relative_error = if exact.norm() > 0.0 {
                (approx / exact - 1.0).norm()
            } else {
                f64::INFINITY
            };
            NearDiagonalCheck {
                delta,
                exact,
                approx,
                relative_error,
            }
        })
        .collect();

    let beta = imag.state.mean_annihilation();
    let coherent = FockVector::coherent(beta, imag.state.cutoff());
    Ok(PhaseRoleReport {
        r,
        alpha_mag,
        m,
        weak_displacement: alpha_mag * alpha_mag * 10.0 <= m as f64,
        real_alpha: split(&real),
        imaginary_alpha: split(&imag),
        near_diagonal,
        imaginary_coherent_fidelity: imag.state.fidelity(&coherent),
    })
}
