//! Truncated Fock-space states and the Gaussian resource states.
//!
//! All amplitudes are built in closed form from log-domain factorial ratios,
//! so cutoffs of a few hundred photons are safe. A "truncation deficit" is the
//! probability mass a nominally normalized state loses to the cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::special::ln_factorial;

/// Default bound on the truncation deficit accepted by the constructors.
pub const DEFAULT_DEFICIT_TOL: f64 = 1e-6;

/// Default signal-mode cutoff.
pub const DEFAULT_SIGNAL_CUTOFF: usize = 50;
/// Default ancilla-mode cutoff; displacement by |α| = 4 pushes population
/// well past the signal default.
pub const DEFAULT_ANCILLA_CUTOFF: usize = 80;

/// Squeezing in dB to the squeezing parameter `r`, with the quadrature
/// variance ratio `e^{-2r} = 10^{-dB/10}`.
pub fn db_to_r(squeezing_db: f64) -> Result<f64> {
    if !(squeezing_db >= 0.0) || !squeezing_db.is_finite() {
        return Err(invalid(
            "squeezing_db",
            format!("{squeezing_db} must be finite and >= 0"),
        ));
    }
    Ok(squeezing_db * std::f64::consts::LN_10 / 20.0)
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("r", format!("{r} must be finite and >= 0")));
    }
    Ok(())
}

fn check_deficit(cutoff: usize, deficit: f64, tolerance: f64) -> Result<()> {
    if deficit > tolerance {
        Err(Error::Truncation {
            cutoff,
            deficit,
            tolerance,
        })
    } else {
        Ok(())
    }
}

/// Single-mode pure state over photon numbers `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "a Fock vector needs at least the vacuum component");
        Self {
            amps: DVector::from_vec(amps),
        }
    }

    pub fn from_dvector(amps: DVector<C64>) -> Self {
        assert!(!amps.is_empty(), "a Fock vector needs at least the vacuum component");
        Self { amps }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::number(0, cutoff)
    }

    /// The Fock state `|n⟩`.
    pub fn number(n: usize, cutoff: usize) -> Self {
        assert!(n <= cutoff);
        let mut amps = DVector::zeros(cutoff + 1);
        amps[n] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Truncated coherent state `|β⟩`, not renormalized.
    pub fn coherent(beta: C64, cutoff: usize) -> Self {
        let x = beta.norm_sqr();
        let amps = (0..=cutoff)
            .map(|n| {
                if n == 0 {
                    return C64::new((-x / 2.0).exp(), 0.0);
                }
                if x == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let mag = (-x / 2.0 + n as f64 * beta.norm().ln() - 0.5 * ln_factorial(n)).exp();
                C64::from_polar(mag, n as f64 * beta.arg())
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// Amplitude on `|n⟩`; zero above the cutoff.
    pub fn amplitude(&self, n: usize) -> C64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn truncation_deficit(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amps: self.amps.unscale(n),
        })
    }

    /// Copy with the cutoff raised (zero padded) or lowered (truncated).
    pub fn resized(&self, cutoff: usize) -> Self {
        let amps = (0..=cutoff).map(|n| self.amplitude(n)).collect();
        Self::from_amplitudes(amps)
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps.iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum()
    }

    /// `Σ (-1)^n |a_n|²`, not divided by the norm.
    pub fn parity(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| if n % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// Probability weight on even and odd photon numbers.
    pub fn parity_weights(&self) -> (f64, f64) {
        let mut even = 0.0;
        let mut odd = 0.0;
        for (n, a) in self.amps.iter().enumerate() {
            if n % 2 == 0 {
                even += a.norm_sqr();
            } else {
                odd += a.norm_sqr();
            }
        }
        (even, odd)
    }

    /// `⟨self|other⟩`, over the common range of photon numbers.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return 0.0;
        }
        self.inner(other).norm_sqr() / denom
    }

    /// `⟨a⟩`.
    pub fn mean_annihilation(&self) -> C64 {
        (1..self.amps.len())
            .map(|n| self.amps[n - 1].conj() * self.amps[n] * (n as f64).sqrt())
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Two-mode pure state; rows index the signal photon number, columns the
/// ancilla photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: DMatrix<C64>,
}

impl TwoModeState {
    pub fn from_matrix(amps: DMatrix<C64>) -> Self {
        assert!(amps.nrows() > 0 && amps.ncols() > 0);
        Self { amps }
    }

    pub fn signal_cutoff(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn ancilla_cutoff(&self) -> usize {
        self.amps.ncols() - 1
    }

    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amps
    }

    pub fn amplitude(&self, n_signal: usize, n_ancilla: usize) -> C64 {
        self.amps.get((n_signal, n_ancilla)).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn truncation_deficit(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    /// Photon-number distribution of the signal mode.
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.amps
            .row_iter()
            .map(|row| row.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Photon-number distribution of the ancilla mode.
    pub fn ancilla_marginal(&self) -> Vec<f64> {
        self.amps
            .column_iter()
            .map(|col| col.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Signal state after tracing out the ancilla.
    pub fn reduced_signal(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(&self.amps * self.amps.adjoint())
    }

    /// Column `k`: the unnormalized signal vector paired with `|k⟩_A`.
    pub fn ancilla_column(&self, k: usize) -> FockVector {
        FockVector::from_dvector(self.amps.column(k).into_owned())
    }
}

/// Square operator in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(entries: DMatrix<C64>) -> Self {
        assert!(entries.is_square());
        Self { entries }
    }

    pub fn cutoff(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &FockVector) -> FockVector {
        let v = psi.resized(self.cutoff());
        FockVector::from_dvector(&self.entries * v.amplitudes())
    }
}

/// Annihilation operator `a` at the given cutoff.
pub fn annihilation(cutoff: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator `a†a` at the given cutoff.
pub fn number_operator(cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_fn(cutoff + 1, |n, _| C64::new(n as f64, 0.0)))
}

/// Single-mode squeezed vacuum `S(ξ)|0⟩`, `ξ = r e^{iθ}`.
///
/// Amplitude on `|2j⟩` is `(-e^{iθ} tanh r)^j √(2j)! / (2^j j! √cosh r)`,
/// the convention of `exp[(ξ* a² − ξ a†²)/2]`; with θ = 0 the x quadrature is
/// the squeezed one.
pub fn squeezed_vacuum(r: f64, theta: f64, cutoff: usize) -> Result<FockVector> {
    squeezed_vacuum_tol(r, theta, cutoff, DEFAULT_DEFICIT_TOL)
}

pub fn squeezed_vacuum_tol(r: f64, theta: f64, cutoff: usize, tol: f64) -> Result<FockVector> {
    check_r(r)?;
    let t = r.tanh();
    let ln_norm = -0.5 * r.cosh().ln();
    let mut amps = vec![C64::default(); cutoff + 1];
    amps[0] = C64::new(ln_norm.exp(), 0.0);
    if t > 0.0 {
        for j in 1..=cutoff / 2 {
            let jf = j as f64;
            let ln_mag = ln_norm + jf * (t / 2.0).ln() + 0.5 * ln_factorial(2 * j) - ln_factorial(j);
            // (-1)^j e^{ijθ}
            let phase = jf * theta + if j % 2 == 1 { std::f64::consts::PI } else { 0.0 };
            amps[2 * j] = C64::from_polar(ln_mag.exp(), phase);
        }
    }
    let psi = FockVector::from_amplitudes(amps);
    check_deficit(cutoff, psi.truncation_deficit(), tol)?;
    Ok(psi)
}

/// Squeezed vacuum split on a 50:50 beam splitter, `Σ_j c_j (a_A† + a_S†)^{2j}|vac⟩`
/// with `c_j = (-e^{iθ} tanh r)^j / (4^j j! √cosh r)`.
///
/// The amplitude of `|s⟩_S|k⟩_A` is `c_J (2J)! / √(s! k!)` with `2J = s + k`;
/// odd totals are exactly zero.
pub fn split_squeezed_state(r: f64, theta: f64, signal_cutoff: usize, ancilla_cutoff: usize) -> Result<TwoModeState> {
    split_squeezed_state_tol(r, theta, signal_cutoff, ancilla_cutoff, DEFAULT_DEFICIT_TOL)
}

pub fn split_squeezed_state_tol(
    r: f64,
    theta: f64,
    signal_cutoff: usize,
    ancilla_cutoff: usize,
    tol: f64,
) -> Result<TwoModeState> {
    check_r(r)?;
    let t = r.tanh();
    let ln_norm = -0.5 * r.cosh().ln();
    let ln_t4 = (t / 4.0).ln();
    let amps = DMatrix::from_fn(signal_cutoff + 1, ancilla_cutoff + 1, |s, k| {
        let total = s + k;
        if total % 2 == 1 {
            return C64::default();
        }
        let j = total / 2;
        if j == 0 {
            return C64::new(ln_norm.exp(), 0.0);
        }
        if t == 0.0 {
            return C64::default();
        }
        let ln_mag = ln_norm + j as f64 * ln_t4 - ln_factorial(j) + ln_factorial(total)
            - 0.5 * (ln_factorial(s) + ln_factorial(k));
        let phase = j as f64 * theta + if j % 2 == 1 { std::f64::consts::PI } else { 0.0 };
        C64::from_polar(ln_mag.exp(), phase)
    });
    let state = TwoModeState::from_matrix(amps);
    check_deficit(signal_cutoff.min(ancilla_cutoff), state.truncation_deficit(), tol)?;
    Ok(state)
}

/// Two-mode squeezed (EPR) state `exp(r a_S a_A − r a_S† a_A†)|vac⟩`.
///
/// Amplitude of `|n, n⟩` is `(-tanh r)^n / cosh r`; all off-diagonal
/// amplitudes are exactly zero.
pub fn epr_state(r: f64, cutoff: usize) -> Result<TwoModeState> {
    epr_state_tol(r, cutoff, cutoff, DEFAULT_DEFICIT_TOL)
}

/// EPR state on a rectangular grid; the diagonal runs to the smaller cutoff.
pub fn epr_state_tol(r: f64, signal_cutoff: usize, ancilla_cutoff: usize, tol: f64) -> Result<TwoModeState> {
    check_r(r)?;
    let t = r.tanh();
    let c = r.cosh();
    let mut amps = DMatrix::zeros(signal_cutoff + 1, ancilla_cutoff + 1);
    let mut coef = 1.0 / c;
    for n in 0..=signal_cutoff.min(ancilla_cutoff) {
        amps[(n, n)] = C64::new(coef, 0.0);
        coef *= -t;
    }
    let state = TwoModeState::from_matrix(amps);
    check_deficit(signal_cutoff.min(ancilla_cutoff), state.truncation_deficit(), tol)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_r(0.0).unwrap(), 0.0);
        let r10 = db_to_r(10.0).unwrap();
        assert_abs_diff_eq!(r10, 1.151_292_546_497_022_8, epsilon = 1e-12);
        assert_abs_diff_eq!((-2.0 * r10).exp(), 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(db_to_r(20.0).unwrap(), std::f64::consts::LN_10, epsilon = 1e-12);
        assert!(db_to_r(-1.0).is_err());
        assert!(db_to_r(f64::NAN).is_err());
    }

    #[test]
    fn squeezed_vacuum_basics() {
        let vac = squeezed_vacuum(0.0, 0.0, 10).unwrap();
        assert_eq!(vac, FockVector::vacuum(10));

        let r = db_to_r(10.0).unwrap();
        let psi = squeezed_vacuum(r, 0.0, 120).unwrap();
        assert!(psi.truncation_deficit() < 1e-6);
        assert_abs_diff_eq!(psi.mean_photon_number(), r.sinh().powi(2), epsilon = 1e-4);
        for n in (1..=120).step_by(2) {
            assert_eq!(psi.amplitude(n), C64::default());
        }
        for &r in &[0.1, 0.7, r] {
            let psi = squeezed_vacuum(r, 0.0, 200).unwrap();
            let ratio = psi.amplitude(2) / psi.amplitude(0);
            assert_abs_diff_eq!(ratio.re, -r.tanh() / 2f64.sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(ratio.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn insufficient_cutoff_reports_deficit() {
        let r = db_to_r(10.0).unwrap();
        match squeezed_vacuum(r, 0.0, 10) {
            Err(Error::Truncation { deficit, cutoff, .. }) => {
                assert_eq!(cutoff, 10);
                assert!(deficit > 1e-3);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        assert!(epr_state(r, 5).is_err());
        assert!(squeezed_vacuum(-0.1, 0.0, 10).is_err());
    }

    #[test]
    fn split_state_rules() {
        let vac = split_squeezed_state(0.0, 0.0, 4, 4).unwrap();
        assert_eq!(vac.amplitude(0, 0), C64::new(1.0, 0.0));
        assert_abs_diff_eq!(vac.norm_sqr(), 1.0);

        let r = db_to_r(10.0).unwrap();
        let st = split_squeezed_state(r, 0.0, 50, 80).unwrap();
        assert_eq!(st.amplitude(1, 0), C64::default());
        assert_eq!(st.amplitude(0, 1), C64::default());
        // 2 c_1 / c_0 with c_1/c_0 = -tanh r / 4
        let ratio = st.amplitude(1, 1) / st.amplitude(0, 0);
        assert_abs_diff_eq!(ratio.re, -r.tanh() / 2.0, epsilon = 1e-14);
        for s in 0..=50 {
            for k in 0..=80 {
                if (s + k) % 2 == 1 {
                    assert_eq!(st.amplitude(s, k), C64::default());
                }
            }
        }
        let sym = split_squeezed_state(r, 0.0, 60, 60).unwrap();
        let sm = sym.signal_marginal();
        let am = sym.ancilla_marginal();
        for n in 0..=40 {
            assert_abs_diff_eq!(sm[n], am[n], epsilon = 1e-12);
        }
    }

    #[test]
    fn epr_rules() {
        let r = db_to_r(10.0).unwrap();
        let st = epr_state(r, 120).unwrap();
        let t2 = r.tanh().powi(2);
        for n in 0..60 {
            let p0 = st.amplitude(n, n).norm_sqr();
            let p1 = st.amplitude(n + 1, n + 1).norm_sqr();
            assert_abs_diff_eq!(p1 / p0, t2, epsilon = 1e-12);
            assert_eq!(st.amplitude(n, n + 1), C64::default());
        }
        let reduced = st.reduced_signal();
        let expected = 1.0 / (2.0 * r.sinh().powi(2) + 1.0);
        assert_abs_diff_eq!(reduced.parity(), expected, epsilon = 1e-8);
    }

    #[test]
    fn deficit_never_grows_with_cutoff() {
        let r = 0.9;
        let mut last = f64::INFINITY;
        for n in (10..80).step_by(3) {
            let d = squeezed_vacuum_tol(r, 0.0, n, 1.0).unwrap().truncation_deficit();
            assert!(d <= last);
            last = d;
        }
    }
}
