use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockVector;

/// Single-mode density matrix in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &FockVector) -> Self {
        let v = psi.amplitudes();
        Self { rho: v * v.adjoint() }
    }

    /// Checks squareness and Hermiticity to `1e-10`.
    pub fn from_matrix(rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let out = Self { rho };
        let err = out.hermiticity_error();
        if err > 1e-10 {
            return Err(Error::Dimension(format!("matrix is not Hermitian (error {err:.2e})")));
        }
        Ok(out)
    }

    pub(crate) fn from_matrix_unchecked(rho: DMatrix<C64>) -> Self {
        Self { rho }
    }

    /// `Σ_i w_i |ψ_i⟩⟨ψ_i|`; states are zero padded to the largest cutoff.
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (f64, &'a FockVector)>) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().collect();
        let cutoff = terms
            .iter()
            .map(|(_, psi)| psi.cutoff())
            .max()
            .ok_or_else(|| Error::Dimension("empty mixture".into()))?;
        let dim = cutoff + 1;
        // ρ = B B† with columns √w ψ
        let mut cols = DMatrix::zeros(dim, terms.len());
        for (j, (w, psi)) in terms.iter().enumerate() {
            if *w < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    reason: format!("mixture weight {w} is negative"),
                });
            }
            let s = w.sqrt();
            for n in 0..=psi.cutoff() {
                cols[(n, j)] = psi.amplitude(n) * s;
            }
        }
        Ok(Self {
            rho: &cols * cols.adjoint(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            rho: self.rho.unscale(t),
        })
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Σ_n (−1)^n ρ_nn`.
    pub fn parity(&self) -> f64 {
        self.rho
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, z)| if n % 2 == 0 { z.re } else { -z.re })
            .sum()
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.rho
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.re)
            .sum()
    }

    /// `Tr(ρ a)`.
    pub fn mean_annihilation(&self) -> C64 {
        (1..self.dim()).map(|n| self.rho[(n, n - 1)] * (n as f64).sqrt()).sum()
    }

    /// `Tr(ρ a²)`.
    pub fn mean_annihilation_sq(&self) -> C64 {
        (2..self.dim())
            .map(|n| self.rho[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt())
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.rho.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn fidelity_with_pure(&self, psi: &FockVector) -> f64 {
        let v = psi.resized(self.cutoff());
        let v = v.amplitudes();
        (v.adjoint() * &self.rho * v)[(0, 0)].re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_state_properties() {
        let psi = FockVector::number(1, 4);
        let rho = psi.to_density();
        assert_abs_diff_eq!(rho.trace(), 1.0);
        assert_abs_diff_eq!(rho.purity(), 1.0);
        assert_abs_diff_eq!(rho.parity(), -1.0);
        assert_abs_diff_eq!(FockVector::vacuum(3).to_density().parity(), 1.0);
    }

    #[test]
    fn maximally_mixed() {
        let states: Vec<_> = (0..5).map(|n| FockVector::number(n, 4)).collect();
        let rho = DensityMatrix::mixture(states.iter().map(|s| (0.2, s))).unwrap();
        assert_abs_diff_eq!(rho.purity(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.min_eigenvalue(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn coherent_moments() {
        let beta = C64::new(0.8, -0.3);
        let rho = FockVector::coherent(beta, 40).to_density();
        assert!((rho.mean_annihilation() - beta).norm() < 1e-12);
        assert!((rho.mean_annihilation_sq() - beta * beta).norm() < 1e-12);
    }
}
