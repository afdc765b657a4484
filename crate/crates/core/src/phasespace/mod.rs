//! Wigner functions, parity and negativity for single-mode states.
//!
//! Grids are laid out in quadrature units `x = √2 Re γ`, `p = √2 Im γ`
//! (vacuum variance ½). The value scale depends on [`WignerConvention`]:
//!
//! * `ComplexAmplitude`: `W(γ) = (2/π) Tr[ρ D(γ) Π D†(γ)]`, a density in the
//!   complex-amplitude plane (`∫ W d²γ = 1`, `d²γ = dx dp / 2`). Vacuum peaks
//!   at `2/π`.
//! * `Quadrature`: `W(x, p) = (1/π) Tr[ρ D(γ) Π D†(γ)]`, a density in `(x, p)`.
//!
//! Either way `parity = convention_constant · W(0, 0)`, and integrals over
//! the map (normalization, negativity volume) use the convention's own
//! measure, so they agree between conventions.

mod io;

pub use io::{read_binary, write_binary, write_csv};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerConvention {
    #[default]
    ComplexAmplitude,
    Quadrature,
}

impl WignerConvention {
    /// `parity / W(0,0)`.
    pub fn constant(self) -> f64 {
        match self {
            WignerConvention::ComplexAmplitude => std::f64::consts::FRAC_PI_2,
            WignerConvention::Quadrature => std::f64::consts::PI,
        }
    }

    /// Integration measure per unit `dx dp`.
    pub fn measure(self) -> f64 {
        match self {
            WignerConvention::ComplexAmplitude => 0.5,
            WignerConvention::Quadrature => 1.0,
        }
    }

    pub fn from_constant(c: f64) -> Option<Self> {
        [WignerConvention::ComplexAmplitude, WignerConvention::Quadrature]
            .into_iter()
            .find(|conv| (conv.constant() - c).abs() < 1e-12)
    }
}

/// Rectangular grid in quadrature units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for GridSpec {
    /// 201 × 201 over ±6.
    fn default() -> Self {
        Self::square(6.0, 201)
    }
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        }
    }

    /// Grid covering the state: at least the default ±6, widened to six
    /// standard deviations beyond the quadrature means but no further than
    /// five units past the turning radius `√(2n+1)` of the highest occupied
    /// Fock level `n`. The spacing resolves that level. Odd point counts keep
    /// the origin on the grid.
    pub fn auto(rho: &DensityMatrix) -> Self {
        let a = rho.mean_annihilation();
        let a2 = rho.mean_annihilation_sq();
        let n = rho.mean_photon_number();
        // ⟨x⟩ = √2 Re⟨a⟩, ⟨x²⟩ = Re⟨a²⟩ + n + ½
        let mx = std::f64::consts::SQRT_2 * a.re;
        let mp = std::f64::consts::SQRT_2 * a.im;
        let vx = (a2.re + n + 0.5 - mx * mx).max(0.0);
        let vp = (-a2.re + n + 0.5 - mp * mp).max(0.0);
        let hx = (mx.abs() + 6.0 * vx.sqrt()).max(6.0);
        let hp = (mp.abs() + 6.0 * vp.sqrt()).max(6.0);
        let top = rho.photon_distribution().iter().rposition(|p| *p > 1e-10).unwrap_or(0);
        let half = hx.max(hp).min((2.0 * top as f64 + 1.0).sqrt() + 5.0).max(6.0);
        let step = 0.6 / (2.0 * top as f64 + 1.0).sqrt();
        let mut pts = ((2.0 * half / step).ceil() as usize + 1).max(201);
        if pts % 2 == 0 {
            pts += 1;
        }
        Self::square(half, pts)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 {
            return Err(invalid("grid", "need at least 2 points per axis"));
        }
        if !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(invalid("grid", "ranges must be increasing"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn p(&self, ip: usize) -> f64 {
        self.p_min + ip as f64 * self.dp()
    }
}

/// Sampled Wigner function, row-major with `x` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    grid: GridSpec,
    convention: WignerConvention,
    values: Vec<f64>,
}

impl WignerMap {
    pub fn from_values(grid: GridSpec, convention: WignerConvention, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.nx * grid.np {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.np
            )));
        }
        Ok(Self {
            grid,
            convention,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn convention(&self) -> WignerConvention {
        self.convention
    }

    pub fn convention_constant(&self) -> f64 {
        self.convention.constant()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.grid.np + ip]
    }

    /// Integration weight of one grid cell.
    pub fn cell_measure(&self) -> f64 {
        self.grid.dx() * self.grid.dp() * self.convention.measure()
    }

    /// Trapezoidal integral of `f(W)` over the grid.
    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let mut acc = 0.0;
        for ix in 0..nx {
            let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
            for ip in 0..np {
                let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
                acc += wx * wp * f(self.value(ix, ip));
            }
        }
        acc * self.cell_measure()
    }

    pub fn integral(&self) -> f64 {
        self.integrate(|w| w)
    }

    /// Value at the grid point nearest `(x, p)`.
    pub fn nearest(&self, x: f64, p: f64) -> f64 {
        let ix = ((x - self.grid.x_min) / self.grid.dx())
            .round()
            .clamp(0.0, (self.grid.nx - 1) as f64);
        let ip = ((p - self.grid.p_min) / self.grid.dp())
            .round()
            .clamp(0.0, (self.grid.np - 1) as f64);
        self.value(ix as usize, ip as usize)
    }
}

/// Kernel sum `Tr[ρ D(γ) Π D†(γ)]` at one phase-space point.
///
/// Uses the three-term Fock-basis recurrence for the displaced-parity
/// elements (equivalent to generalized Laguerre polynomials), started from
/// `e^{−2|γ|²}`; no factorials are formed.
fn displaced_parity(rho: &DensityMatrix, gamma: C64, work: &mut Vec<C64>, roots: &Roots) -> f64 {
    let r = rho.matrix();
    let dim = rho.dim();
    work.clear();
    work.resize(dim, C64::default());
    let two_g = gamma * 2.0;
    let two_gc = gamma.conj() * 2.0;
    work[0] = C64::new((-2.0 * gamma.norm_sqr()).exp(), 0.0);
    let mut acc = r[(0, 0)] * work[0];
    for n in 1..dim {
        work[n] = two_g * work[n - 1] * roots.inv[n];
        acc += r[(0, n)] * work[n] * 2.0;
    }
    for m in 1..dim {
        let (sm, ism) = (roots.sqrt[m], roots.inv[m]);
        let mut temp = work[m];
        work[m] = (two_gc * temp - work[m - 1] * sm) * ism;
        acc += r[(m, m)] * work[m];
        let col = r.column(m);
        for n in m + 1..dim {
            let next = (two_g * work[n - 1] - temp * sm) * roots.inv[n];
            temp = work[n];
            work[n] = next;
            // ρ_mn = conj(ρ_nm); the column slice is contiguous
            acc += col[n].conj() * next * 2.0;
        }
    }
    // upper-triangle terms were doubled; for Hermitian ρ the sum is real
    acc.re
}

struct Roots {
    sqrt: Vec<f64>,
    inv: Vec<f64>,
}

impl Roots {
    fn new(dim: usize) -> Self {
        let sqrt: Vec<f64> = (0..dim).map(|n| (n as f64).sqrt()).collect();
        let inv = sqrt.iter().map(|s| if *s > 0.0 { 1.0 / s } else { 0.0 }).collect();
        Self { sqrt, inv }
    }
}

/// Pointwise Wigner value at quadratures `(x, p)`.
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64, convention: WignerConvention) -> f64 {
    let gamma = C64::new(x, p) / std::f64::consts::SQRT_2;
    let mut work = Vec::new();
    displaced_parity(rho, gamma, &mut work, &Roots::new(rho.dim())) / convention.constant()
}

/// Wigner function of `rho` sampled on `grid`.
///
/// Fails if `rho` is not unit trace to `1e-6` or not Hermitian to `1e-12`.
pub fn wigner(rho: &DensityMatrix, grid: &GridSpec, convention: WignerConvention) -> Result<WignerMap> {
    grid.validate()?;
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-6 {
        return Err(invalid("rho", format!("trace {tr} is not 1")));
    }
    let herm = rho.hermiticity_error();
    if herm > 1e-12 {
        return Err(invalid("rho", format!("not Hermitian (error {herm:.2e})")));
    }
    let c = convention.constant();
    let roots = Roots::new(rho.dim());
    let values = (0..grid.nx * grid.np)
        .into_par_iter()
        .map_init(Vec::new, |work, idx| {
            let (ix, ip) = (idx / grid.np, idx % grid.np);
            let gamma = C64::new(grid.x(ix), grid.p(ip)) / std::f64::consts::SQRT_2;
            displaced_parity(rho, gamma, work, &roots) / c
        })
        .collect();
    WignerMap::from_values(*grid, convention, values)
}

/// `Σ_n (−1)^n ρ_nn`.
pub fn parity_expectation(rho: &DensityMatrix) -> f64 {
    rho.parity()
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityMetrics {
    pub min_value: f64,
    /// `(x, p)` of the minimum.
    pub min_location: (f64, f64),
    /// `∫∫ max(−W, 0)` in the map's own measure.
    pub negativity_volume: f64,
    /// The minimum sits on the grid edge; the grid is probably too small.
    pub min_on_boundary: bool,
}

pub fn negativity_metrics(map: &WignerMap) -> NegativityMetrics {
    let g = map.grid();
    let mut best = (0, 0, f64::INFINITY);
    for ix in 0..g.nx {
        for ip in 0..g.np {
            let w = map.value(ix, ip);
            if w < best.2 {
                best = (ix, ip, w);
            }
        }
    }
    let (ix, ip, min_value) = best;
    NegativityMetrics {
        min_value,
        min_location: (g.x(ix), g.p(ip)),
        negativity_volume: map.integrate(|w| (-w).max(0.0)),
        min_on_boundary: min_value < 0.0 && (ix == 0 || ip == 0 || ix == g.nx - 1 || ip == g.np - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockVector;
    use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

    #[test]
    fn vacuum_and_single_photon_at_origin() {
        let conv = WignerConvention::ComplexAmplitude;
        let vac = FockVector::vacuum(4).to_density();
        assert!((wigner_at(&vac, 0.0, 0.0, conv) - FRAC_2_PI).abs() < 1e-14);
        let one = FockVector::number(1, 4).to_density();
        assert!((wigner_at(&one, 0.0, 0.0, conv) + FRAC_2_PI).abs() < 1e-14);
        assert!((wigner_at(&vac, 0.0, 0.0, WignerConvention::Quadrature) - 1.0 / PI).abs() < 1e-14);
        // vacuum is (2/π) e^{-(x² + p²)} in this layout
        let v = wigner_at(&vac, 0.7, -0.4, conv);
        assert!((v - FRAC_2_PI * (-(0.49f64 + 0.16)).exp()).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_peak() {
        let psi = FockVector::coherent(C64::new(1.0, 0.0), 40);
        let map = wigner(
            &psi.to_density(),
            &GridSpec::square(4.0, 201),
            WignerConvention::ComplexAmplitude,
        )
        .unwrap();
        let m = map
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let (ix, ip) = (m.0 / 201, m.0 % 201);
        assert!((map.grid().x(ix) - SQRT_2).abs() <= map.grid().dx());
        assert!(map.grid().p(ip).abs() < 1e-12);
        assert!(
            (wigner_at(&psi.to_density(), SQRT_2, 0.0, WignerConvention::ComplexAmplitude) - FRAC_2_PI).abs() < 1e-12
        );

        // imaginary amplitude moves the peak along p
        let psi = FockVector::coherent(C64::new(0.0, 1.0), 40);
        let w = wigner_at(&psi.to_density(), 0.0, SQRT_2, WignerConvention::ComplexAmplitude);
        assert!((w - FRAC_2_PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized() {
        let psi = FockVector::from_amplitudes(vec![C64::new(2.0, 0.0)]);
        assert!(wigner(&psi.to_density(), &GridSpec::default(), WignerConvention::default()).is_err());
    }

    #[test]
    fn gaussian_has_no_negativity() {
        let psi = crate::fock::squeezed_vacuum(0.5, 0.0, 60).unwrap();
        let rho = psi.to_density();
        let map = wigner(&rho, &GridSpec::auto(&rho), WignerConvention::ComplexAmplitude).unwrap();
        let neg = negativity_metrics(&map);
        assert!(neg.negativity_volume < 1e-10);
        assert!((map.integral() - 1.0).abs() < 1e-3);
    }
}
