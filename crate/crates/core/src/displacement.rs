//! Fock-basis matrix elements of the displacement operator `D(α)` and the
//! displaced-number observable `Υ(α) = D(α) a†a D†(α)`.
//!
//! Elements are evaluated as
//!
//! ```text
//! ⟨m|D(α)|k⟩ = √(k!/m!) α^{m−k} e^{−|α|²/2} L_k^{(m−k)}(|α|²)          m ≥ k
//!            = √(m!/k!) (−α*)^{k−m} e^{−|α|²/2} L_m^{(k−m)}(|α|²)      m < k
//! ```
//!
//! which is the closed-form finite sum over `n ≤ min(m, k)` regrouped into a
//! Laguerre polynomial. The prefactor is built in the log domain and the
//! polynomial by recurrence, so nothing overflows at N = 120.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::fock::{annihilation, number_operator, Operator};
use crate::special::{laguerre, laguerre_all, ln_factorial};

fn prefactor(alpha: C64, m: usize, k: usize) -> C64 {
    let x = alpha.norm_sqr();
    let (hi, lo) = if m >= k { (m, k) } else { (k, m) };
    let d = hi - lo;
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * alpha.norm().ln() - x / 2.0;
    // α^d above the diagonal-from-below, (−α*)^d above it
    let phase = if m >= k {
        d as f64 * alpha.arg()
    } else {
        d as f64 * (std::f64::consts::PI - alpha.arg())
    };
    C64::from_polar(ln_mag.exp(), phase)
}

/// `⟨m|D(α)|k⟩`.
pub fn displacement_element(alpha: C64, m: usize, k: usize) -> C64 {
    if alpha == C64::default() {
        return if m == k { C64::new(1.0, 0.0) } else { C64::default() };
    }
    let x = alpha.norm_sqr();
    let (lo, d) = if m >= k { (k, m - k) } else { (m, k - m) };
    prefactor(alpha, m, k) * laguerre(lo, d as f64, x)
}

/// Row `m` of the displacement matrix, `⟨m|D(α)|k⟩` for `k = 0..=k_max`.
pub fn displacement_row(alpha: C64, m: usize, k_max: usize) -> Vec<C64> {
    (0..=k_max).map(|k| displacement_element(alpha, m, k)).collect()
}

/// `D(α)` restricted to photon numbers `0..=cutoff`. Entries are the exact
/// infinite-dimensional elements, so the truncated matrix is only
/// approximately unitary near its edge.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> Operator {
    let dim = cutoff + 1;
    let mut mat = DMatrix::zeros(dim, dim);
    if alpha == C64::default() {
        mat.fill_with_identity();
        return Operator::from_matrix(mat);
    }
    let x = alpha.norm_sqr();
    // Fixed |m − k| = d shares one Laguerre order; walk each off-diagonal.
    for d in 0..dim {
        let lag = laguerre_all(dim - 1 - d, d as f64, x);
        for (lo, l) in lag.iter().enumerate() {
            let hi = lo + d;
            mat[(hi, lo)] = prefactor(alpha, hi, lo) * l;
            if d > 0 {
                mat[(lo, hi)] = prefactor(alpha, lo, hi) * l;
            }
        }
    }
    Operator::from_matrix(mat)
}

/// `Υ(α) = |α|² + (α a† + α* a) + a†a` at the given cutoff.
pub fn upsilon_operator(alpha: C64, cutoff: usize) -> Operator {
    let a = annihilation(cutoff);
    let mut ups = number_operator(cutoff);
    ups += a.adjoint() * alpha + &a * alpha.conj();
    for n in 0..=cutoff {
        ups[(n, n)] += alpha.norm_sqr();
    }
    Operator::from_matrix(ups)
}

/// Near-diagonal weak-displacement estimate of `⟨m|D(α)|m+δ⟩`:
///
/// `e^{−|α|²} m^{|δ|/2} / |δ|! · (−1)^δ |α|^δ e^{−iφδ}`
///
/// valid only when `|α|²` is small against `m`. Kept in the published form
/// (including the `e^{−|α|²}` prefactor) for diagnostic comparisons.
pub fn near_diagonal_approx(alpha: C64, m: usize, delta: i64) -> C64 {
    let ad = delta.unsigned_abs() as usize;
    let mag = (-alpha.norm_sqr()).exp() * (m as f64).powf(ad as f64 / 2.0) / ln_factorial(ad).exp()
        * alpha.norm().powi(ad as i32);
    let sign = if delta.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    C64::from_polar(sign * mag, -alpha.arg() * delta as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// The published finite sum, term by term.
    fn published_sum(alpha: C64, m: usize, k: usize) -> C64 {
        let x = alpha.norm_sqr();
        let mut acc = 0.0;
        for n in 0..=m.min(k) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign
                * (0.5 * (ln_factorial(k) + ln_factorial(m))
                    - n as f64 * x.ln()
                    - ln_factorial(n)
                    - ln_factorial(k - n)
                    - ln_factorial(m - n))
                .exp();
        }
        (-x / 2.0).exp() * (-alpha.conj()).powu(k as u32) * alpha.powu(m as u32) * acc
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_matrix(C64::default(), 12);
        assert_eq!(d.matrix(), &DMatrix::identity(13, 13));
    }

    #[test]
    fn low_order_elements() {
        let a = C64::new(1.0, 0.0);
        let e = (-0.5f64).exp();
        assert_abs_diff_eq!(displacement_element(a, 0, 0).re, e, epsilon = 1e-15);
        assert_abs_diff_eq!(displacement_element(a, 1, 0).re, e, epsilon = 1e-15);
        assert_abs_diff_eq!(displacement_element(a, 0, 1).re, -e, epsilon = 1e-15);
        let a = C64::new(0.3, -1.2);
        assert_abs_diff_eq!(
            displacement_element(a, 0, 0).re,
            (-a.norm_sqr() / 2.0).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn matches_published_sum() {
        for &alpha in &[C64::new(0.7, 0.0), C64::new(-0.4, 1.1), C64::new(0.0, 2.0)] {
            for m in 0..12 {
                for k in 0..12 {
                    let ours = displacement_element(alpha, m, k);
                    let theirs = published_sum(alpha, m, k);
                    assert!((ours - theirs).norm() < 1e-11, "α={alpha} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn matrix_agrees_with_elementwise() {
        let alpha = C64::from_polar(2.5, 0.4);
        let d = displacement_matrix(alpha, 30);
        for m in 0..=30 {
            for k in 0..=30 {
                assert!((d.entry(m, k) - displacement_element(alpha, m, k)).norm() < 1e-13);
            }
        }
        let row = displacement_row(alpha, 7, 30);
        for k in 0..=30 {
            assert_eq!(row[k], displacement_element(alpha, 7, k));
        }
    }

    #[test]
    fn upsilon_reduces_to_number_operator() {
        let u = upsilon_operator(C64::default(), 6);
        for i in 0..=6 {
            for j in 0..=6 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert_eq!(u.entry(i, j), C64::new(want, 0.0));
            }
        }
        let alpha = C64::new(1.5, -0.5);
        let u = upsilon_operator(alpha, 10);
        assert_abs_diff_eq!(u.entry(0, 0).re, alpha.norm_sqr());
        assert!(u.hermiticity_error() < 1e-15);
    }

    #[test]
    fn near_diagonal_at_zero_offset() {
        let alpha = C64::new(0.1, 0.0);
        let approx = near_diagonal_approx(alpha, 20, 0);
        assert_abs_diff_eq!(approx.re, (-0.01f64).exp(), epsilon = 1e-15);
    }
}
