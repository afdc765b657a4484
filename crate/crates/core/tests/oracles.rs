//! Closed forms checked against matrix exponentials of the generators and
//! against independent series or sampling.

#![allow(clippy::needless_range_loop)]

use mesoherald::detector::sampling::sample_response;
use mesoherald::displacement::displacement_matrix;
use mesoherald::fock::{annihilation, number_operator};
use mesoherald::{
    db_to_r, detector_response, epr_state, herald_pure, herald_series_oracle, split_squeezed_state, squeezed_vacuum,
    upsilon_operator, DetectorModel, VarianceConvention, C64,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn expm_column0(gen: DMatrix<C64>) -> Vec<C64> {
    let u = gen.exp();
    u.column(0).iter().copied().collect()
}

/// `exp[(ξ* a² − ξ a†²)/2] |0⟩` in a large box.
fn squeezed_by_exp(r: f64, theta: f64, dim: usize) -> Vec<C64> {
    let a = annihilation(dim - 1);
    let xi = C64::from_polar(r, theta);
    let a2 = &a * &a;
    let gen = (&a2 * xi.conj() - a2.adjoint() * xi) * C64::new(0.5, 0.0);
    expm_column0(gen)
}

#[test]
fn squeezed_vacuum_matches_generator() {
    for &(r, theta) in &[(0.4, 0.0), (db_to_r(10.0).unwrap(), 0.0), (0.8, 1.1)] {
        let oracle = squeezed_by_exp(r, theta, 320);
        let psi = squeezed_vacuum(r, theta, 120).unwrap();
        for n in 0..=30 {
            assert!(
                (psi.amplitude(n) - oracle[n]).norm() < 1e-10,
                "r={r} θ={theta} n={n}: {} vs {}",
                psi.amplitude(n),
                oracle[n]
            );
        }
    }
}

/// Index of `|s, k⟩` in the two-mode box with cutoff `n` per mode.
fn idx(s: usize, k: usize, n: usize) -> usize {
    s * (n + 1) + k
}

#[test]
fn split_state_matches_beam_splitter_generator() {
    let n = 20;
    let r = 0.9;
    let single = squeezed_by_exp(r, 0.0, 200);
    let dim = (n + 1) * (n + 1);
    let mut input = DMatrix::<C64>::zeros(dim, 1);
    for s in 0..=n {
        input[(idx(s, 0, n), 0)] = single[s];
    }
    // U = exp[π/4 (a_A† a_S − a_S† a_A)] sends a_S† to (a_S† + a_A†)/√2
    let mut gen = DMatrix::<C64>::zeros(dim, dim);
    for s in 0..=n {
        for k in 0..=n {
            if s >= 1 && k < n {
                // a_A† a_S |s,k⟩ = √(s(k+1)) |s−1,k+1⟩
                gen[(idx(s - 1, k + 1, n), idx(s, k, n))] += C64::new(((s * (k + 1)) as f64).sqrt(), 0.0);
            }
            if k >= 1 && s < n {
                gen[(idx(s + 1, k - 1, n), idx(s, k, n))] -= C64::new(((k * (s + 1)) as f64).sqrt(), 0.0);
            }
        }
    }
    let out = (gen * C64::new(std::f64::consts::FRAC_PI_4, 0.0)).exp() * input;
    let st = split_squeezed_state(r, 0.0, 60, 60).unwrap();
    for s in 0..=n {
        for k in 0..=(n - s) {
            let want = out[(idx(s, k, n), 0)];
            assert!((st.amplitude(s, k) - want).norm() < 1e-10, "({s},{k})");
        }
    }
}

#[test]
fn epr_matches_two_mode_squeezing_generator() {
    let r = db_to_r(10.0).unwrap();
    let chain = 400;
    // exp[r(a_S a_A − a_S† a_A†)] restricted to the |n,n⟩ ladder
    let mut gen = DMatrix::<C64>::zeros(chain, chain);
    for n in 0..chain - 1 {
        let w = r * (n + 1) as f64;
        gen[(n + 1, n)] = C64::new(-w, 0.0);
        gen[(n, n + 1)] = C64::new(w, 0.0);
    }
    let oracle = expm_column0(gen);
    let st = epr_state(r, 150).unwrap();
    for n in 0..=60 {
        assert!((st.amplitude(n, n) - oracle[n]).norm() < 1e-10, "n={n}");
        if n > 0 {
            assert_eq!(st.amplitude(n, n - 1), C64::default());
        }
    }
}

fn displacement_by_exp(alpha: C64, cutoff: usize) -> DMatrix<C64> {
    let a = annihilation(cutoff);
    (a.adjoint() * alpha - &a * alpha.conj()).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn displacement_matches_generator(mag in 0.0f64..1.5, phase in -3.2f64..3.2) {
        let alpha = C64::from_polar(mag, phase);
        let oracle = displacement_by_exp(alpha, 40);
        let d = displacement_matrix(alpha, 40);
        for m in 0..20 {
            for k in 0..20 {
                let diff = (d.entry(m, k) - oracle[(m, k)]).norm();
                prop_assert!(diff < 1e-10, "({m},{k}) diff {diff:e}");
            }
        }
    }

    #[test]
    fn displacement_unitary_on_interior(mag in 0.0f64..4.0, phase in -3.2f64..3.2) {
        // rows above ~35 leak past k = 120 once |α| nears 4
        let alpha = C64::from_polar(mag, phase);
        let d = displacement_matrix(alpha, 120);
        let g = d.matrix() * d.matrix().adjoint();
        for m in 0..=35 {
            for k in 0..=35 {
                let want = if m == k { 1.0 } else { 0.0 };
                prop_assert!((g[(m, k)] - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn displaced_number_identity(mag in 0.0f64..2.0, phase in -3.2f64..3.2) {
        let alpha = C64::from_polar(mag, phase);
        let cutoff = 100;
        let d = displacement_matrix(alpha, cutoff);
        let n = number_operator(cutoff);
        let lhs = d.matrix().adjoint() * n * d.matrix();
        let ups = upsilon_operator(alpha, cutoff);
        for i in 0..=cutoff / 2 {
            for j in 0..=cutoff / 2 {
                prop_assert!((lhs[(i, j)] - ups.entry(i, j)).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn forward_conjugation_gives_reversed_displacement() {
    let alpha = C64::new(1.2, -0.7);
    let cutoff = 100;
    let d = displacement_matrix(alpha, cutoff);
    let lhs = d.matrix() * number_operator(cutoff) * d.matrix().adjoint();
    let ups = upsilon_operator(-alpha, cutoff);
    for i in 0..=50 {
        for j in 0..=50 {
            assert!((lhs[(i, j)] - ups.entry(i, j)).norm() < 1e-8);
        }
    }
}

#[test]
fn herald_matches_series_oracle() {
    let r = db_to_r(10.0).unwrap();
    let st = split_squeezed_state(r, 0.0, 60, 100).unwrap();
    for &(alpha, m) in &[
        (C64::new(4.0, 0.0), 18),
        (C64::new(4.0, 0.0), 22),
        (C64::new(0.0, 4.0), 23),
        (C64::from_polar(2.5, 0.7), 9),
        (C64::new(1.0, 0.0), 0),
    ] {
        let h = herald_pure(&st, alpha, m);
        let oracle = herald_series_oracle(r, alpha, m, 60).unwrap();
        let f = h.state.fidelity(&oracle);
        assert!(f > 1.0 - 1e-10, "α={alpha} m={m}: fidelity {f}");
        // the oracle is unnormalized; its norm is the heralding probability
        let rel = (oracle.norm_sqr() / h.probability - 1.0).abs();
        assert!(rel < 1e-8, "α={alpha} m={m}: P rel err {rel:e}");
    }
}

fn mc_check(model: &DetectorModel, m_max: usize, ms: &[usize], samples: usize, seed: u64) {
    let resp = detector_response(model, m_max).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    for &m in ms {
        let hist = sample_response(model, m, samples, &mut rng);
        let col = resp.column(m);
        let mut worst: f64 = 0.0;
        for (p, q) in col.iter().zip(&hist) {
            let sd = (p.max(1.0 / samples as f64) * (1.0 - p) / samples as f64).sqrt();
            worst = worst.max((p - q).abs() / sd);
        }
        assert!(worst < 5.5, "m={m}: worst deviation {worst:.2} sd");
    }
}

#[test]
fn detector_response_matches_monte_carlo() {
    let model = DetectorModel::new(0.9, 1.1, 1.0, 0.0, 40.0, 0.1, VarianceConvention::AsPrinted).unwrap();
    mc_check(&model, 30, &[12, 25], 1_000_000, 7);
    let classical = DetectorModel::new(0.8, 1.5, 1.0, 0.3, 55.0, 0.1, VarianceConvention::Classical).unwrap();
    mc_check(&classical, 30, &[20], 1_000_000, 11);
}
