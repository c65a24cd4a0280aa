//! Floquet-Hamiltonian propagators against the direct-integration oracle.

use std::f64::consts::{PI, TAU};

use floquet::basis::SingleModeBasis;
use floquet::linalg::ComplexMatrix;
use floquet::mmft::{build_mmft, mmft_propagator};
use floquet::model::omega_2omega::{LOWER, UPPER};
use floquet::model::{make_omega_2omega_example, FourierHamiltonian};
use floquet::propagator::FloquetPropagator;
use floquet::sft::{build_sft, shirley_propagator};
use floquet::tdse::{integrate, integrate_between, IntegratorConfig};

fn oracle_population(h: &FourierHamiltonian, t: f64) -> f64 {
    integrate(h, t, &IntegratorConfig::for_hamiltonian(h)).unwrap()[(UPPER, LOWER)].norm_sqr()
}

fn sft_propagator(phi: f64, n_max: u32) -> FloquetPropagator {
    build_sft(&make_omega_2omega_example(phi), SingleModeBasis::symmetric(n_max)).propagator().unwrap()
}

/// Largest pointwise population error on a 200-point grid over one period.
fn grid_error(h: &FourierHamiltonian, p: &FloquetPropagator) -> f64 {
    let cfg = IntegratorConfig::for_hamiltonian(h);
    let mut u = ComplexMatrix::identity(2);
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let t = TAU * i as f64 / 199.0;
        u = integrate_between(h, prev, t, &cfg).unwrap().matmul(&u);
        prev = t;
        let approx = p.amplitude(t, LOWER, UPPER).unwrap().norm_sqr();
        worst = worst.max((approx - u[(UPPER, LOWER)].norm_sqr()).abs());
    }
    worst
}

#[test]
fn sft_population_after_one_period() {
    let h = make_omega_2omega_example(0.0);
    let sh = build_sft(&h, SingleModeBasis::symmetric(10));
    let amp = shirley_propagator(&sh, TAU, LOWER, UPPER).unwrap();
    assert!((amp.norm_sqr() - oracle_population(&h, TAU)).abs() <= 1e-2);
}

#[test]
fn sft_convergence_threshold_is_sharp() {
    // Below the quoted cutoff the population at one period misses by more.
    let h = make_omega_2omega_example(0.0);
    let coarse = sft_propagator(0.0, 8).amplitude(TAU, LOWER, UPPER).unwrap().norm_sqr();
    assert!((coarse - oracle_population(&h, TAU)).abs() > 1e-2);
}

#[test]
fn sft_grid_agreement_improves_with_truncation() {
    for phi in [0.0, PI / 2.0] {
        let h = make_omega_2omega_example(phi);
        let e10 = grid_error(&h, &sft_propagator(phi, 10));
        let e12 = grid_error(&h, &sft_propagator(phi, 12));
        let e16 = grid_error(&h, &sft_propagator(phi, 16));
        assert!(e12 <= 2e-2, "phi={phi}: {e12}");
        assert!(e16 < e12 && e12 < e10, "phi={phi}: {e10} {e12} {e16}");
    }
}

#[test]
fn sft_amplitude_matrix_is_nearly_unitary() {
    let p = sft_propagator(0.0, 12);
    let p_big = sft_propagator(0.0, 16);
    let (mut worst, mut worst_big): (f64, f64) = (0.0, 0.0);
    for i in 0..=50 {
        let t = TAU * i as f64 / 50.0;
        worst = worst.max(p.matrix(t).unwrap().unitarity_deviation());
        worst_big = worst_big.max(p_big.matrix(t).unwrap().unitarity_deviation());
    }
    assert!(worst <= 5e-2, "{worst}");
    assert!(worst_big < worst);
}

#[test]
fn sft_identity_at_zero_time() {
    for phi in [0.0, 1.0, PI] {
        let g = sft_propagator(phi, 10).matrix(0.0).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-6);
    }
}

#[test]
fn mmft_population_after_one_period() {
    let h = make_omega_2omega_example(0.0);
    let hm = build_mmft(&h, 9);
    let amp = mmft_propagator(&hm, TAU, LOWER, UPPER).unwrap();
    assert!((amp.norm_sqr() - oracle_population(&h, TAU)).abs() <= 1e-2);
    let g = hm.propagator().unwrap().matrix(0.0).unwrap();
    assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-6);
}

#[test]
fn mmft_grid_agreement_improves_with_truncation() {
    let h = make_omega_2omega_example(PI / 2.0);
    let e9 = grid_error(&h, &build_mmft(&h, 9).propagator().unwrap());
    let e11 = grid_error(&h, &build_mmft(&h, 11).propagator().unwrap());
    assert!(e11 <= 2e-2, "{e11}");
    assert!(e11 < e9);
}

#[test]
fn mmft_and_sft_propagators_agree_when_converged() {
    let h = make_omega_2omega_example(0.7);
    let sft = build_sft(&h, SingleModeBasis::symmetric(20)).propagator().unwrap();
    let mmft = build_mmft(&h, 11).propagator().unwrap();
    for i in 0..=40 {
        let t = TAU * i as f64 / 40.0;
        let a = sft.matrix(t).unwrap();
        let b = mmft.matrix(t).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-2, "t={t}");
    }
}
