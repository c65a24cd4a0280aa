//! Driven atomic Hamiltonians in Fourier form,
//! `H(t) = Σ_{p,q} H̃(p,q) e^{ip(ω₁t + φ₁)} e^{iq(ω₂t + φ₂)}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::basis::{BasisError, ModePair};
use crate::linalg::{sigma_x, ComplexMatrix};
use crate::C64;

/// Allowed `max |H̃(-p,-q) - H̃(p,q)†|` relative to the largest coefficient.
pub const COEFFICIENT_HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coefficient ({p}, {q}) has shape {rows}x{cols}, expected {dim}x{dim}")]
    WrongShape { p: i64, q: i64, rows: usize, cols: usize, dim: usize },
    #[error("coefficients ({p}, {q}) and ({}, {}) are not Hermitian conjugates (deviation {deviation:e})", -p, -q)]
    NonHermitianCoefficients { p: i64, q: i64, deviation: f64 },
    #[error("atomic dimension must be at least 1")]
    EmptyAtomicSpace,
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Fourier coefficients of a two-mode periodic Hamiltonian plus the field
/// phases. Phases are kept separate from the coefficients so a phase change is
/// a relabeling, not a new coefficient set.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierHamiltonian {
    dim: usize,
    mode_pair: ModePair,
    coeffs: BTreeMap<(i64, i64), ComplexMatrix>,
    phi1: f64,
    phi2: f64,
}

impl FourierHamiltonian {
    /// Validates shapes and the Hermiticity pairing `H̃(-p,-q) = H̃(p,q)†`.
    /// A coefficient whose partner is absent must vanish.
    pub fn new(
        dim: usize,
        mode_pair: ModePair,
        coeffs: BTreeMap<(i64, i64), ComplexMatrix>,
        phi1: f64,
        phi2: f64,
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::EmptyAtomicSpace);
        }
        for (&(p, q), m) in &coeffs {
            if m.rows() != dim || m.cols() != dim {
                return Err(ModelError::WrongShape { p, q, rows: m.rows(), cols: m.cols(), dim });
            }
        }
        let scale = coeffs.values().map(ComplexMatrix::max_abs).fold(0.0, f64::max);
        let zero = ComplexMatrix::zeros(dim, dim);
        for (&(p, q), m) in &coeffs {
            let partner = coeffs.get(&(-p, -q)).unwrap_or(&zero);
            let deviation = partner.max_abs_diff(&m.adjoint());
            if deviation > COEFFICIENT_HERMITICITY_TOL * scale {
                return Err(ModelError::NonHermitianCoefficients { p, q, deviation });
            }
        }
        Ok(Self { dim, mode_pair, coeffs, phi1, phi2 })
    }

    /// Time-independent Hamiltonian.
    pub fn stationary(h0: ComplexMatrix, omega_b: f64) -> Result<Self, ModelError> {
        let mp = ModePair::new(1, 1, omega_b)?;
        let dim = h0.rows();
        Self::new(dim, mp, BTreeMap::from([((0, 0), h0)]), 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_pair(&self) -> &ModePair {
        &self.mode_pair
    }

    pub fn coeffs(&self) -> &BTreeMap<(i64, i64), ComplexMatrix> {
        &self.coeffs
    }

    pub fn phases(&self) -> (f64, f64) {
        (self.phi1, self.phi2)
    }

    /// Same coefficients with different field phases.
    pub fn with_phases(&self, phi1: f64, phi2: f64) -> Self {
        Self { phi1, phi2, ..self.clone() }
    }

    /// Period `2π/ω_B`.
    pub fn period(&self) -> f64 {
        self.mode_pair.period()
    }

    /// Phase factor `e^{i(pφ₁ + qφ₂)}` attached to coupling `(p, q)`.
    pub fn phase_factor(&self, p: i64, q: i64) -> C64 {
        C64::from_polar(1.0, p as f64 * self.phi1 + q as f64 * self.phi2)
    }

    /// `e^{i(pφ₁ + qφ₂)} H̃(p,q)`, or `None` if the coupling is absent.
    pub fn effective_coefficient(&self, p: i64, q: i64) -> Option<ComplexMatrix> {
        self.coeffs.get(&(p, q)).map(|m| m.scale(self.phase_factor(p, q)))
    }

    /// Largest `|p|` and `|q|` among the couplings.
    pub fn coupling_reach(&self) -> (i64, i64) {
        self.coeffs
            .keys()
            .fold((0, 0), |(a, b), &(p, q)| (a.max(p.abs()), b.max(q.abs())))
    }

    /// `H(t)`; exactly Hermitian by construction.
    pub fn evaluate_time(&self, t: f64) -> ComplexMatrix {
        let (w1, w2) = (self.mode_pair.omega1(), self.mode_pair.omega2());
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        for (&(p, q), m) in &self.coeffs {
            let phase = p as f64 * (w1 * t + self.phi1) + q as f64 * (w2 * t + self.phi2);
            h.add_scaled_block(0, 0, m, C64::from_polar(1.0, phase));
        }
        h.hermitian_part()
    }

    /// Single-mode coefficients `H̃(r) = Σ_{pN₁+qN₂=r} e^{i(pφ₁+qφ₂)} H̃(p,q)`,
    /// so that `H(t) = Σ_r H̃(r) e^{irω_B t}`.
    pub fn fold_single_mode(&self) -> BTreeMap<i64, ComplexMatrix> {
        let mut folded: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for (&(p, q), m) in &self.coeffs {
            let r = self.mode_pair.harmonic(p, q);
            folded
                .entry(r)
                .or_insert_with(|| ComplexMatrix::zeros(self.dim, self.dim))
                .add_scaled_block(0, 0, m, self.phase_factor(p, q));
        }
        folded
    }
}

/// Parameters of the two-level benchmark driven at `ω` and `2ω`.
pub mod omega_2omega {
    /// Upper level energy `E_u`.
    pub const E_UPPER: f64 = 1.5;
    /// Lower level energy `E_ℓ`.
    pub const E_LOWER: f64 = 0.0;
    pub const OMEGA: f64 = 1.0;
    /// Coupling strength `V`.
    pub const COUPLING: f64 = 1.0;
    /// Atomic index of the lower state `ℓ`.
    pub const LOWER: usize = 0;
    /// Atomic index of the upper state `u`.
    pub const UPPER: usize = 1;
}

/// Two-level system `E_u|u⟩⟨u| + E_ℓ|ℓ⟩⟨ℓ| + 2V(cos ωt + cos(2ωt + φ))σx` with
/// `E_u = 3/2`, `E_ℓ = 0`, `ω = 1`, `V = 1` and basis order `(ℓ, u)`.
pub fn make_omega_2omega_example(phi_2omega: f64) -> FourierHamiltonian {
    use omega_2omega::*;
    let mp = ModePair::new(1, 2, OMEGA).expect("1 and 2 are coprime");
    let h0 = ComplexMatrix::from_real_diagonal(&[E_LOWER, E_UPPER]);
    let v = sigma_x().scale(C64::new(COUPLING, 0.0));
    let coeffs = BTreeMap::from([
        ((0, 0), h0),
        ((1, 0), v.clone()),
        ((-1, 0), v.clone()),
        ((0, 1), v.clone()),
        ((0, -1), v),
    ]);
    FourierHamiltonian::new(2, mp, coeffs, 0.0, phi_2omega).expect("benchmark is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn benchmark_at_t0() {
        let h = make_omega_2omega_example(0.0);
        let expected = ComplexMatrix::from_real_rows(&[[0.0, 4.0], [4.0, 1.5]]);
        assert!(h.evaluate_time(0.0).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn benchmark_couplings_cancel_at_pi() {
        let h = make_omega_2omega_example(0.0);
        let expected = ComplexMatrix::from_real_diagonal(&[0.0, 1.5]);
        assert!(h.evaluate_time(PI).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn stationary_is_constant() {
        let h0 = ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(-1.0, 0.0)]]);
        let h = FourierHamiltonian::stationary(h0.clone(), 1.0).unwrap();
        for t in [0.0, 0.3, 17.0] {
            assert_eq!(h.evaluate_time(t), h0);
        }
    }

    #[test]
    fn phase_pi_flips_second_harmonic() {
        let h = make_omega_2omega_example(PI);
        let minus_v = sigma_x().scale(c(-1.0, 0.0));
        for q in [1, -1] {
            assert!(h.effective_coefficient(0, q).unwrap().max_abs_diff(&minus_v) < 1e-15);
        }
    }

    #[test]
    fn phase_changes_dynamics() {
        let a = make_omega_2omega_example(0.0);
        let b = make_omega_2omega_example(PI / 2.0);
        assert!(a.evaluate_time(0.0).max_abs_diff(&b.evaluate_time(0.0)) > 1.0);
    }

    #[test]
    fn benchmark_fold() {
        let phi = 0.7;
        let folded = make_omega_2omega_example(phi).fold_single_mode();
        assert_eq!(folded.keys().copied().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(folded[&0], ComplexMatrix::from_real_diagonal(&[0.0, 1.5]));
        assert_eq!(folded[&1], sigma_x());
        assert_eq!(folded[&-1], sigma_x());
        for s in [1.0, -1.0] {
            let expected = sigma_x().scale(C64::from_polar(1.0, s * phi));
            assert!(folded[&(2 * s as i64)].max_abs_diff(&expected) < 1e-15);
        }
    }

    #[test]
    fn fold_collision_accumulates() {
        let mp = ModePair::new(1, 1, 1.0).unwrap();
        let a = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let b = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.0, 0.0]]);
        let coeffs = BTreeMap::from([
            ((1, 0), a.clone()),
            ((-1, 0), a.adjoint()),
            ((0, 1), b.clone()),
            ((0, -1), b.adjoint()),
        ]);
        let h = FourierHamiltonian::new(2, mp, coeffs, 0.0, 0.0).unwrap();
        let folded = h.fold_single_mode();
        assert_eq!(folded[&1], &a + &b);
        assert_eq!(folded.len(), 2);
    }

    #[test]
    fn rejects_non_hermitian_pairs() {
        let mp = ModePair::new(1, 2, 1.0).unwrap();
        let coeffs = BTreeMap::from([((1, 0), sigma_x())]);
        let err = FourierHamiltonian::new(2, mp, coeffs, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, ModelError::NonHermitianCoefficients { p: 1, q: 0, .. }));

        let mut bad = BTreeMap::from([((0, 0), sigma_x())]);
        bad.insert((0, 0), ComplexMatrix::from_rows(&[[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]));
        assert!(FourierHamiltonian::new(2, mp, bad, 0.0, 0.0).is_err());

        let wrong = BTreeMap::from([((0, 0), ComplexMatrix::identity(3))]);
        assert!(matches!(
            FourierHamiltonian::new(2, mp, wrong, 0.0, 0.0),
            Err(ModelError::WrongShape { .. })
        ));
    }

    /// Random Hermitian-paired coefficient set with |p|, |q| <= 2.
    pub(crate) fn random_hamiltonian(rng: &mut ChaCha8Rng, n1: i64, n2: i64, dim: usize) -> FourierHamiltonian {
        let mp = ModePair::new(n1, n2, rng.gen_range(0.5..2.0)).unwrap();
        let mut coeffs = BTreeMap::new();
        let random_matrix = |rng: &mut ChaCha8Rng| {
            ComplexMatrix::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let h0 = random_matrix(rng).hermitian_part();
        coeffs.insert((0, 0), h0);
        for (p, q) in [(1, 0), (0, 1), (1, 1), (2, -1), (1, -2)] {
            if rng.gen_bool(0.8) {
                let m = random_matrix(rng);
                coeffs.insert((-p, -q), m.adjoint());
                coeffs.insert((p, q), m);
            }
        }
        FourierHamiltonian::new(dim, mp, coeffs, rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
            .unwrap()
    }

    #[test]
    fn fold_matches_direct_time_summation() {
        // Oracle: direct time-domain summation of the two-mode series.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (n1, n2) = loop {
                let a = rng.gen_range(1..=5);
                let b = rng.gen_range(1..=5);
                if crate::basis::extended_gcd(a, b).0 == 1 {
                    break (a, b);
                }
            };
            let h = random_hamiltonian(&mut rng, n1, n2, 3);
            let folded = h.fold_single_mode();
            let wb = h.mode_pair().omega_b();
            for k in 0..64 {
                let t = h.period() * k as f64 / 64.0;
                let mut direct = ComplexMatrix::zeros(3, 3);
                for (&(p, q), m) in h.coeffs() {
                    let ph = p as f64 * (h.mode_pair().omega1() * t + h.phases().0)
                        + q as f64 * (h.mode_pair().omega2() * t + h.phases().1);
                    direct.add_scaled_block(0, 0, m, C64::from_polar(1.0, ph));
                }
                let mut synth = ComplexMatrix::zeros(3, 3);
                for (&r, m) in &folded {
                    synth.add_scaled_block(0, 0, m, C64::from_polar(1.0, r as f64 * wb * t));
                }
                assert!(synth.max_abs_diff(&direct) < 1e-10);
                assert!(h.evaluate_time(t).max_abs_diff(&direct) < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn evaluate_time_is_periodic_and_hermitian(seed in 0u64..500, t in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hamiltonian(&mut rng, 2, 3, 2);
            let a = h.evaluate_time(t);
            let b = h.evaluate_time(t + TAU / h.mode_pair().omega_b());
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
            prop_assert!(a.hermiticity_deviation() == 0.0);
        }
    }
}
