//! Single-mode Floquet Hamiltonian on a truncated `F ⊗ A` basis,
//! `H_F = Σ_n nω_B |n⟩⟨n| ⊗ I + Σ_m S(m) ⊗ H̃(m)`.
//!
//! Couplings that would leave the truncated index range are dropped.

use crate::basis::SingleModeBasis;
use crate::linalg::{eig_hermitian, ComplexMatrix, EigenDecomposition, LinalgError};
use crate::model::FourierHamiltonian;
use crate::propagator::{FloquetPropagator, PropagatorError};
use crate::spectrum::QuasiEnergySpectrum;
use crate::C64;

/// Truncated Floquet Hamiltonian; layout `n` outer, atomic index inner.
#[derive(Clone, Debug, PartialEq)]
pub struct SftHamiltonian {
    basis: SingleModeBasis,
    dim_a: usize,
    omega_b: f64,
    matrix: ComplexMatrix,
}

pub fn build_sft(h: &FourierHamiltonian, n_set: SingleModeBasis) -> SftHamiltonian {
    let dim_a = h.dim();
    let omega_b = h.mode_pair().omega_b();
    let folded = h.fold_single_mode();
    let blocks = n_set.len();
    let mut matrix = ComplexMatrix::zeros(blocks * dim_a, blocks * dim_a);
    for (i, n_row) in n_set.indices().enumerate() {
        for (j, n_col) in n_set.indices().enumerate() {
            if let Some(c) = folded.get(&(n_row - n_col)) {
                matrix.add_block(i * dim_a, j * dim_a, c);
            }
        }
        for a in 0..dim_a {
            let k = i * dim_a + a;
            matrix[(k, k)] += C64::new(n_row as f64 * omega_b, 0.0);
        }
    }
    SftHamiltonian { basis: n_set, dim_a, omega_b, matrix }
}

impl SftHamiltonian {
    pub fn basis(&self) -> &SingleModeBasis {
        &self.basis
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Row/column of `|n⟩ ⊗ |α⟩`.
    pub fn index(&self, n: i64, alpha: usize) -> Option<usize> {
        (alpha < self.dim_a).then_some(())?;
        Some(self.basis.position(n)? * self.dim_a + alpha)
    }

    pub fn diagonalize(&self) -> Result<EigenDecomposition, LinalgError> {
        eig_hermitian(&self.matrix)
    }

    /// Diagonalizes once; the result evaluates the propagator at any time.
    pub fn propagator(&self) -> Result<FloquetPropagator, PropagatorError> {
        let zero = self.basis.position(0).ok_or(PropagatorError::ZeroBlockMissing)?;
        let freqs = self.basis.indices().map(|n| n as f64 * self.omega_b).collect();
        Ok(FloquetPropagator::new(self.diagonalize()?, self.dim_a, freqs, zero))
    }
}

/// All eigenpairs, ascending, with `ladder_rep` folded into `(-ω_B/2, ω_B/2]`.
pub fn sft_spectrum(sh: &SftHamiltonian) -> Result<QuasiEnergySpectrum, LinalgError> {
    Ok(QuasiEnergySpectrum::from_eigen(&sh.diagonalize()?, sh.omega_b, None))
}

/// `⟨β|U(t,0)|α⟩ = Σ_{n∈𝒩} e^{inω_B t} ⟨n,β| e^{-iH_F t} |0,α⟩`.
///
/// Diagonalizes on every call; use [`SftHamiltonian::propagator`] for many
/// time points.
pub fn shirley_propagator(
    sh: &SftHamiltonian,
    t: f64,
    alpha: usize,
    beta: usize,
) -> Result<C64, PropagatorError> {
    sh.propagator()?.amplitude(t, alpha, beta)
}

/// Worst-case deviations found by [`ladder_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderReport {
    /// `max |E_partner - (E + ω_B)|`.
    pub energy_deviation: f64,
    /// `max |φ_partner - e^{iθ} S(1)φ|` after optimal phase alignment.
    pub vector_deviation: f64,
    pub pairs_checked: usize,
}

/// Checks the shift property on eigenpairs with `|E| <= window`: the
/// eigenvalue nearest `E + ω_B` must exist and its eigenvector must be the
/// original shifted up by one Fourier block.
pub fn ladder_check(sh: &SftHamiltonian, eig: &EigenDecomposition, window: f64) -> LadderReport {
    let dim_a = sh.dim_a;
    let size = eig.dim();
    let values = &eig.eigenvalues;
    let mut report = LadderReport { energy_deviation: 0.0, vector_deviation: 0.0, pairs_checked: 0 };
    for (j, &e) in values.iter().enumerate() {
        if e.abs() > window {
            continue;
        }
        let target = e + sh.omega_b;
        let partner = (0..size)
            .min_by(|&a, &b| (values[a] - target).abs().total_cmp(&(values[b] - target).abs()))
            .expect("non-empty spectrum");
        report.energy_deviation = report.energy_deviation.max((values[partner] - target).abs());

        let original = eig.eigenvectors.column(j);
        let mut shifted = vec![C64::new(0.0, 0.0); size];
        shifted[dim_a..].copy_from_slice(&original[..size - dim_a]);
        let candidate = eig.eigenvectors.column(partner);
        let overlap: C64 = shifted.iter().zip(&candidate).map(|(s, c)| s.conj() * c).sum();
        let align = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        let dev = shifted
            .iter()
            .zip(&candidate)
            .map(|(s, c)| (c - s * align).norm())
            .fold(0.0, f64::max);
        report.vector_deviation = report.vector_deviation.max(dev);
        report.pairs_checked += 1;
    }
    report
}
