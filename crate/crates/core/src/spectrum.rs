//! Quasi-energy spectra and the folding convention.

use crate::linalg::EigenDecomposition;
use crate::C64;

/// Folds a quasi-energy into `(-ω/2, ω/2]`.
pub fn fold_quasi_energy(energy: f64, omega: f64) -> f64 {
    energy - omega * ((energy - omega / 2.0) / omega).ceil()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    /// Raw eigenvalue of the Floquet Hamiltonian.
    pub energy: f64,
    pub vector: Vec<C64>,
    /// Crystal-momentum label for translation-symmetric bases.
    pub k_label: Option<f64>,
    /// `energy` folded into `(-ω/2, ω/2]`.
    pub ladder_rep: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiEnergySpectrum {
    pub entries: Vec<SpectrumEntry>,
    /// Frequency used for `ladder_rep`.
    pub fold_frequency: f64,
}

impl QuasiEnergySpectrum {
    pub fn from_eigen(eig: &EigenDecomposition, fold_frequency: f64, k_label: Option<f64>) -> Self {
        let entries = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &energy)| SpectrumEntry {
                energy,
                vector: eig.eigenvectors.column(j),
                k_label,
                ladder_rep: Some(fold_quasi_energy(energy, fold_frequency)),
            })
            .collect();
        Self { entries, fold_frequency }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Distance from `x` to the nearest point of the ladder `{rep + m·ω}`.
pub fn distance_to_ladder(x: f64, reps: &[f64], omega: f64) -> f64 {
    reps.iter()
        .map(|&r| {
            let d = (x - r).rem_euclid(omega);
            d.min(omega - d)
        })
        .fold(f64::INFINITY, f64::min)
}
