//! Atomic-space propagator from a diagonalized Floquet Hamiltonian:
//! `⟨β|U(t,0)|α⟩ = Σ_b e^{iν_b t} ⟨b,β| e^{-iHt} |0,α⟩`, where `b` runs over the
//! Fourier blocks of the basis and `ν_b` is the block's harmonic frequency.

use thiserror::Error;

use crate::linalg::{ComplexMatrix, EigenDecomposition, LinalgError};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("the Fourier basis does not contain the zero-harmonic block")]
    ZeroBlockMissing,
    #[error("atomic index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Diagonalized Floquet Hamiltonian plus the block bookkeeping the propagator
/// sum needs. Layout: block outer, atomic index inner.
#[derive(Clone, Debug)]
pub struct FloquetPropagator {
    eig: EigenDecomposition,
    dim_a: usize,
    block_freqs: Vec<f64>,
    zero_block: usize,
}

impl FloquetPropagator {
    pub(crate) fn new(
        eig: EigenDecomposition,
        dim_a: usize,
        block_freqs: Vec<f64>,
        zero_block: usize,
    ) -> Self {
        debug_assert_eq!(eig.dim(), dim_a * block_freqs.len());
        Self { eig, dim_a, block_freqs, zero_block }
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    fn check_index(&self, index: usize) -> Result<(), PropagatorError> {
        if index >= self.dim_a {
            return Err(PropagatorError::IndexOutOfRange { index, dim: self.dim_a });
        }
        Ok(())
    }

    /// Column `α` of the atomic propagator at time `t`.
    pub fn column(&self, t: f64, alpha: usize) -> Result<Vec<C64>, PropagatorError> {
        self.check_index(alpha)?;
        let w = &self.eig.eigenvectors;
        let src = self.zero_block * self.dim_a + alpha;
        let coeff: Vec<C64> = self
            .eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &e)| C64::from_polar(1.0, -e * t) * w[(src, j)].conj())
            .collect();
        let evolved = w.mul_vec(&coeff);
        let mut out = vec![C64::new(0.0, 0.0); self.dim_a];
        for (b, &nu) in self.block_freqs.iter().enumerate() {
            let phase = C64::from_polar(1.0, nu * t);
            for (beta, o) in out.iter_mut().enumerate() {
                *o += phase * evolved[b * self.dim_a + beta];
            }
        }
        Ok(out)
    }

    /// `⟨β|U(t,0)|α⟩`.
    pub fn amplitude(&self, t: f64, alpha: usize, beta: usize) -> Result<C64, PropagatorError> {
        self.check_index(beta)?;
        Ok(self.column(t, alpha)?[beta])
    }

    /// Full `N_A × N_A` propagator matrix `G(t)`.
    pub fn matrix(&self, t: f64) -> Result<ComplexMatrix, PropagatorError> {
        let mut g = ComplexMatrix::zeros(self.dim_a, self.dim_a);
        for alpha in 0..self.dim_a {
            g.set_column(alpha, &self.column(t, alpha)?);
        }
        Ok(g)
    }
}
