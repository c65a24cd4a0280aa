//! Quasi-energy spectra and unitary time evolution for finite-dimensional
//! quantum systems driven by one or two commensurate periodic fields.
//!
//! Three independent routes to the same physics live side by side:
//!
//! * [`sft`]: the single-mode Floquet Hamiltonian on `F ⊗ A` and its propagator,
//! * [`mmft`]: the two-mode Floquet Hamiltonian on `F₁ ⊗ F₂ ⊗ A`, including a
//!   translation-symmetric orbit basis and its block diagonalization by the
//!   crystal-momentum-like label `k`,
//! * [`tdse`]: direct RK4 integration of the Schrödinger equation and the
//!   monodromy (one-period propagator) decomposition.
//!
//! Units are `ħ = 1` throughout.

pub mod basis;
pub mod linalg;
pub mod mmft;
pub mod model;
pub mod propagator;
pub mod sft;
pub mod spectrum;
pub mod tdse;

pub use num_complex::Complex64 as C64;

pub use basis::{LatticePoint, ModePair, OrbitBasis, SingleModeBasis};
pub use linalg::ComplexMatrix;
pub use model::FourierHamiltonian;

/// Crate version, recorded in exported data.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
