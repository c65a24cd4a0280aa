//! Two-mode Floquet Hamiltonian on `F₁ ⊗ F₂ ⊗ A`,
//! `Σ (n₁ω₁ + n₂ω₂)|n₁,n₂⟩⟨n₁,n₂| ⊗ I + Σ_{p,q} e^{i(pφ₁+qφ₂)} S₁(p) ⊗ S₂(q) ⊗ H̃(p,q)`.
//!
//! Two truncations are supported. The square basis `|n₁|, |n₂| <= n_max` drops
//! couplings that leave it. The orbit basis keeps `N_ℒ` translates of each
//! canonical point and wraps escaping couplings back along the translation
//! direction, which makes the matrix commute with the translation exactly and
//! lets it be block diagonalized by `k`.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::basis::{canonical_point, wrap_to_orbit, LatticePoint, ModePair, OrbitBasis, Wrapped};
use crate::linalg::{eig_hermitian, ComplexMatrix, EigenDecomposition, LinalgError};
use crate::model::FourierHamiltonian;
use crate::propagator::{FloquetPropagator, PropagatorError};
use crate::sft::build_sft;
use crate::spectrum::QuasiEnergySpectrum;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmftError {
    #[error("k-block decomposition needs a periodic (orbit-basis) Hamiltonian")]
    NotPeriodic,
    #[error("interior margin {margin} is below the coupling reach {required}")]
    MarginTooSmall { margin: u32, required: u32 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MmftBasis {
    /// `(n₁, n₂) ∈ [-n_max, n_max]²`, `n₁` outer.
    Square { n_max: u32 },
    Orbit(OrbitBasis),
}

impl MmftBasis {
    pub fn len(&self) -> usize {
        match self {
            MmftBasis::Square { n_max } => (2 * *n_max as usize + 1).pow(2),
            MmftBasis::Orbit(ob) => ob.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, slot: usize) -> LatticePoint {
        match self {
            MmftBasis::Square { n_max } => {
                let side = 2 * *n_max as usize + 1;
                let m = *n_max as i64;
                LatticePoint::new((slot / side) as i64 - m, (slot % side) as i64 - m)
            }
            MmftBasis::Orbit(ob) => ob.points()[slot],
        }
    }
}

/// Slot of a lattice point in the square basis.
fn square_slot(p: LatticePoint, n_max: u32) -> Option<usize> {
    let m = n_max as i64;
    if p.n1.abs() > m || p.n2.abs() > m {
        return None;
    }
    let side = 2 * m + 1;
    Some(((p.n1 + m) * side + (p.n2 + m)) as usize)
}

/// Layout: basis slot outer, atomic index inner.
#[derive(Clone, Debug, PartialEq)]
pub struct MmftHamiltonian {
    basis: MmftBasis,
    dim_a: usize,
    mode_pair: ModePair,
    matrix: ComplexMatrix,
}

impl MmftHamiltonian {
    pub fn basis(&self) -> &MmftBasis {
        &self.basis
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn mode_pair(&self) -> &ModePair {
        &self.mode_pair
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.basis, MmftBasis::Orbit(_))
    }

    pub fn diagonalize(&self) -> Result<EigenDecomposition, LinalgError> {
        eig_hermitian(&self.matrix)
    }

    /// Raw eigenvalues labelled by their fold into `(-ω_B/2, ω_B/2]`. On the
    /// square basis some of these are truncation artifacts rather than
    /// quasi-energies of the driven system.
    pub fn spectrum(&self) -> Result<QuasiEnergySpectrum, LinalgError> {
        Ok(QuasiEnergySpectrum::from_eigen(&self.diagonalize()?, self.mode_pair.omega_b(), None))
    }

    /// Propagator `Σ e^{i(n₁ω₁+n₂ω₂)t} ⟨n₁,n₂,β| e^{-iHt} |0,0,α⟩` over the basis.
    pub fn propagator(&self) -> Result<FloquetPropagator, PropagatorError> {
        let origin = LatticePoint::new(0, 0);
        let zero = (0..self.basis.len())
            .find(|&s| self.basis.point(s) == origin)
            .ok_or(PropagatorError::ZeroBlockMissing)?;
        let wb = self.mode_pair.omega_b();
        let freqs = (0..self.basis.len())
            .map(|s| self.basis.point(s).harmonic(&self.mode_pair) as f64 * wb)
            .collect();
        Ok(FloquetPropagator::new(self.diagonalize()?, self.dim_a, freqs, zero))
    }
}

fn add_diagonal_energy(matrix: &mut ComplexMatrix, basis: &MmftBasis, dim_a: usize, mp: &ModePair) {
    for slot in 0..basis.len() {
        let e = basis.point(slot).harmonic(mp) as f64 * mp.omega_b();
        for a in 0..dim_a {
            let k = slot * dim_a + a;
            matrix[(k, k)] += C64::new(e, 0.0);
        }
    }
}

/// Square truncation; couplings leaving the square are dropped.
pub fn build_mmft(h: &FourierHamiltonian, n_max: u32) -> MmftHamiltonian {
    let basis = MmftBasis::Square { n_max };
    let dim_a = h.dim();
    let mp = *h.mode_pair();
    let size = basis.len() * dim_a;
    let mut matrix = ComplexMatrix::zeros(size, size);
    let effective: Vec<_> = h
        .coeffs()
        .keys()
        .map(|&(p, q)| ((p, q), h.effective_coefficient(p, q).expect("key exists")))
        .collect();
    for col in 0..basis.len() {
        let from = basis.point(col);
        for ((p, q), c) in &effective {
            if let Some(row) = square_slot(from.offset(*p, *q), n_max) {
                matrix.add_block(row * dim_a, col * dim_a, c);
            }
        }
    }
    add_diagonal_energy(&mut matrix, &basis, dim_a, &mp);
    MmftHamiltonian { basis, dim_a, mode_pair: mp, matrix }
}

/// Orbit truncation with couplings wrapped back into the basis.
///
/// # Panics
/// If `ob` was built for a different mode pair than `h`.
pub fn build_mmft_periodic(h: &FourierHamiltonian, ob: &OrbitBasis) -> MmftHamiltonian {
    assert_eq!(ob.mode_pair(), h.mode_pair(), "orbit basis and Hamiltonian disagree on the mode pair");
    let basis = MmftBasis::Orbit(ob.clone());
    let dim_a = h.dim();
    let mp = *h.mode_pair();
    let size = basis.len() * dim_a;
    let mut matrix = ComplexMatrix::zeros(size, size);
    let effective: Vec<_> = h
        .coeffs()
        .keys()
        .map(|&(p, q)| ((p, q), h.effective_coefficient(p, q).expect("key exists")))
        .collect();
    for (col, from) in ob.points().iter().enumerate() {
        for ((p, q), c) in &effective {
            if let Wrapped::InBand { index, .. } = wrap_to_orbit(from.offset(*p, *q), ob) {
                matrix.add_block(index * dim_a, col * dim_a, c);
            }
        }
    }
    add_diagonal_energy(&mut matrix, &basis, dim_a, &mp);
    MmftHamiltonian { basis, dim_a, mode_pair: mp, matrix }
}

/// The translation `S₁(N₂) ⊗ S₂(-N₁)` on an orbit basis, as a slot permutation
/// `(n, ℓ) ↦ (n, ℓ+1)` with `ℓ` cyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationMatrix {
    perm: Vec<usize>,
    dim_a: usize,
}

pub fn translation_matrix(ob: &OrbitBasis, dim_a: usize) -> TranslationMatrix {
    let (ell_min, ell_max) = ob.ell_range();
    let perm = (0..ob.len())
        .map(|slot| {
            let (n, ell) = ob.label(slot);
            let next = if ell == ell_max { ell_min } else { ell + 1 };
            ob.slot(n, next).expect("label is in range")
        })
        .collect();
    TranslationMatrix { perm, dim_a }
}

impl TranslationMatrix {
    /// Image slot of each basis slot.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Smallest `m >= 1` with `T^m = I`.
    pub fn order(&self) -> usize {
        let mut current: Vec<usize> = self.perm.clone();
        let mut m = 1;
        while current.iter().enumerate().any(|(i, &j)| i != j) {
            current = current.iter().map(|&j| self.perm[j]).collect();
            m += 1;
        }
        m
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let size = self.perm.len() * self.dim_a;
        let mut t = ComplexMatrix::zeros(size, size);
        for (from, &to) in self.perm.iter().enumerate() {
            for a in 0..self.dim_a {
                t[(to * self.dim_a + a, from * self.dim_a + a)] = C64::new(1.0, 0.0);
            }
        }
        t
    }

    /// `max |T H T† - H|`, evaluated through the permutation.
    pub fn commutator_deviation(&self, h: &ComplexMatrix) -> f64 {
        let d = self.dim_a;
        let mut worst: f64 = 0.0;
        for (i, &ti) in self.perm.iter().enumerate() {
            for (j, &tj) in self.perm.iter().enumerate() {
                for a in 0..d {
                    for b in 0..d {
                        let lhs = h[(ti * d + a, tj * d + b)];
                        worst = worst.max((lhs - h[(i * d + a, j * d + b)]).norm());
                    }
                }
            }
        }
        worst
    }
}

/// `k = 2πj/N_ℒ` with `j ∈ [-N_ℒ/2, N_ℒ/2 - 1]` for even `N_ℒ` and
/// `j ∈ [-(N_ℒ-1)/2, (N_ℒ-1)/2]` for odd `N_ℒ`.
pub fn k_grid(orbit_len: usize) -> Vec<f64> {
    let len = orbit_len as i64;
    let j_min = -(len / 2);
    (j_min..j_min + len).map(|j| TAU * j as f64 / orbit_len as f64).collect()
}

/// Periodic Hamiltonian rewritten in the basis
/// `|n,k⟩ = N_ℒ^{-1/2} Σ_ℓ e^{iℓk} |n,ℓ⟩`, which satisfies `T|n,k⟩ = e^{-ik}|n,k⟩`.
#[derive(Clone, Debug)]
pub struct KBlockDecomposition {
    pub k_values: Vec<f64>,
    /// One block per `k`, layout `n` outer and atomic index inner.
    pub blocks: Vec<ComplexMatrix>,
    /// Columns are `|n,k⟩ ⊗ |α⟩`, ordered `k` outer, then `n`, then `α`.
    pub transform: ComplexMatrix,
    /// Largest entry of `F†HF` outside the diagonal blocks.
    pub off_block_residual: f64,
}

impl KBlockDecomposition {
    pub fn block_dim(&self) -> usize {
        self.blocks.first().map_or(0, ComplexMatrix::rows)
    }

    /// Maps a block-`k` vector back to the orbit basis.
    pub fn to_full(&self, k_index: usize, v: &[C64]) -> Vec<C64> {
        let bd = self.block_dim();
        let f = &self.transform;
        (0..f.rows())
            .map(|r| (0..bd).map(|c| f[(r, k_index * bd + c)] * v[c]).sum())
            .collect()
    }

    /// Diagonalizes every block, each labelled with its `k`.
    pub fn spectra(&self, omega_b: f64) -> Result<Vec<QuasiEnergySpectrum>, LinalgError> {
        self.blocks
            .iter()
            .zip(&self.k_values)
            .map(|(b, &k)| Ok(QuasiEnergySpectrum::from_eigen(&eig_hermitian(b)?, omega_b, Some(k))))
            .collect()
    }

    /// All block eigenvalues, sorted.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, LinalgError> {
        let mut all = Vec::new();
        for b in &self.blocks {
            all.extend(eig_hermitian(b)?.eigenvalues);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }
}

pub fn k_block_decompose(h: &MmftHamiltonian) -> Result<KBlockDecomposition, MmftError> {
    let MmftBasis::Orbit(ob) = &h.basis else {
        return Err(MmftError::NotPeriodic);
    };
    let d = h.dim_a;
    let len = ob.orbit_len();
    let n_count = ob.n_set().len();
    let bd = n_count * d;
    let k_values = k_grid(len);
    let norm = 1.0 / (len as f64).sqrt();
    let size = ob.len() * d;
    let mut f = ComplexMatrix::zeros(size, size);
    for (ki, &k) in k_values.iter().enumerate() {
        for slot in 0..ob.len() {
            let (n, ell) = ob.label(slot);
            let npos = (n - ob.n_set().n_min()) as usize;
            let amp = C64::from_polar(norm, ell as f64 * k);
            for a in 0..d {
                f[(slot * d + a, ki * bd + npos * d + a)] = amp;
            }
        }
    }
    let transformed = f.adjoint().matmul(&h.matrix.matmul(&f));
    let mut off_block_residual: f64 = 0.0;
    for r in 0..size {
        for c in 0..size {
            if r / bd != c / bd {
                off_block_residual = off_block_residual.max(transformed[(r, c)].norm());
            }
        }
    }
    let blocks = (0..len)
        .map(|ki| transformed.block(ki * bd, ki * bd, bd, bd).hermitian_part())
        .collect();
    Ok(KBlockDecomposition { k_values, blocks, transform: f, off_block_residual })
}

/// Phase label `k = N₁φ₂ - N₂φ₁` folded into `(-π, π]`.
pub fn k_from_phases(mp: &ModePair, phi1: f64, phi2: f64) -> f64 {
    let k = mp.n1() as f64 * phi2 - mp.n2() as f64 * phi1;
    let r = k.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Drive phases whose single-mode Hamiltonian reproduces block `k` of the
/// periodic Hamiltonian built with `h`'s phases: `(φ₁ - k·y, φ₂ + k·x)` where
/// `(x, y)` is the canonical unit solution. The relative phase advances by `k`.
pub fn block_phases(h: &FourierHamiltonian, k: f64) -> (f64, f64) {
    let (x, y) = h.mode_pair().unit_solution();
    let (phi1, phi2) = h.phases();
    (phi1 - k * y as f64, phi2 + k * x as f64)
}

/// Square-basis propagator amplitude `⟨β|U(t,0)|α⟩`.
///
/// Diagonalizes on every call; use [`MmftHamiltonian::propagator`] for many
/// time points.
pub fn mmft_propagator(
    h: &MmftHamiltonian,
    t: f64,
    alpha: usize,
    beta: usize,
) -> Result<C64, PropagatorError> {
    h.propagator()?.amplitude(t, alpha, beta)
}

/// Compares the square-basis Hamiltonian built at `(φ₁, φ₂)` with
/// `U⁻¹ H(0,0) U`, `U = Σ e^{-i(n₁φ₁+n₂φ₂)} |n₁,n₂⟩⟨n₁,n₂| ⊗ I`. Returns the
/// largest entrywise difference.
pub fn phase_shift_conjugation_check(h: &FourierHamiltonian, phi1: f64, phi2: f64, n_max: u32) -> f64 {
    let shifted = build_mmft(&h.with_phases(phi1, phi2), n_max);
    let base = build_mmft(&h.with_phases(0.0, 0.0), n_max);
    let d = h.dim();
    let u: Vec<C64> = (0..shifted.basis.len())
        .flat_map(|s| {
            let p = shifted.basis.point(s);
            let phase = -(p.n1 as f64 * phi1 + p.n2 as f64 * phi2);
            std::iter::repeat(C64::from_polar(1.0, phase)).take(d)
        })
        .collect();
    let conjugated = ComplexMatrix::from_fn(u.len(), u.len(), |a, b| {
        u[a].conj() * base.matrix[(a, b)] * u[b]
    });
    conjugated.max_abs_diff(&shifted.matrix)
}

/// Largest difference between the sorted square-basis eigenvalues at
/// `(φ₁, φ₂)` and at `(0, 0)`.
pub fn phase_invariance_deviation(
    h: &FourierHamiltonian,
    phi1: f64,
    phi2: f64,
    n_max: u32,
) -> Result<f64, LinalgError> {
    let a = build_mmft(&h.with_phases(phi1, phi2), n_max).diagonalize()?.eigenvalues;
    let b = build_mmft(&h.with_phases(0.0, 0.0), n_max).diagonalize()?.eigenvalues;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntertwiningReport {
    /// `max |H_F D - D H_MMFT|` over interior columns.
    pub hd_dh: f64,
    /// `max |D P - I|` over harmonics whose canonical point lies in the square.
    pub dp: f64,
    pub interior_columns: usize,
}

/// Builds the demotion `D|n₁,n₂,α⟩ = |n₁N₁+n₂N₂, α⟩` and promotion
/// `P|n,α⟩ = |canonical(n), α⟩` maps between the square basis of half-width
/// `n_max` and a single-mode basis wide enough to hold every demoted point,
/// and checks `H_F D = D H_MMFT` on columns at least `interior_margin` away
/// from the square's edge.
pub fn demotion_intertwining_check(
    h: &FourierHamiltonian,
    n_max: u32,
    interior_margin: u32,
) -> Result<IntertwiningReport, MmftError> {
    let (rp, rq) = h.coupling_reach();
    let required = (rp + rq) as u32;
    if interior_margin < required {
        return Err(MmftError::MarginTooSmall { margin: interior_margin, required });
    }
    let mp = *h.mode_pair();
    let d = h.dim();
    let n_f = n_max as i64 * (mp.n1() + mp.n2());
    let f_basis = crate::basis::SingleModeBasis::new(-n_f, n_f).expect("non-empty range");
    let hf = build_sft(h, f_basis);
    let hm = build_mmft(h, n_max);
    let square = &hm.basis;
    let f_size = f_basis.len() * d;
    let m_size = square.len() * d;

    let mut dmat = ComplexMatrix::zeros(f_size, m_size);
    for s in 0..square.len() {
        let n = square.point(s).harmonic(&mp);
        let fpos = f_basis.position(n).expect("demoted point is in range");
        for a in 0..d {
            dmat[(fpos * d + a, s * d + a)] = C64::new(1.0, 0.0);
        }
    }
    let mut pmat = ComplexMatrix::zeros(m_size, f_size);
    let mut promotable = Vec::new();
    for (fpos, n) in f_basis.indices().enumerate() {
        if let Some(s) = square_slot(canonical_point(n, &mp), n_max) {
            promotable.push(fpos);
            for a in 0..d {
                pmat[(s * d + a, fpos * d + a)] = C64::new(1.0, 0.0);
            }
        }
    }

    let lhs = hf.matrix().matmul(&dmat);
    let rhs = dmat.matmul(hm.matrix());
    let limit = n_max as i64 - interior_margin as i64;
    let mut hd_dh: f64 = 0.0;
    let mut interior_columns = 0;
    for s in 0..square.len() {
        let p = square.point(s);
        if p.n1.abs() > limit || p.n2.abs() > limit {
            continue;
        }
        interior_columns += d;
        for a in 0..d {
            let c = s * d + a;
            for r in 0..f_size {
                hd_dh = hd_dh.max((lhs[(r, c)] - rhs[(r, c)]).norm());
            }
        }
    }

    let dp_mat = dmat.matmul(&pmat);
    let mut dp: f64 = 0.0;
    for &fpos in &promotable {
        for a in 0..d {
            let c = fpos * d + a;
            for r in 0..f_size {
                let expected = if r == c { 1.0 } else { 0.0 };
                dp = dp.max((dp_mat[(r, c)] - expected).norm());
            }
        }
    }
    Ok(IntertwiningReport { hd_dh, dp, interior_columns })
}
