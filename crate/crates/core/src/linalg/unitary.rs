//! Functions of unitary matrices.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use super::eigen::{canonical_order, eig_hermitian_with, DEGENERACY_GAP};
use super::{ComplexMatrix, LinalgError, Tolerances};

/// `exp(-i·scale·m)` for Hermitian `m`, computed as `W e^{-iΛ·scale} W†`.
pub fn unitary_from_hermitian_exponent(
    m: &ComplexMatrix,
    scale: f64,
) -> Result<ComplexMatrix, LinalgError> {
    Ok(super::eig_hermitian(m)?.unitary_exponent(scale))
}

/// Eigen-decomposition of a unitary matrix: `u = W e^{-i diag(phases)} W†`.
#[derive(Clone, Debug)]
pub struct UnitaryLog {
    /// Ascending, each in `(-π, π]`.
    pub phases: Vec<f64>,
    pub w: ComplexMatrix,
}

impl UnitaryLog {
    /// `W e^{-i diag(phases)·scale} W†`; `scale = 1` reproduces the input.
    pub fn power(&self, scale: f64) -> ComplexMatrix {
        let n = self.phases.len();
        let mut scaled = self.w.clone();
        for j in 0..n {
            let f = C64::from_polar(1.0, -self.phases[j] * scale);
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        scaled.matmul(&self.w.adjoint())
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let mut x = theta.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

pub fn log_unitary(u: &ComplexMatrix) -> Result<UnitaryLog, LinalgError> {
    log_unitary_with(u, &Tolerances::default())
}

/// Principal logarithm of a unitary matrix.
///
/// The unitary is first rotated by a global phase `e^{iγ}` chosen so that no
/// eigenvalue sits near `-1` (γ is placed in the largest gap of the candidate
/// eigenphases `±acos` of the Hermitian part's spectrum). The Cayley transform
/// `H = i (I - U')(I + U')⁻¹` is then Hermitian, shares the eigenvectors of
/// `U`, and maps eigenphases monotonically (`h = -tan(θ/2)`), so distinct
/// eigenphases never collapse into a degenerate cluster of `H`. Phases are read
/// back from Rayleigh quotients `w† U w`.
pub fn log_unitary_with(u: &ComplexMatrix, tol: &Tolerances) -> Result<UnitaryLog, LinalgError> {
    if !u.is_square() {
        return Err(LinalgError::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    let deviation = u.unitarity_deviation();
    if deviation > tol.unitarity {
        return Err(LinalgError::NotUnitary { deviation });
    }
    let n = u.rows();
    if n == 0 {
        return Ok(UnitaryLog { phases: Vec::new(), w: ComplexMatrix::zeros(0, 0) });
    }

    let cosines = eig_hermitian_with(&u.hermitian_part(), tol)?.eigenvalues;
    let gamma = rotation_avoiding_minus_one(&cosines);
    let rot = C64::from_polar(1.0, gamma);
    let rotated = u.scale(rot);

    let id = ComplexMatrix::identity(n);
    let plus = &id + &rotated;
    let minus = &id - &rotated;
    let x = lu_solve(&plus, &minus)?;
    let cayley = x.scale(C64::new(0.0, 1.0)).hermitian_part();
    let eig = eig_hermitian_with(&cayley, tol)?;

    let w = eig.eigenvectors;
    let uw = u.matmul(&w);
    let phases: Vec<f64> = (0..n)
        .map(|j| {
            let rq: C64 = (0..n).map(|i| w[(i, j)].conj() * uw[(i, j)]).sum();
            wrap_phase(-rq.arg())
        })
        .collect();
    let (phases, w) = canonical_order(phases, w, DEGENERACY_GAP);
    Ok(UnitaryLog { phases, w })
}

/// Global phase γ such that `e^{iγ}U` keeps its eigenvalues away from `-1`,
/// given the eigenvalues `cos θ_j` of the Hermitian part of `U`.
fn rotation_avoiding_minus_one(cosines: &[f64]) -> f64 {
    let mut angles: Vec<f64> = cosines
        .iter()
        .flat_map(|&c| {
            let a = c.clamp(-1.0, 1.0).acos();
            [a, -a]
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut best_gap = angles[0] + TAU - angles[angles.len() - 1];
    let mut mid = angles[angles.len() - 1] + best_gap / 2.0;
    for pair in angles.windows(2) {
        let gap = pair[1] - pair[0];
        if gap > best_gap {
            best_gap = gap;
            mid = pair[0] + gap / 2.0;
        }
    }
    // Eigenphase θ of U becomes θ - γ in e^{iγ}U; send the gap midpoint to π.
    wrap_phase(mid - PI)
}

/// Solves `a x = b` by LU decomposition with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    assert_eq!(b.rows(), n, "right-hand side row count");
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .expect("non-empty range");
        let pnorm = lu[(pivot, k)].norm();
        if pnorm <= f64::EPSILON * scale * n as f64 || pnorm == 0.0 {
            return Err(LinalgError::Singular);
        }
        if pivot != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(k, j)] = x[(pivot, j)];
                x[(pivot, j)] = t;
            }
        }
        let inv = 1.0 / lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] * inv;
            if factor.norm() == 0.0 {
                continue;
            }
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= factor * t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(i, j)] -= factor * t;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = 1.0 / lu[(k, k)];
        for j in 0..x.cols() {
            let mut acc = x[(k, j)];
            for i in k + 1..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc * inv;
        }
    }
    Ok(x)
}
