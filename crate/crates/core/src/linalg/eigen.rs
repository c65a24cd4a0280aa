//! Complex Hermitian eigendecomposition.
//!
//! The matrix is reduced to Hermitian tridiagonal form with Householder
//! reflections, the complex off-diagonal is made real by a diagonal phase
//! similarity, and the resulting real symmetric tridiagonal matrix is
//! diagonalized with implicit-shift QL.

use num_complex::Complex64 as C64;

use super::{ComplexMatrix, LinalgError, Tolerances};

/// Eigenpairs of a Hermitian matrix: `m = W diag(λ) W†`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending. Members of a degenerate cluster may be reordered by the
    /// eigenvector tie-break, so ordering inside a cluster holds only up to
    /// [`DEGENERACY_GAP`].
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

/// Eigenvalues closer than this (scaled by `max(1, max|M|)`) are treated as
/// one degenerate cluster when ordering eigenvectors.
pub const DEGENERACY_GAP: f64 = 1e-9;

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ_j f(λ_j) w_j w_j†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let w = &self.eigenvectors;
        let fvals: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut scaled = w.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= fvals[j];
            }
        }
        scaled.matmul(&w.adjoint())
    }

    /// `W e^{-iΛ·scale} W†`.
    pub fn unitary_exponent(&self, scale: f64) -> ComplexMatrix {
        self.map_eigenvalues(|l| C64::from_polar(1.0, -l * scale))
    }

    /// `W Λ W†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| C64::new(l, 0.0))
    }

    /// `max |M - WΛW†|`.
    pub fn reconstruction_residual(&self, m: &ComplexMatrix) -> f64 {
        self.reconstruct().max_abs_diff(m)
    }

    /// `max |W†W - I|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        self.eigenvectors.unitarity_deviation()
    }
}

/// Eigendecomposition of a Hermitian matrix with default tolerances.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition, LinalgError> {
    eig_hermitian_with(m, &Tolerances::default())
}

pub fn eig_hermitian_with(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<EigenDecomposition, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let scale = m.max_abs();
    let deviation = m.hermiticity_deviation();
    if deviation > tol.hermiticity * scale {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }

    let mut a = m.hermitian_part();
    let (q, diag, offdiag) = tridiagonalize(&mut a);

    // T = D R D† with D = diag(phase) and R real with off-diagonal |e_k|.
    let mut phase = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let mag = offdiag[k].norm();
        e[k] = mag;
        phase[k + 1] = if mag > 0.0 { phase[k] * (offdiag[k] / mag) } else { phase[k] };
    }
    let mut d = diag;
    let mut zt = identity_rows(n);
    tql2(&mut d, &mut e, &mut zt)?;

    // W = Q D Z, where row j of `zt` is column j of Z.
    let mut qd = q;
    for i in 0..n {
        for k in 0..n {
            qd[(i, k)] *= phase[k];
        }
    }
    let mut w = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let qrow = qd.row(i);
        for (j, zrow) in zt.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (&qv, &zv) in qrow.iter().zip(zrow) {
                acc += qv * zv;
            }
            w[(i, j)] = acc;
        }
    }

    let (eigenvalues, eigenvectors) =
        canonical_order(d, w, DEGENERACY_GAP * scale.max(1.0));
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Reduces the Hermitian `a` in place to tridiagonal form, returning the
/// accumulated unitary `Q` (with `a_in = Q T Q†`), the real diagonal, and the
/// complex subdiagonal `T[k+1, k]`.
fn tridiagonalize(a: &mut ComplexMatrix) -> (ComplexMatrix, Vec<f64>, Vec<C64>) {
    let n = a.rows();
    let mut q = ComplexMatrix::identity(n);
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let off = k + 1;
        let xnorm = (off..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(off, k)];
        let unit = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -unit * xnorm;

        for i in 0..m {
            v[i] = a[(off + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v[..m] {
            *vi /= vnorm;
        }

        // p = A v on the trailing block.
        for i in 0..m {
            let row = &a.row(off + i)[off..];
            p[i] = row.iter().zip(&v[..m]).map(|(&x, &y)| x * y).sum();
        }
        let kappa: C64 = v[..m].iter().zip(&p[..m]).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = kappa.re;
        for i in 0..m {
            p[i] -= v[i] * kappa;
        }
        // A ← A - 2 (v w† + w v†), with w stored in p.
        for i in 0..m {
            let vi = v[i] * 2.0;
            let wi = p[i] * 2.0;
            let row = &mut a.as_mut_slice()[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        a[(off, k)] = alpha;
        a[(k, off)] = alpha.conj();
        for i in off + 1..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        // Q ← Q H on columns off..n.
        for r in 0..n {
            let row = &mut q.as_mut_slice()[r * n + off..r * n + n];
            let s: C64 = row.iter().zip(&v[..m]).map(|(&x, &y)| x * y).sum::<C64>() * 2.0;
            for j in 0..m {
                row[j] -= s * v[j].conj();
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let offdiag = (0..n.saturating_sub(1)).map(|k| a[(k + 1, k)]).collect();
    (q, diag, offdiag)
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect()
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `e[i]` between `i` and `i+1`, `e[n-1] = 0`). Rotations are
/// accumulated into the rows of `zt`. Eigenvalues come back ascending.
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [Vec<f64>]) -> Result<(), LinalgError> {
    let n = d.len();
    let max_iter = 30 * n.max(1);
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    e[n - 1] = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(LinalgError::ConvergenceFailure { iterations: max_iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = zt.split_at_mut(i + 1);
                    let zi = &mut lo[i];
                    let zi1 = &mut hi[0];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps the rotation bookkeeping simple.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            zt.swap(i, k);
        }
    }
    Ok(())
}

/// Phase-fixes every column so its largest-magnitude component is real
/// positive, sorts pairs by value, and orders each degenerate cluster by the
/// lexicographic comparison of the phase-fixed vectors.
pub(crate) fn canonical_order(
    values: Vec<f64>,
    mut vectors: ComplexMatrix,
    gap: f64,
) -> (Vec<f64>, ComplexMatrix) {
    let n = values.len();
    for j in 0..n {
        fix_phase(&mut vectors, j);
    }
    let cols: Vec<Vec<C64>> = (0..n).map(|j| vectors.column(j)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] < gap {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&a, &b| lexicographic_cmp(&cols[a], &cols[b]));
        }
        start = end;
    }

    let sorted_values = order.iter().map(|&j| values[j]).collect();
    let mut sorted = ComplexMatrix::zeros(vectors.rows(), n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &cols[src]);
    }
    (sorted_values, sorted)
}

fn fix_phase(m: &mut ComplexMatrix, j: usize) {
    let rows = m.rows();
    let max = (0..rows).map(|i| m[(i, j)].norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = (0..rows)
        .find(|&i| m[(i, j)].norm() >= max * (1.0 - 1e-10))
        .expect("maximum is attained");
    let z = m[(pivot, j)];
    let rot = z.conj() / z.norm();
    for i in 0..rows {
        m[(i, j)] *= rot;
    }
}

/// Larger leading components sort first; differences below `1e-10` are ties.
fn lexicographic_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    const FUZZ: f64 = 1e-10;
    for (x, y) in a.iter().zip(b) {
        if (x.re - y.re).abs() > FUZZ {
            return y.re.total_cmp(&x.re);
        }
        if (x.im - y.im).abs() > FUZZ {
            return y.im.total_cmp(&x.im);
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::sigma_x;

    #[test]
    fn identity_has_unit_eigenvalues() {
        let eig = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        assert!(eig.orthonormality_deviation() < 1e-15);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let eig = eig_hermitian(&sigma_x()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(eig.reconstruction_residual(&sigma_x()) < 1e-15);
    }

    #[test]
    fn diagonal_two_level_block() {
        let m = ComplexMatrix::from_real_diagonal(&[1.5, 0.0]);
        let eig = eig_hermitian(&m).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0, 1.5]);
        // Standard basis vectors, phase-fixed to +1.
        assert_eq!(eig.eigenvectors[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(eig.eigenvectors[(0, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        assert!(matches!(
            eig_hermitian(&ComplexMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
        let mut m = sigma_x();
        m[(0, 1)] = C64::new(1.0, 1e-3);
        assert!(matches!(eig_hermitian(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn complex_tridiagonal_phases_are_removed() {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let m = ComplexMatrix::from_rows(&[
            [one * 2.0, i, zero],
            [-i, one, one + i],
            [zero, one - i, one * -1.0],
        ]);
        let eig = eig_hermitian(&m).unwrap();
        assert!(eig.reconstruction_residual(&m) < 1e-14);
        assert!(eig.orthonormality_deviation() < 1e-14);
        let trace: f64 = eig.eigenvalues.iter().sum();
        assert!((trace - 2.0).abs() < 1e-14);
    }

    #[test]
    fn phase_fix_makes_largest_component_real_positive() {
        let m = ComplexMatrix::from_rows(&[
            [C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            [C64::new(0.0, -2.0), C64::new(-1.0, 0.0)],
        ]);
        let eig = eig_hermitian(&m).unwrap();
        for j in 0..2 {
            let col = eig.eigenvectors.column(j);
            let pivot = col
                .iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
    }

    #[test]
    fn deterministic_for_identical_input() {
        let m = ComplexMatrix::from_fn(7, 7, |i, j| {
            let x = ((i * 7 + j) as f64).sin();
            let y = ((i + j * 3) as f64).cos();
            if i == j {
                C64::new(x, 0.0)
            } else if i < j {
                C64::new(x, y)
            } else {
                C64::new(((j * 7 + i) as f64).sin(), -((j + i * 3) as f64).cos())
            }
        });
        let a = eig_hermitian(&m).unwrap();
        let b = eig_hermitian(&m).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        assert!(a.reconstruction_residual(&m) < 1e-13);
    }

    #[test]
    fn degenerate_cluster_is_orthonormal() {
        // Two-fold degenerate spectrum {1, 1, 3}.
        let m = ComplexMatrix::from_real_rows(&[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]);
        let eig = eig_hermitian(&m).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(eig.orthonormality_deviation() < 1e-14);
        assert!(eig.reconstruction_residual(&m) < 1e-14);
    }
}
