//! Direct integration of `i dU/dt = H(t) U` and the Floquet decomposition of
//! the one-period propagator.
//!
//! With `U(T,0) = W e^{-iΛ} W†` the periodic factor is
//! `Φ(t) = U(t mod T, 0) W e^{iΛ (t mod T)/T}` and every solution is
//! `U(t,0) = Φ(t) e^{-iΛt/T} Φ†(0)`.

use thiserror::Error;

use crate::linalg::{log_unitary, ComplexMatrix, LinalgError};
use crate::model::FourierHamiltonian;
use crate::C64;

/// Default number of RK4 steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TdseError {
    #[error("negative evolution time {0}")]
    NegativeTime(f64),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("propagator drifted from unitarity by {deviation:e}; reduce dt")]
    NonUnitaryDrift { deviation: f64 },
    #[error("column index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Fixed-step classical RK4 settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Largest step; shrunk slightly so a whole number of steps fits.
    pub dt: f64,
    /// Re-orthonormalize the columns every this many steps (0 = never).
    pub renormalize_every: usize,
    /// Allowed `max |U†U - I|` at the end of a run.
    pub unitarity_tol: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, renormalize_every: 0, unitarity_tol: 1e-8 }
    }

    /// `dt = T / 4096` for the Hamiltonian's period.
    pub fn for_hamiltonian(h: &FourierHamiltonian) -> Self {
        Self::new(h.period() / DEFAULT_STEPS_PER_PERIOD as f64)
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }
}

/// `U(t_end, 0)`.
pub fn integrate(h: &FourierHamiltonian, t_end: f64, cfg: &IntegratorConfig) -> Result<ComplexMatrix, TdseError> {
    integrate_between(h, 0.0, t_end, cfg)
}

/// `U(t1, t0)` for `t1 >= t0`.
pub fn integrate_between(
    h: &FourierHamiltonian,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<ComplexMatrix, TdseError> {
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(TdseError::InvalidStep(cfg.dt));
    }
    let span = t1 - t0;
    if span < 0.0 || span.is_nan() {
        return Err(TdseError::NegativeTime(span));
    }
    let mut u = ComplexMatrix::identity(h.dim());
    if span == 0.0 {
        return Ok(u);
    }
    // The tiny shave keeps an exact multiple of dt from rounding up a step.
    let steps = ((span / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        u = rk4_step(h, &u, t, dt);
        if cfg.renormalize_every > 0 && (s + 1) % cfg.renormalize_every == 0 {
            orthonormalize_columns(&mut u);
        }
    }
    let deviation = u.unitarity_deviation();
    if deviation > cfg.unitarity_tol {
        return Err(TdseError::NonUnitaryDrift { deviation });
    }
    Ok(u)
}

/// `-i H(t) U`.
fn derivative(h: &FourierHamiltonian, t: f64, u: &ComplexMatrix) -> ComplexMatrix {
    h.evaluate_time(t).matmul(u).scale(C64::new(0.0, -1.0))
}

fn axpy(u: &ComplexMatrix, k: &ComplexMatrix, factor: f64) -> ComplexMatrix {
    let mut out = u.clone();
    for (o, x) in out.as_mut_slice().iter_mut().zip(k.as_slice()) {
        *o += x * factor;
    }
    out
}

fn rk4_step(h: &FourierHamiltonian, u: &ComplexMatrix, t: f64, dt: f64) -> ComplexMatrix {
    let k1 = derivative(h, t, u);
    let k2 = derivative(h, t + dt / 2.0, &axpy(u, &k1, dt / 2.0));
    let k3 = derivative(h, t + dt / 2.0, &axpy(u, &k2, dt / 2.0));
    let k4 = derivative(h, t + dt, &axpy(u, &k3, dt));
    let mut out = u.clone();
    let slices = (k1.as_slice(), k2.as_slice(), k3.as_slice(), k4.as_slice());
    for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
        *o += (slices.0[i] + slices.1[i] * 2.0 + slices.2[i] * 2.0 + slices.3[i]) * (dt / 6.0);
    }
    out
}

/// Modified Gram–Schmidt on the columns.
fn orthonormalize_columns(u: &mut ComplexMatrix) {
    let n = u.cols();
    for j in 0..n {
        let mut col = u.column(j);
        for i in 0..j {
            let prev = u.column(i);
            let overlap: C64 = prev.iter().zip(&col).map(|(a, b)| a.conj() * b).sum();
            for (c, p) in col.iter_mut().zip(&prev) {
                *c -= overlap * p;
            }
        }
        let norm = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut col {
            *c /= norm;
        }
        u.set_column(j, &col);
    }
}

/// Floquet decomposition built from the one-period propagator.
#[derive(Clone, Debug)]
pub struct MonodromyDecomposition {
    h: FourierHamiltonian,
    cfg: IntegratorConfig,
    period: f64,
    u_period: ComplexMatrix,
    /// `Λ`, ascending in `(-π, π]`.
    pub phases: Vec<f64>,
    pub w: ComplexMatrix,
}

pub fn monodromy_floquet(
    h: &FourierHamiltonian,
    cfg: &IntegratorConfig,
) -> Result<MonodromyDecomposition, TdseError> {
    let period = h.period();
    let u_period = integrate(h, period, cfg)?;
    let log = log_unitary(&u_period)?;
    Ok(MonodromyDecomposition {
        h: h.clone(),
        cfg: *cfg,
        period,
        u_period,
        phases: log.phases,
        w: log.w,
    })
}

impl MonodromyDecomposition {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `U(T, 0)`.
    pub fn u_period(&self) -> &ComplexMatrix {
        &self.u_period
    }

    /// `E_j = Λ_j / T`, inside `(-ω_B/2, ω_B/2]`.
    pub fn quasi_energies(&self) -> Vec<f64> {
        self.phases.iter().map(|l| l / self.period).collect()
    }

    /// `(n, t mod T)` with `n = ⌊t/T⌋`.
    fn split(&self, t: f64) -> Result<(u32, f64), TdseError> {
        if t < 0.0 || t.is_nan() {
            return Err(TdseError::NegativeTime(t));
        }
        let n = (t / self.period).floor();
        let rem = (t - n * self.period).max(0.0);
        Ok((n as u32, rem))
    }

    fn right_phase(&self, m: &ComplexMatrix, sign: f64, tau: f64) -> ComplexMatrix {
        let mut out = m.clone();
        for (j, &l) in self.phases.iter().enumerate() {
            let f = C64::from_polar(1.0, sign * l * tau / self.period);
            for i in 0..out.rows() {
                out[(i, j)] *= f;
            }
        }
        out
    }

    /// `Φ(t) = U(t mod T, 0) W e^{iΛ (t mod T)/T}`.
    pub fn phi(&self, t: f64) -> Result<ComplexMatrix, TdseError> {
        let (_, rem) = self.split(t)?;
        let u = integrate(&self.h, rem, &self.cfg)?;
        Ok(self.right_phase(&u.matmul(&self.w), 1.0, rem))
    }

    /// `U(t, 0) = U(t mod T, 0) U(T, 0)^n`.
    pub fn evolve(&self, t: f64) -> Result<ComplexMatrix, TdseError> {
        let (n, rem) = self.split(t)?;
        let mut power = ComplexMatrix::identity(self.u_period.rows());
        for _ in 0..n {
            power = power.matmul(&self.u_period);
        }
        Ok(integrate(&self.h, rem, &self.cfg)?.matmul(&power))
    }

    /// `Φ(t) e^{-iΛt/T} Φ†(0)`.
    pub fn reconstruct(&self, t: f64) -> Result<ComplexMatrix, TdseError> {
        let phi_t = self.phi(t)?;
        let phi_0 = self.phi(0.0)?;
        Ok(self.right_phase(&phi_t, -1.0, t).matmul(&phi_0.adjoint()))
    }

    /// Floquet solution `ψ_j(t) = Φ_{:,j}(t) e^{-iE_j t}`.
    pub fn column_solution(&self, j: usize, t: f64) -> Result<Vec<C64>, TdseError> {
        let dim = self.phases.len();
        if j >= dim {
            return Err(TdseError::IndexOutOfRange { index: j, dim });
        }
        let phase = C64::from_polar(1.0, -self.phases[j] / self.period * t);
        Ok(self.phi(t)?.column(j).into_iter().map(|c| c * phase).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_omega_2omega_example;
    use std::f64::consts::TAU;

    fn static_two_level() -> FourierHamiltonian {
        FourierHamiltonian::stationary(ComplexMatrix::from_real_diagonal(&[0.0, 1.5]), 1.0).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let h = make_omega_2omega_example(0.0);
        let cfg = IntegratorConfig::for_hamiltonian(&h);
        assert_eq!(integrate(&h, 0.0, &cfg).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn static_evolution_is_analytic() {
        let h = static_two_level();
        let cfg = IntegratorConfig::for_hamiltonian(&h);
        let u = integrate(&h, TAU, &cfg).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, -1.5 * TAU)]);
        assert!(u.max_abs_diff(&expected) < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let h = static_two_level();
        let cfg = IntegratorConfig::for_hamiltonian(&h);
        assert!(matches!(integrate(&h, -1.0, &cfg), Err(TdseError::NegativeTime(_))));
        assert!(matches!(integrate(&h, 1.0, &cfg.with_dt(0.0)), Err(TdseError::InvalidStep(_))));
        let coarse = IntegratorConfig::new(1.0);
        assert!(matches!(
            integrate(&make_omega_2omega_example(0.0), 20.0, &coarse),
            Err(TdseError::NonUnitaryDrift { .. })
        ));
    }

    #[test]
    fn renormalization_restores_unitarity() {
        let h = make_omega_2omega_example(0.0);
        let cfg = IntegratorConfig { dt: 0.05, renormalize_every: 1, unitarity_tol: 1e-8 };
        let u = integrate(&h, 10.0, &cfg).unwrap();
        assert!(u.unitarity_deviation() < 1e-13);
    }

    #[test]
    fn static_quasi_energy_folds_to_half() {
        let h = static_two_level();
        let md = monodromy_floquet(&h, &IntegratorConfig::for_hamiltonian(&h)).unwrap();
        let e = md.quasi_energies();
        assert!(e[0].abs() < 1e-8);
        assert!((e[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn column_solution_index_checked() {
        let h = static_two_level();
        let md = monodromy_floquet(&h, &IntegratorConfig::for_hamiltonian(&h)).unwrap();
        assert!(matches!(md.column_solution(2, 0.0), Err(TdseError::IndexOutOfRange { index: 2, dim: 2 })));
        assert_eq!(md.phi(0.0).unwrap(), md.w);
        assert!(matches!(md.evolve(-0.5), Err(TdseError::NegativeTime(_))));
    }

    #[test]
    fn fourth_order_convergence() {
        let h = make_omega_2omega_example(0.0);
        let reference = integrate(&h, TAU, &IntegratorConfig::new(TAU / 8192.0)).unwrap();
        let loose = |steps: f64| IntegratorConfig { unitarity_tol: 1e-3, ..IntegratorConfig::new(TAU / steps) };
        let coarse = integrate(&h, TAU, &loose(512.0)).unwrap();
        let fine = integrate(&h, TAU, &loose(1024.0)).unwrap();
        let ratio = coarse.max_abs_diff(&reference) / fine.max_abs_diff(&reference);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }
}
