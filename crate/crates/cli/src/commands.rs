use std::f64::consts::{PI, TAU};

use floquet::basis::SingleModeBasis;
use floquet::linalg::{eig_hermitian, ComplexMatrix, LinalgError};
use floquet::mmft::{
    block_phases, build_mmft, build_mmft_periodic, demotion_intertwining_check, k_block_decompose,
    k_from_phases, phase_shift_conjugation_check, translation_matrix, MmftError,
};
use floquet::model::FourierHamiltonian;
use floquet::propagator::{FloquetPropagator, PropagatorError};
use floquet::sft::{build_sft, ladder_check, sft_spectrum};
use floquet::spectrum::{distance_to_ladder, fold_quasi_energy};
use floquet::tdse::{integrate, integrate_between, monodromy_floquet, IntegratorConfig, TdseError};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::config::{Engine, ExperimentConfig};
use crate::table::{Cell, ResultTable};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SpectrumMode {
    /// Re-diagonalize the single-mode Hamiltonian over a phase grid.
    SftSweep,
    /// Raw eigenvalues of the square-truncated two-mode Hamiltonian.
    MmftSquare,
    /// Eigenvalues of each k block of the orbit-basis Hamiltonian.
    MmftPeriodic,
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::ConvergenceFailure { .. } => CliError::Convergence(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<TdseError> for CliError {
    fn from(e: TdseError) -> Self {
        match e {
            TdseError::NonUnitaryDrift { .. } => CliError::Convergence(e.to_string()),
            TdseError::NegativeTime(_) | TdseError::InvalidStep(_) => CliError::Config(e.to_string()),
            TdseError::Linalg(l) => l.into(),
            TdseError::IndexOutOfRange { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PropagatorError> for CliError {
    fn from(e: PropagatorError) -> Self {
        match e {
            PropagatorError::Linalg(l) => l.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MmftError> for CliError {
    fn from(e: MmftError) -> Self {
        match e {
            MmftError::Linalg(l) => l.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

const TOLERANCES: &str = "hermiticity=1e-12 unitarity=1e-10 rk4_unitarity=1e-8";

fn provenance(cfg: &ExperimentConfig, command: &str) -> Vec<(String, String)> {
    vec![
        ("command".into(), command.into()),
        ("config_hash".into(), cfg.hash()),
        ("cli_version".into(), env!("CARGO_PKG_VERSION").into()),
        ("core_version".into(), floquet::VERSION.into()),
        ("tolerances".into(), TOLERANCES.into()),
    ]
}

fn pair_label(beta: usize, alpha: usize) -> String {
    format!("b{beta}_a{alpha}")
}

enum Stepper {
    Tdse { h: FourierHamiltonian, cfg: IntegratorConfig, u: ComplexMatrix, at: f64 },
    Floquet(FloquetPropagator),
}

impl Stepper {
    /// Propagator `U(t, 0)`; calls must come with non-decreasing `t`.
    fn matrix(&mut self, t: f64) -> Result<ComplexMatrix, CliError> {
        match self {
            Stepper::Tdse { h, cfg, u, at } => {
                *u = integrate_between(h, *at, t, cfg)?.matmul(u);
                *at = t;
                Ok(u.clone())
            }
            Stepper::Floquet(p) => Ok(p.matrix(t)?),
        }
    }
}

/// One row per `(t, engine)` with populations `|⟨β|U|α⟩|²`, amplitudes, and
/// the largest transition-population (`β ≠ α`) gap to the reference engine
/// (`tdse` when selected, otherwise the first engine). Survival probabilities
/// are left out of the gap since truncated Floquet propagators leak norm.
pub fn propagate(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    cfg.validate_grid()?;
    if cfg.engines.is_empty() {
        return Err(CliError::Config("no engines selected".into()));
    }
    let h = cfg.hamiltonian()?;
    let d = h.dim();
    let mut steppers = Vec::new();
    for &e in &cfg.engines {
        let s = match e {
            Engine::Tdse => Stepper::Tdse {
                h: h.clone(),
                cfg: cfg.integrator(&h)?,
                u: ComplexMatrix::identity(d),
                at: 0.0,
            },
            Engine::Sft => Stepper::Floquet(
                build_sft(&h, SingleModeBasis::symmetric(cfg.truncation.sft_n_max)).propagator()?,
            ),
            Engine::Mmft => Stepper::Floquet(build_mmft(&h, cfg.truncation.mmft_n_max).propagator()?),
        };
        steppers.push(s);
    }
    let reference = cfg.engines.iter().position(|&e| e == Engine::Tdse).unwrap_or(0);

    let mut columns = vec!["t".to_string(), "engine".to_string()];
    for beta in 0..d {
        for alpha in 0..d {
            let l = pair_label(beta, alpha);
            columns.extend([format!("pop_{l}"), format!("re_{l}"), format!("im_{l}")]);
        }
    }
    columns.push("transition_pop_dev_vs_ref".into());
    let mut table = ResultTable::new(columns);
    for (k, v) in provenance(cfg, "propagate") {
        table.note(&k, v);
    }
    table.note("reference_engine", cfg.engines[reference].name());

    for t in cfg.time_grid.times() {
        let mats = steppers.iter_mut().map(|s| s.matrix(t)).collect::<Result<Vec<_>, _>>()?;
        for (e, g) in cfg.engines.iter().zip(&mats) {
            let mut row: Vec<Cell> = vec![t.into(), e.name().into()];
            let mut dev: f64 = 0.0;
            for beta in 0..d {
                for alpha in 0..d {
                    let a = g[(beta, alpha)];
                    let pop = a.norm_sqr();
                    if beta != alpha {
                        dev = dev.max((pop - mats[reference][(beta, alpha)].norm_sqr()).abs());
                    }
                    row.extend([pop.into(), a.re.into(), a.im.into()]);
                }
            }
            row.push(dev.into());
            table.push(row);
        }
    }
    Ok(table)
}

pub fn spectrum(cfg: &ExperimentConfig, mode: SpectrumMode, sweep_points: usize) -> Result<ResultTable, CliError> {
    let h = cfg.hamiltonian()?;
    let mp = *h.mode_pair();
    let wb = mp.omega_b();
    let (phi1, phi2) = h.phases();
    let mut table;
    match mode {
        SpectrumMode::SftSweep => {
            if sweep_points == 0 {
                return Err(CliError::Config("sweep needs at least one point".into()));
            }
            table = ResultTable::new(cols(&["phi2", "phi_rel", "index", "energy", "ladder_rep"]));
            let n_set = SingleModeBasis::symmetric(cfg.truncation.sft_n_max);
            let sweeps = (0..sweep_points)
                .into_par_iter()
                .map(|j| {
                    let phi = TAU * j as f64 / sweep_points as f64;
                    sft_spectrum(&build_sft(&h.with_phases(phi1, phi), n_set)).map(|s| (phi, s))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (phi, spec) in sweeps {
                let rel = k_from_phases(&mp, phi1, phi);
                for (i, e) in spec.entries.iter().enumerate() {
                    table.push(vec![phi.into(), rel.into(), i.into(), e.energy.into(), fold_quasi_energy(e.energy, wb).into()]);
                }
            }
        }
        SpectrumMode::MmftSquare => {
            table = ResultTable::new(cols(&["phi_rel", "index", "energy", "ladder_rep"]));
            let spec = build_mmft(&h, cfg.truncation.mmft_n_max).spectrum()?;
            let rel = k_from_phases(&mp, phi1, phi2);
            for (i, e) in spec.entries.iter().enumerate() {
                table.push(vec![rel.into(), i.into(), e.energy.into(), fold_quasi_energy(e.energy, wb).into()]);
            }
        }
        SpectrumMode::MmftPeriodic => {
            table = ResultTable::new(cols(&["k", "phi_rel", "index", "energy", "ladder_rep"]));
            let ob = cfg.orbit_basis(&h)?;
            let kb = k_block_decompose(&build_mmft_periodic(&h, &ob))?;
            let blocks = kb
                .blocks
                .par_iter()
                .map(eig_hermitian)
                .collect::<Result<Vec<_>, _>>()?;
            let base = k_from_phases(&mp, phi1, phi2);
            for (eig, &k) in blocks.iter().zip(&kb.k_values) {
                let rel = fold_phase(k + base);
                for (i, &e) in eig.eigenvalues.iter().enumerate() {
                    table.push(vec![k.into(), rel.into(), i.into(), e.into(), fold_quasi_energy(e, wb).into()]);
                }
            }
        }
    }
    for (k, v) in provenance(cfg, "spectrum") {
        table.note(&k, v);
    }
    table.note("mode", mode.to_possible_value().expect("no skipped variants").get_name());
    if mode == SpectrumMode::MmftSquare {
        table.note(
            "warning",
            "square truncation: some eigenvalues are artifacts of the finite basis and are not quasi-energies",
        );
    }
    Ok(table)
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn fold_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

struct Checks {
    table: ResultTable,
    failures: usize,
}

impl Checks {
    fn record(&mut self, name: &str, value: f64, tolerance: f64, pass: bool) {
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![name.into(), value.into(), tolerance.into(), pass.into()]);
    }

    fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.record(name, value, tolerance, value <= tolerance);
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs the invariant suite. Returns the table and the number of failed checks.
pub fn validate(cfg: &ExperimentConfig) -> Result<(ResultTable, usize), CliError> {
    let h = cfg.hamiltonian()?;
    let d = h.dim();
    let mp = *h.mode_pair();
    let wb = mp.omega_b();
    let period = h.period();
    let icfg = cfg.integrator(&h)?;
    let sft_n = cfg.truncation.sft_n_max;
    let mut c = Checks { table: ResultTable::new(cols(&["check", "value", "tolerance", "pass"])), failures: 0 };

    let sft = build_sft(&h, SingleModeBasis::symmetric(sft_n));
    c.at_most("sft_hermiticity", sft.matrix().hermiticity_deviation(), 1e-12);

    let u = integrate(&h, period, &icfg)?;
    c.at_most("rk4_unitarity", u.unitarity_deviation(), 1e-8);
    let half = integrate(&h, period, &icfg.with_dt(icfg.dt / 2.0))?;
    c.at_most("rk4_step_halving", u.max_abs_diff(&half), 1e-9);

    // The shift property only holds well inside the Fourier window; check it
    // twelve harmonics away from the edges of a window at least 24 wide.
    let ladder_n = sft_n.max(24);
    let wide = build_sft(&h, SingleModeBasis::symmetric(ladder_n));
    let wide_eig = wide.diagonalize()?;
    let ladder = ladder_check(&wide, &wide_eig, (ladder_n as f64 - 12.0) * wb);
    c.at_most("sft_ladder_spacing", ladder.energy_deviation, 1e-6);
    c.at_most("sft_ladder_vectors", ladder.vector_deviation, 1e-4);

    let md = monodromy_floquet(&h, &icfg)?;
    let converged = build_sft(&h, SingleModeBasis::symmetric(sft_n.max(20))).diagonalize()?;
    let reps: Vec<f64> =
        converged.eigenvalues.iter().copied().filter(|e| *e > -wb / 2.0 && *e <= wb / 2.0).collect();
    let energies = md.quasi_energies();
    let agreement = if reps.len() == d {
        energies
            .iter()
            .map(|&e| distance_to_ladder(e, &reps, wb))
            .chain(reps.iter().map(|&r| distance_to_ladder(r, &energies, wb)))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    c.at_most("monodromy_vs_sft_quasi_energies", agreement, 1e-6);

    let mut recon: f64 = 0.0;
    for i in 0..50 {
        let t = 3.0 * period * i as f64 / 49.0;
        recon = recon.max(md.reconstruct(t)?.max_abs_diff(&integrate(&h, t, &icfg)?));
    }
    c.at_most("monodromy_reconstruction", recon, 1e-7);

    let ob = cfg.orbit_basis(&h)?;
    let periodic = build_mmft_periodic(&h, &ob);
    c.at_most("translation_commutator", translation_matrix(&ob, d).commutator_deviation(periodic.matrix()), 1e-14);
    let kb = k_block_decompose(&periodic)?;
    let k0 = kb.k_values.iter().position(|&k| k == 0.0).expect("k grid contains zero");
    let sft_orbit = build_sft(&h, *ob.n_set());
    c.at_most("k0_block_equals_sft", kb.blocks[k0].max_abs_diff(sft_orbit.matrix()), 1e-12);
    c.at_most("k_block_off_diagonal", kb.off_block_residual, 1e-12);
    let full = periodic.diagonalize()?.eigenvalues;
    c.at_most("k_block_eigenvalue_multiset", max_gap(&kb.eigenvalues()?, &full), 1e-10);
    let block_spectra = kb
        .blocks
        .par_iter()
        .zip(&kb.k_values)
        .map(|(b, &k)| {
            let (p1, p2) = block_phases(&h, k);
            let reference = build_sft(&h.with_phases(p1, p2), *ob.n_set()).diagonalize()?.eigenvalues;
            Ok(max_gap(&eig_hermitian(b)?.eigenvalues, &reference))
        })
        .collect::<Result<Vec<_>, LinalgError>>()?;
    c.at_most("k_block_vs_sft_at_shifted_phase", block_spectra.into_iter().fold(0.0, f64::max), 1e-8);

    let (rp, rq) = h.coupling_reach();
    let margin = (rp + rq).max(3) as u32;
    let report = demotion_intertwining_check(&h, margin + 3, margin)?;
    c.at_most("demotion_intertwining", report.hd_dh, 1e-12);
    c.record("demotion_promotion_identity", report.dp, 0.0, report.dp == 0.0);

    let conj_n = cfg.truncation.mmft_n_max.min(4);
    c.at_most("phase_shift_conjugation", phase_shift_conjugation_check(&h, 0.0, PI / 2.0, conj_n), 1e-12);

    // Transition populations |⟨β|U|α⟩|², β ≠ α. Survival probabilities converge
    // more slowly because truncation leaks norm out of the atomic block.
    let pops = |g: &ComplexMatrix| -> Vec<f64> {
        (0..d)
            .flat_map(|b| (0..d).filter(move |&a| a != b).map(move |a| (b, a)))
            .map(|(b, a)| g[(b, a)].norm_sqr())
            .collect()
    };
    let oracle = pops(&u);
    let sft_g = sft.propagator()?.matrix(period)?;
    c.at_most("sft_vs_tdse_transition_population_at_period", max_gap(&pops(&sft_g), &oracle), 1e-2);
    let mmft_g = build_mmft(&h, cfg.truncation.mmft_n_max).propagator()?.matrix(period)?;
    c.at_most("mmft_vs_tdse_transition_population_at_period", max_gap(&pops(&mmft_g), &oracle), 1e-2);

    let mut table = c.table;
    for (k, v) in provenance(cfg, "validate") {
        table.note(&k, v);
    }
    table.note("ladder_window", format!("n_max={ladder_n}, |E| <= {}", ladder_n as f64 - 12.0));
    Ok((table, c.failures))
}
