//! Experiment configuration: JSON schema, command-line overrides, and
//! conversion into a validated model.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use floquet::basis::{ModePair, OrbitBasis, SingleModeBasis};
use floquet::linalg::ComplexMatrix;
use floquet::model::{make_omega_2omega_example, FourierHamiltonian};
use floquet::tdse::IntegratorConfig;
use floquet::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    #[serde(rename = "omega-2omega")]
    Omega2Omega {
        #[serde(default)]
        phi_2omega: f64,
    },
    Custom {
        #[serde(rename = "dim_A")]
        dim_a: usize,
        #[serde(rename = "N1")]
        n1: i64,
        #[serde(rename = "N2")]
        n2: i64,
        #[serde(rename = "omega_B")]
        omega_b: f64,
        #[serde(default)]
        phi1: f64,
        #[serde(default)]
        phi2: f64,
        coeffs: Vec<CoefficientSpec>,
    },
}

/// One Fourier coefficient `H̃(p,q)`; `matrix` lists `dim_A²` `[re, im]`
/// pairs in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub p: i64,
    pub q: i64,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSpec {
    pub n_min: i64,
    pub n_max: i64,
    #[serde(rename = "N_L")]
    pub n_l: usize,
}

impl Default for OrbitSpec {
    fn default() -> Self {
        Self { n_min: -8, n_max: 8, n_l: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSpec {
    pub sft_n_max: u32,
    pub mmft_n_max: u32,
    pub orbit: OrbitSpec,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { sft_n_max: 10, mmft_n_max: 9, orbit: OrbitSpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: std::f64::consts::TAU, points: 200 }
    }
}

impl TimeGridSpec {
    pub fn times(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.t_start],
            n => {
                let span = self.t_end - self.t_start;
                (0..n).map(|i| self.t_start + span * i as f64 / (n - 1) as f64).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Defaults to one 4096th of the drive period.
    pub dt: Option<f64>,
    pub renormalize_every: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Tdse,
    Sft,
    Mmft,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Tdse => "tdse",
            Engine::Sft => "sft",
            Engine::Mmft => "mmft",
        }
    }
}

fn default_engines() -> Vec<Engine> {
    vec![Engine::Tdse, Engine::Sft, Engine::Mmft]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub time_grid: TimeGridSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default = "default_engines")]
    pub engines: Vec<Engine>,
}

/// Values given on the command line take precedence over the file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Phase of the second drive (`phi_2omega` or `phi2`).
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<f64>,
    #[arg(long)]
    pub sft_n_max: Option<u32>,
    #[arg(long)]
    pub mmft_n_max: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Engine to run; repeat to select several.
    #[arg(long = "engine", value_enum)]
    pub engines: Vec<Engine>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(phi) = o.phi2 {
            match &mut self.system {
                SystemSpec::Omega2Omega { phi_2omega } => *phi_2omega = phi,
                SystemSpec::Custom { phi2, .. } => *phi2 = phi,
            }
        }
        if let Some(n) = o.sft_n_max {
            self.truncation.sft_n_max = n;
        }
        if let Some(n) = o.mmft_n_max {
            self.truncation.mmft_n_max = n;
        }
        if let Some(t) = o.t_end {
            self.time_grid.t_end = t;
        }
        if let Some(p) = o.points {
            self.time_grid.points = p;
        }
        if !o.engines.is_empty() {
            self.engines = o.engines.clone();
        }
        if let Some(out) = &o.out {
            self.outputs.path = Some(out.clone());
        }
        if let Some(f) = o.format {
            self.outputs.format = f;
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring where output goes.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.outputs.path = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn hamiltonian(&self) -> Result<FourierHamiltonian, CliError> {
        match &self.system {
            SystemSpec::Omega2Omega { phi_2omega } => Ok(make_omega_2omega_example(*phi_2omega)),
            SystemSpec::Custom { dim_a, n1, n2, omega_b, phi1, phi2, coeffs } => {
                let mp = ModePair::new(*n1, *n2, *omega_b).map_err(|e| CliError::Config(e.to_string()))?;
                let mut map = BTreeMap::new();
                for c in coeffs {
                    if c.matrix.len() != dim_a * dim_a {
                        return Err(CliError::Config(format!(
                            "coefficient ({}, {}) has {} entries, expected {}",
                            c.p,
                            c.q,
                            c.matrix.len(),
                            dim_a * dim_a
                        )));
                    }
                    let data = c.matrix.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                    let m = ComplexMatrix::from_vec(*dim_a, *dim_a, data)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    if map.insert((c.p, c.q), m).is_some() {
                        return Err(CliError::Config(format!("coefficient ({}, {}) listed twice", c.p, c.q)));
                    }
                }
                FourierHamiltonian::new(*dim_a, mp, map, *phi1, *phi2).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    pub fn integrator(&self, h: &FourierHamiltonian) -> Result<IntegratorConfig, CliError> {
        let mut cfg = IntegratorConfig::for_hamiltonian(h);
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(CliError::Config(format!("integrator dt must be positive, got {dt}")));
            }
            cfg.dt = dt;
        }
        cfg.renormalize_every = self.integrator.renormalize_every;
        Ok(cfg)
    }

    pub fn orbit_basis(&self, h: &FourierHamiltonian) -> Result<OrbitBasis, CliError> {
        let o = &self.truncation.orbit;
        if o.n_l == 0 {
            return Err(CliError::Config("orbit N_L must be at least 1".into()));
        }
        let n_set = SingleModeBasis::new(o.n_min, o.n_max).map_err(|e| CliError::Config(e.to_string()))?;
        OrbitBasis::centered(*h.mode_pair(), n_set, o.n_l).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate_grid(&self) -> Result<(), CliError> {
        let g = &self.time_grid;
        if !(g.t_start >= 0.0) || !(g.t_end >= g.t_start) || !g.t_end.is_finite() {
            return Err(CliError::Config(format!(
                "time grid needs 0 <= t_start <= t_end, got {}..{}",
                g.t_start, g.t_end
            )));
        }
        Ok(())
    }
}
