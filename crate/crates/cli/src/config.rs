//! TOML experiment configuration.
//!
//! Every field is optional; unset fields take the per-experiment defaults
//! listed on the `*Params` structs. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use schmidt_core::{NoiseModel, Rotation, StateVector};

use crate::error::{CliError, Result};
use crate::formats::read_state_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig2,
    Fermion,
    MuScan,
    ComplexityScan,
    Certify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fermion => "fermion",
            Experiment::MuScan => "mu-scan",
            Experiment::ComplexityScan => "complexity-scan",
            Experiment::Certify => "certify",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation as written in configs: `none`, `haar`, `brickwork` (depth = local
/// qubit count) or `brickwork(<depth>)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RotationSpec {
    None,
    Haar,
    Brickwork(Option<usize>),
}

impl RotationSpec {
    pub fn resolve(self, local_qubits: u32) -> Rotation {
        match self {
            RotationSpec::None => Rotation::None,
            RotationSpec::Haar => Rotation::Haar,
            RotationSpec::Brickwork(depth) => Rotation::Brickwork { depth: depth.unwrap_or(local_qubits as usize) },
        }
    }
}

impl FromStr for RotationSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        match t {
            "none" => return Ok(RotationSpec::None),
            "haar" => return Ok(RotationSpec::Haar),
            "brickwork" => return Ok(RotationSpec::Brickwork(None)),
            _ => {}
        }
        t.strip_prefix("brickwork(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|d| d.trim().parse::<usize>().ok())
            .filter(|&d| d >= 1)
            .map(|d| RotationSpec::Brickwork(Some(d)))
            .ok_or_else(|| format!("unknown rotation {s:?}; expected none, haar, brickwork or brickwork(<depth>=1>)"))
    }
}

impl TryFrom<String> for RotationSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<RotationSpec> for String {
    fn from(r: RotationSpec) -> String {
        match r {
            RotationSpec::None => "none".into(),
            RotationSpec::Haar => "haar".into(),
            RotationSpec::Brickwork(None) => "brickwork".into(),
            RotationSpec::Brickwork(Some(d)) => format!("brickwork({d})"),
        }
    }
}

/// Particle-number sector of the fermion chain: a count, `"half"` or `"any"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Filling {
    Count(usize),
    Keyword(String),
}

impl Filling {
    pub fn resolve(&self, sites: u32) -> Result<Option<usize>> {
        match self {
            Filling::Count(n) => Ok(Some(*n)),
            Filling::Keyword(k) if k == "half" => Ok(Some(sites as usize / 2)),
            Filling::Keyword(k) if k == "any" => Ok(None),
            Filling::Keyword(k) => Err(CliError::Config(format!("filling must be a count, \"half\" or \"any\", got {k:?}"))),
        }
    }
}

impl Default for Filling {
    fn default() -> Self {
        Filling::Keyword("half".into())
    }
}

fn default_hopping() -> f64 {
    1.0
}

/// Input state of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    /// `Σ_{i<χ} |i>|i>/√χ`.
    MaximallyEntangled { chi: usize, n_a: u32, n_b: u32 },
    /// Given spectrum with Haar-random Schmidt bases drawn from the state seed.
    RandomSchmidt { spectrum: Vec<f64>, n_a: u32, n_b: u32 },
    /// `Σ_k √λ_k |a_k>|a_k>` for the listed computational basis states.
    Computational { spectrum: Vec<f64>, support: Vec<u64>, m: u32 },
    /// Ground state of the spinless chain.
    FermionChain {
        sites: u32,
        #[serde(default = "default_hopping")]
        hopping: f64,
        u: f64,
        n_a: Option<u32>,
        #[serde(default)]
        filling: Filling,
    },
    /// State file (see [`crate::formats`]); relative paths resolve against
    /// the config file's directory.
    File { path: PathBuf },
}

impl StateSpec {
    pub fn descriptor(&self) -> String {
        match self {
            StateSpec::MaximallyEntangled { chi, n_a, n_b } => format!("maximally-entangled(chi={chi},n_a={n_a},n_b={n_b})"),
            StateSpec::RandomSchmidt { spectrum, n_a, n_b } => {
                format!("random-schmidt(chi={},n_a={n_a},n_b={n_b})", spectrum.len())
            }
            StateSpec::Computational { spectrum, m, .. } => format!("computational(chi={},m={m})", spectrum.len()),
            StateSpec::FermionChain { sites, hopping, u, n_a, filling } => {
                let n_a = n_a.unwrap_or(sites / 2);
                let filling = match filling {
                    Filling::Count(n) => n.to_string(),
                    Filling::Keyword(k) => k.clone(),
                };
                format!("fermion-chain(L={sites},t={hopping},U={u},n_a={n_a},filling={filling})")
            }
            StateSpec::File { path } => format!("file({})", path.display()),
        }
    }

    /// Builds the state; `state_seed` feeds the random Schmidt bases.
    pub fn build(&self, state_seed: u64, base_dir: &Path) -> Result<StateVector> {
        Ok(match self {
            StateSpec::MaximallyEntangled { chi, n_a, n_b } => StateVector::maximally_entangled(*chi, *n_a, *n_b)?,
            StateSpec::RandomSchmidt { spectrum, n_a, n_b } => {
                let mut rng = schmidt_core::seed::rng_from_seed(state_seed);
                StateVector::random_schmidt_state(spectrum, *n_a, *n_b, &mut rng)?
            }
            StateSpec::Computational { spectrum, support, m } => {
                if spectrum.len() != support.len() {
                    return Err(CliError::Config("computational state needs one support entry per coefficient".into()));
                }
                let d = 1usize.checked_shl(*m).filter(|_| *m <= 13).ok_or_else(|| {
                    CliError::Resource(format!("computational state on {m} qubits per side is too large"))
                })?;
                if support.iter().any(|&a| a as usize >= d) {
                    return Err(CliError::Config(format!("support entries must be below {d}")));
                }
                let basis = schmidt_core::DMatrix::from_fn(d, support.len(), |r, c| {
                    schmidt_core::C64::new(if r as u64 == support[c] { 1.0 } else { 0.0 }, 0.0)
                });
                let mut distinct = support.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() != support.len() {
                    return Err(CliError::Config("support entries must be distinct".into()));
                }
                StateVector::with_schmidt_form(spectrum, &basis, &basis, *m, *m)?
            }
            StateSpec::FermionChain { sites, hopping, u, n_a, filling } => {
                let n_a = n_a.unwrap_or(sites / 2);
                let filling = filling.resolve(*sites)?;
                schmidt_core::state::fermion_chain_ground_state(*sites, *hopping, *u, n_a, filling)?.state
            }
            StateSpec::File { path } => read_state_file(&base_dir.join(path))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FermionConfig {
    pub sites: Option<u32>,
    pub hopping: Option<f64>,
    pub u_values: Option<Vec<f64>>,
    /// One list of K values per entry of `u_values`.
    pub k_values: Option<Vec<Vec<usize>>>,
    pub n_a: Option<u32>,
    pub filling: Option<Filling>,
    pub schmidt_cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub chi: Option<Vec<usize>>,
    /// Local qubit counts `m`; `d = 2^m`.
    pub qubits: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Computational,
    Haar,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Computational => "computational",
            BasisKind::Haar => "haar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuConfig {
    pub chi: Option<Vec<usize>>,
    pub qubits: Option<Vec<u32>>,
    pub bases: Option<Vec<BasisKind>>,
}

/// Contents of a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub experiment: Option<Experiment>,
    /// Trials (seeds) per series.
    pub seeds: Option<usize>,
    pub k_values: Option<Vec<usize>>,
    pub rotations: Option<Vec<RotationSpec>>,
    pub noise: NoiseModel,
    /// Rank threshold in normalized units; default is noise-aware.
    pub threshold: Option<f64>,
    /// Number of leading singular values written per spectrum.
    pub top: Option<usize>,
    pub state: Option<StateSpec>,
    /// Output directory, used when `--out` is absent.
    pub out: Option<PathBuf>,
    /// Write every projected CM as CSV plus sidecar (certify only).
    pub save_cm: bool,
    /// Dump the sampled local unitaries (certify only).
    pub save_unitaries: bool,
    /// Include the full-CM series (fig2 only).
    pub full_cm: Option<bool>,
    pub fermion: FermionConfig,
    pub scan: ScanConfig,
    pub mu: MuConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Shared checks; experiment-specific ones happen when parameters are
    /// resolved.
    pub fn validate(&self, experiment: Experiment) -> Result<()> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(CliError::Config(format!("config is for {e}, but {experiment} was requested")));
            }
        }
        self.noise.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(t) = self.threshold {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::Config(format!("threshold must be finite and >= 0, got {t}")));
            }
        }
        if self.seeds == Some(0) {
            return Err(CliError::Config("seeds must be at least 1".into()));
        }
        if matches!(&self.k_values, Some(k) if k.is_empty()) || matches!(&self.rotations, Some(r) if r.is_empty()) {
            return Err(CliError::Config("k_values and rotations must not be empty".into()));
        }
        Ok(())
    }
}
