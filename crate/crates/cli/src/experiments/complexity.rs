use serde::Serialize;

use schmidt_core::cm::mu0;
use schmidt_core::pauli::MAX_DENSE_QUBITS;
use schmidt_core::seed::rng_from_seed;
use schmidt_core::state::SCHMIDT_CUTOFF;
use schmidt_core::{NoiseModel, Rotation, StateVector};

use super::certify::sampled_trial;
use super::{median, par_trials, trial_seed, RunOutput};
use crate::config::{Experiment, ExperimentConfig, RotationSpec, StateSpec};
use crate::error::{CliError, Result};
use crate::formats::{fmt_f64, Table};

pub const COMPLEXITY_HEADER: [&str; 7] = ["chi", "d", "K", "rotation", "trials", "successes", "mu0_or_bound"];

/// Resolved `complexity-scan` parameters. Defaults: `χ ∈ {1, 2, 4}`,
/// `m = 6`, `K ∈ {0, 16, 32, 64, 128, 256, 512}`, rotations none and Haar,
/// 50 trials per grid point.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityParams {
    pub chi: Vec<usize>,
    pub qubits: Vec<u32>,
    pub k_values: Vec<usize>,
    pub rotations: Vec<RotationSpec>,
    pub trials: usize,
    pub noise: NoiseModel,
    pub threshold: Option<f64>,
}

impl ComplexityParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        ComplexityParams {
            chi: cfg.scan.chi.clone().unwrap_or_else(|| vec![1, 2, 4]),
            qubits: cfg.scan.qubits.clone().unwrap_or_else(|| vec![6]),
            k_values: cfg.k_values.clone().unwrap_or_else(|| vec![0, 16, 32, 64, 128, 256, 512]),
            rotations: cfg.rotations.clone().unwrap_or_else(|| vec![RotationSpec::None, RotationSpec::Haar]),
            trials: cfg.seeds.unwrap_or(50),
            noise: cfg.noise,
            threshold: cfg.threshold,
        }
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub chi: usize,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rotation: String,
    pub trials: usize,
    pub successes: usize,
    /// `μ₀` of the computational basis when unrotated (exact for
    /// `m <= 6`); otherwise the median `μ_U` of the rotated Schmidt bases
    /// over the trials (`NaN` when `m > 6`).
    pub mu0_or_bound: f64,
}

/// Full-rank recovery frequency for `Σ_{i<χ}|i>|i>/√χ` at one grid point.
pub fn grid_point(
    chi: usize,
    m: u32,
    k: usize,
    rotation: Rotation,
    trials: usize,
    noise: NoiseModel,
    threshold: Option<f64>,
    master_seed: u64,
) -> Result<GridPoint> {
    let psi = StateVector::maximally_entangled(chi, m, m)?;
    let descriptor = StateSpec::MaximallyEntangled { chi, n_a: m, n_b: m }.descriptor();
    let key = format!("chi={chi};m={m};rotation={rotation};K={k}");
    let exact_mu = m <= MAX_DENSE_QUBITS;
    let outcomes = par_trials(trials, |t| {
        let seed = trial_seed(master_seed, Experiment::ComplexityScan, &key, t);
        let trial = sampled_trial(&psi, rotation, k, noise, threshold, seed, &descriptor)?;
        let success = trial.report.rank == chi * chi;
        let mu = match rotation {
            Rotation::None => f64::NAN,
            _ if !exact_mu => f64::NAN,
            _ => {
                let basis = trial.rotated.schmidt_decompose(SCHMIDT_CUTOFF).left;
                mu0(&basis, &mut rng_from_seed(seed))?.value
            }
        };
        Ok((success, mu))
    })?;
    let successes = outcomes.iter().filter(|o| o.0).count();
    let mu0_or_bound = match rotation {
        Rotation::None => {
            let basis = psi.schmidt_decompose(SCHMIDT_CUTOFF).left;
            let mu = mu0(&basis, &mut rng_from_seed(trial_seed(master_seed, Experiment::ComplexityScan, &key, usize::MAX)))?;
            mu.value
        }
        _ if !exact_mu || trials == 0 => f64::NAN,
        _ => median(&outcomes.iter().map(|o| o.1).collect::<Vec<_>>()),
    };
    Ok(GridPoint { chi, d: 1 << m, k, rotation: rotation.to_string(), trials, successes, mu0_or_bound })
}

pub fn run_complexity_scan(cfg: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params = ComplexityParams::from_config(cfg);
    let mut out = RunOutput::new(Experiment::ComplexityScan, master_seed, cfg);
    let mut table = Table::new(&COMPLEXITY_HEADER);
    let mut points = Vec::new();
    for &m in &params.qubits {
        for &chi in &params.chi {
            if chi == 0 || chi > 1usize << m.min(20) {
                return Err(CliError::Config(format!("chi = {chi} is not in 1..=2^{m}")));
            }
            for spec in &params.rotations {
                let rotation = spec.resolve(m);
                for &k in &params.k_values {
                    let p = grid_point(chi, m, k, rotation, params.trials, params.noise, params.threshold, master_seed)?;
                    table.rows.push(vec![
                        p.chi.to_string(),
                        p.d.to_string(),
                        p.k.to_string(),
                        p.rotation.clone(),
                        p.trials.to_string(),
                        p.successes.to_string(),
                        fmt_f64(p.mu0_or_bound),
                    ]);
                    points.push(p);
                }
            }
        }
    }
    out.tables.push(("complexity_scan".into(), table));
    out.metadata = serde_json::json!({ "parameters": params, "grid": points });
    Ok(out)
}
