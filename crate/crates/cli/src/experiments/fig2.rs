use std::path::Path;

use serde::Serialize;

use schmidt_core::pauli::enumerate_all;
use schmidt_core::{build_full_cm, certify_cm, NoiseModel, ProjectedCm};

use super::certify::sampled_trial;
use super::{par_trials, spectrum_rows, state_seed, trial_seed, RunOutput, SeriesSeeds};
use crate::config::{Experiment, ExperimentConfig, RotationSpec, StateSpec};
use crate::error::Result;

/// Resolved `fig2` parameters. Defaults: maximally entangled `χ = 4` on
/// `6 | 6` qubits, `K ∈ {32, 64}`, rotations none and Haar, 20 seeds, top 16,
/// full-CM series on.
#[derive(Debug, Clone, Serialize)]
pub struct Fig2Params {
    pub state: StateSpec,
    pub seeds: usize,
    pub k_values: Vec<usize>,
    pub rotations: Vec<RotationSpec>,
    pub noise: NoiseModel,
    pub threshold: Option<f64>,
    pub top: usize,
    pub full_cm: bool,
}

impl Fig2Params {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Fig2Params {
            state: cfg.state.clone().unwrap_or(StateSpec::MaximallyEntangled { chi: 4, n_a: 6, n_b: 6 }),
            seeds: cfg.seeds.unwrap_or(20),
            k_values: cfg.k_values.clone().unwrap_or_else(|| vec![32, 64]),
            rotations: cfg.rotations.clone().unwrap_or_else(|| vec![RotationSpec::None, RotationSpec::Haar]),
            noise: cfg.noise,
            threshold: cfg.threshold,
            top: cfg.top.unwrap_or(16),
            full_cm: cfg.full_cm.unwrap_or(true),
        }
    }
}

pub fn run_fig2(cfg: &ExperimentConfig, master_seed: u64, base_dir: &Path) -> Result<RunOutput> {
    let exp = Experiment::Fig2;
    let params = Fig2Params::from_config(cfg);
    let psi = params.state.build(state_seed(master_seed, exp), base_dir)?;
    let descriptor = params.state.descriptor();
    let mut out = RunOutput::new(exp, master_seed, cfg);
    let mut seeds_meta = Vec::new();

    if params.full_cm {
        // Deterministic: one exact spectrum of the unrotated state.
        let labels = enumerate_all(psi.n_a(), true)?;
        let draws = labels.len() - 1;
        let cm = ProjectedCm::from_parts(build_full_cm(&psi)?, labels, NoiseModel::Exact)?;
        let mut report = certify_cm(&cm, draws, params.threshold)?;
        report.seed = Some(master_seed);
        report.state_descriptor = descriptor.clone();
        out.spectra.extend(spectrum_rows("full", &report, 0, Some(params.top)));
        out.reports.push(report);
    }

    for spec in &params.rotations {
        let rotation = spec.resolve(psi.n_a());
        for &k in &params.k_values {
            let key = format!("rotation={rotation};K={k}");
            let trials = par_trials(params.seeds, |t| {
                let seed = trial_seed(master_seed, exp, &key, t);
                sampled_trial(&psi, rotation, k, params.noise, params.threshold, seed, &descriptor).map(|o| o.report)
            })?;
            let mut seeds = Vec::new();
            for (t, report) in trials.into_iter().enumerate() {
                seeds.push(report.seed.unwrap_or_default());
                out.spectra.extend(spectrum_rows("sampled", &report, t, Some(params.top)));
                out.reports.push(report);
            }
            seeds_meta.push(SeriesSeeds { series: "sampled".into(), rotation: rotation.to_string(), k, seeds });
        }
    }
    out.metadata = serde_json::json!({
        "parameters": params,
        "state_descriptor": descriptor,
        "series_seeds": seeds_meta,
    });
    Ok(out)
}
