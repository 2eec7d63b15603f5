use std::path::Path;

use serde::Serialize;

use schmidt_core::certify::sample_rotation;
use schmidt_core::seed::rng_from_seed;
use schmidt_core::{
    build_projected_cm, certify_cm, sample_pauli_set, CertificationReport, DMatrix, NoiseModel, PauliSet,
    ProjectedCm, Rotation, StateVector, C64,
};

use super::{par_trials, spectrum_rows, trial_seed, RunOutput, SeriesSeeds};
use crate::config::{Experiment, ExperimentConfig, RotationSpec, StateSpec};
use crate::error::{CliError, Result};
use crate::formats::CmSidecar;

/// Everything produced by one seeded certification trial.
pub struct TrialOutcome {
    pub report: CertificationReport,
    pub cm: ProjectedCm,
    pub rotated: StateVector,
    pub unitaries: Option<(DMatrix<C64>, DMatrix<C64>)>,
}

/// Same draws as `schmidt_core::certify` from a fresh generator seeded with
/// `seed`: rotation, Pauli set, then noise.
pub fn sampled_trial(
    psi: &StateVector,
    rotation: Rotation,
    k: usize,
    noise: NoiseModel,
    threshold: Option<f64>,
    seed: u64,
    state_descriptor: &str,
) -> Result<TrialOutcome> {
    let mut rng = rng_from_seed(seed);
    let pair = sample_rotation(psi.n_a(), psi.n_b(), rotation, &mut rng)?;
    let rotated = match &pair {
        None => psi.clone(),
        Some((u_a, u_b)) => psi.apply_local_unitary(&u_a.matrix, &u_b.matrix)?,
    };
    let set = if k == 0 { PauliSet::empty(psi.n_a())? } else { sample_pauli_set(psi.n_a(), k, &mut rng)? };
    let cm = build_projected_cm(&rotated, &set, noise, &mut rng)?;
    let mut report = certify_cm(&cm, set.draws(), threshold)?;
    report.seed = Some(seed);
    report.state_descriptor = state_descriptor.to_string();
    report.rotation_descriptor = rotation.to_string();
    Ok(TrialOutcome { report, cm, rotated, unitaries: pair.map(|(a, b)| (a.matrix, b.matrix)) })
}

/// Resolved parameters of the `certify` experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CertifyParams {
    pub state: StateSpec,
    pub seeds: usize,
    pub k_values: Vec<usize>,
    pub rotations: Vec<RotationSpec>,
    pub noise: NoiseModel,
    pub threshold: Option<f64>,
    pub top: Option<usize>,
}

impl CertifyParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let state = cfg
            .state
            .clone()
            .ok_or_else(|| CliError::Config("certify needs a [state] section".into()))?;
        Ok(CertifyParams {
            state,
            seeds: cfg.seeds.unwrap_or(20),
            k_values: cfg.k_values.clone().unwrap_or_else(|| vec![64]),
            rotations: cfg.rotations.clone().unwrap_or_else(|| vec![RotationSpec::Haar]),
            noise: cfg.noise,
            threshold: cfg.threshold,
            top: cfg.top,
        })
    }
}

fn file_stem(text: &str) -> String {
    text.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

pub fn run_certify(cfg: &ExperimentConfig, master_seed: u64, base_dir: &Path) -> Result<RunOutput> {
    let exp = Experiment::Certify;
    let params = CertifyParams::from_config(cfg)?;
    let psi = params.state.build(super::state_seed(master_seed, exp), base_dir)?;
    let descriptor = params.state.descriptor();
    let mut out = RunOutput::new(exp, master_seed, cfg);
    let mut seeds_meta = Vec::new();
    for spec in &params.rotations {
        let rotation = spec.resolve(psi.n_a());
        for &k in &params.k_values {
            let key = format!("rotation={rotation};K={k}");
            let trials = par_trials(params.seeds, |t| {
                let seed = trial_seed(master_seed, exp, &key, t);
                sampled_trial(&psi, rotation, k, params.noise, params.threshold, seed, &descriptor)
            })?;
            let mut seeds = Vec::new();
            for (t, trial) in trials.into_iter().enumerate() {
                let report = trial.report;
                let seed = report.seed.unwrap_or_default();
                seeds.push(seed);
                out.spectra.extend(spectrum_rows("sampled", &report, t, params.top));
                let stem = file_stem(&format!("{rotation}_K{k}_t{t}"));
                if cfg.save_cm {
                    let sidecar = CmSidecar {
                        seed,
                        noise: params.noise,
                        state_descriptor: descriptor.clone(),
                        rotation_descriptor: rotation.to_string(),
                        k: report.k,
                        distinct_k: report.distinct_k,
                    };
                    out.matrices.push((format!("cm_{stem}"), trial.cm, sidecar));
                }
                if let (true, Some((u_a, u_b))) = (cfg.save_unitaries, trial.unitaries) {
                    out.unitaries.push((format!("u_a_{stem}"), u_a));
                    out.unitaries.push((format!("u_b_{stem}"), u_b));
                }
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
