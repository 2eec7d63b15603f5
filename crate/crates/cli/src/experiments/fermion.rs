use serde::Serialize;

use schmidt_core::state::{fermion_chain_ground_state, SCHMIDT_CUTOFF};
use schmidt_core::NoiseModel;

use super::certify::sampled_trial;
use super::{config_error, par_trials, spectrum_rows, trial_seed, RunOutput, SeriesSeeds};
use crate::config::{Experiment, ExperimentConfig, Filling, RotationSpec, StateSpec};
use crate::error::{CliError, Result};

/// Resolved `fermion` parameters. Defaults: `L = 12`, `t = 1`,
/// `U ∈ {0, 6}` with `K ∈ {256, 512}` and `{144, 288}`, half filling,
/// `n_A = L/2`, rotations none and Haar, 20 seeds, top 256, Schmidt cutoff
/// 1e-7.
#[derive(Debug, Clone, Serialize)]
pub struct FermionParams {
    pub sites: u32,
    pub hopping: f64,
    pub u_values: Vec<f64>,
    pub k_values: Vec<Vec<usize>>,
    pub n_a: u32,
    pub filling: Filling,
    pub schmidt_cutoff: f64,
    pub seeds: usize,
    pub rotations: Vec<RotationSpec>,
    pub noise: NoiseModel,
    pub threshold: Option<f64>,
    pub top: usize,
}

impl FermionParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let f = &cfg.fermion;
        let u_values = f.u_values.clone().unwrap_or_else(|| vec![0.0, 6.0]);
        let k_values = match (&f.k_values, &cfg.k_values) {
            (Some(per_u), _) => per_u.clone(),
            (None, Some(shared)) => vec![shared.clone(); u_values.len()],
            (None, None) if u_values == [0.0, 6.0] => vec![vec![256, 512], vec![144, 288]],
            (None, None) => vec![vec![256, 512]; u_values.len()],
        };
        if k_values.len() != u_values.len() {
            return Err(CliError::Config(format!(
                "fermion.k_values has {} lists for {} U values",
                k_values.len(),
                u_values.len()
            )));
        }
        let sites = f.sites.unwrap_or(12);
        let schmidt_cutoff = f.schmidt_cutoff.unwrap_or(SCHMIDT_CUTOFF);
        if !(schmidt_cutoff >= 0.0) {
            return Err(CliError::Config("schmidt_cutoff must be >= 0".into()));
        }
        Ok(FermionParams {
            sites,
            hopping: f.hopping.unwrap_or(1.0),
            u_values,
            k_values,
            n_a: f.n_a.unwrap_or(sites / 2),
            filling: f.filling.clone().unwrap_or_default(),
            schmidt_cutoff,
            seeds: cfg.seeds.unwrap_or(20),
            rotations: cfg.rotations.clone().unwrap_or_else(|| vec![RotationSpec::None, RotationSpec::Haar]),
            noise: cfg.noise,
            threshold: cfg.threshold,
            top: cfg.top.unwrap_or(256),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
struct GroundInfo {
    u: f64,
    energy: f64,
    degeneracy: usize,
    particle_number: usize,
    chi: usize,
    schmidt_coefficients: Vec<f64>,
}

pub fn run_fermion(cfg: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let exp = Experiment::Fermion;
    let params = FermionParams::from_config(cfg)?;
    let filling = params.filling.resolve(params.sites)?;
    let mut out = RunOutput::new(exp, master_seed, cfg);
    let mut seeds_meta = Vec::new();
    let mut grounds = Vec::new();
    for (&u, ks) in params.u_values.iter().zip(&params.k_values) {
        let ground = fermion_chain_ground_state(params.sites, params.hopping, u, params.n_a, filling)?;
        let psi = ground.state;
        let schmidt = psi.schmidt_decompose(params.schmidt_cutoff);
        grounds.push(GroundInfo {
            u,
            energy: ground.energy,
            degeneracy: ground.degeneracy,
            particle_number: ground.particle_number,
            chi: schmidt.rank(),
            schmidt_coefficients: schmidt.coefficients.clone(),
        });
        let descriptor = StateSpec::FermionChain {
            sites: params.sites,
            hopping: params.hopping,
            u,
            n_a: Some(params.n_a),
            filling: params.filling.clone(),
        }
        .descriptor();
        let series = format!("U={u}");
        for spec in &params.rotations {
            let rotation = spec.resolve(psi.n_a());
            for &k in ks {
                let key = format!("{series};rotation={rotation};K={k}");
                let trials = par_trials(params.seeds, |t| {
                    let seed = trial_seed(master_seed, exp, &key, t);
                    sampled_trial(&psi, rotation, k, params.noise, params.threshold, seed, &descriptor)
                        .map(|o| o.report)
                })?;
                let mut seeds = Vec::new();
                for (t, report) in trials.into_iter().enumerate() {
                    seeds.push(report.seed.unwrap_or_default());
                    out.spectra.extend(spectrum_rows(&series, &report, t, Some(params.top)));
                    out.reports.push(report);
                }
                seeds_meta.push(SeriesSeeds { series: series.clone(), rotation: rotation.to_string(), k, seeds });
            }
        }
    }
    let params_json = serde_json::to_value(&params).map_err(config_error)?;
    out.metadata = serde_json::json!({
        "parameters": params_json,
        "ground_states": grounds,
        "series_seeds": seeds_meta,
    });
    Ok(out)
}
