use serde::Serialize;

use schmidt_core::cm::mu0;
use schmidt_core::pauli::MAX_DENSE_QUBITS;
use schmidt_core::seed::rng_from_seed;
use schmidt_core::{haar_unitary, DMatrix, C64};

use super::{median, par_trials, trial_seed, RunOutput};
use crate::config::{BasisKind, Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::formats::{fmt_f64, Table};

pub const MU_DRAWS_HEADER: [&str; 6] = ["chi", "d", "basis", "draw", "seed", "mu"];
pub const MU_SUMMARY_HEADER: [&str; 8] = ["chi", "d", "basis", "draws", "min", "median", "mean", "max"];

/// Resolved `mu-scan` parameters. Defaults: `χ ∈ {1, 2, 4}`, `m = 6`, both
/// bases, 20 draws.
#[derive(Debug, Clone, Serialize)]
pub struct MuParams {
    pub chi: Vec<usize>,
    pub qubits: Vec<u32>,
    pub bases: Vec<BasisKind>,
    pub draws: usize,
}

impl MuParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        MuParams {
            chi: cfg.mu.chi.clone().unwrap_or_else(|| vec![1, 2, 4]),
            qubits: cfg.mu.qubits.clone().unwrap_or_else(|| vec![6]),
            bases: cfg.mu.bases.clone().unwrap_or_else(|| vec![BasisKind::Computational, BasisKind::Haar]),
            draws: cfg.seeds.unwrap_or(20),
        }
    }
}

/// Exact `μ` values of `draws` bases of the given kind. The computational
/// basis `{|0>, ..., |χ-1>}` is deterministic and yields a single draw.
pub fn mu_draws(chi: usize, m: u32, basis: BasisKind, draws: usize, master_seed: u64) -> Result<Vec<(u64, f64)>> {
    if m > MAX_DENSE_QUBITS {
        return Err(CliError::Resource(format!(
            "exact mu needs full Pauli enumeration; m = {m} exceeds {MAX_DENSE_QUBITS}"
        )));
    }
    let d = 1usize << m;
    if chi == 0 || chi > d {
        return Err(CliError::Config(format!("chi = {chi} is not in 1..={d}")));
    }
    let key = format!("chi={chi};m={m};basis={}", basis.name());
    let n = if basis == BasisKind::Computational { 1 } else { draws };
    par_trials(n, |t| {
        let seed = trial_seed(master_seed, Experiment::MuScan, &key, t);
        let mut rng = rng_from_seed(seed);
        let b = match basis {
            BasisKind::Computational => DMatrix::<C64>::identity(d, chi),
            BasisKind::Haar => haar_unitary(d, &mut rng)?.matrix.columns(0, chi).into_owned(),
        };
        Ok((seed, mu0(&b, &mut rng)?.value))
    })
}

pub fn run_mu_scan(cfg: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params = MuParams::from_config(cfg);
    let mut out = RunOutput::new(Experiment::MuScan, master_seed, cfg);
    let mut draws_table = Table::new(&MU_DRAWS_HEADER);
    let mut summary = Table::new(&MU_SUMMARY_HEADER);
    for &m in &params.qubits {
        for &chi in &params.chi {
            for &basis in &params.bases {
                let values = mu_draws(chi, m, basis, params.draws, master_seed)?;
                let d = (1usize << m).to_string();
                for (i, (seed, mu)) in values.iter().enumerate() {
                    draws_table.rows.push(vec![
                        chi.to_string(),
                        d.clone(),
                        basis.name().into(),
                        i.to_string(),
                        seed.to_string(),
                        fmt_f64(*mu),
                    ]);
                }
                let mus: Vec<f64> = values.iter().map(|v| v.1).collect();
                let mean = mus.iter().sum::<f64>() / mus.len() as f64;
                summary.rows.push(vec![
                    chi.to_string(),
                    d,
                    basis.name().into(),
                    mus.len().to_string(),
                    fmt_f64(mus.iter().copied().fold(f64::INFINITY, f64::min)),
                    fmt_f64(median(&mus)),
                    fmt_f64(mean),
                    fmt_f64(mus.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                ]);
            }
        }
    }
    out.tables.push(("mu_scan_draws".into(), draws_table));
    out.tables.push(("mu_scan_summary".into(), summary));
    out.metadata = serde_json::json!({ "parameters": params });
    Ok(out)
}
