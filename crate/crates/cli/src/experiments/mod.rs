//! Experiment drivers.
//!
//! Each driver turns an [`ExperimentConfig`] and a master seed into a
//! [`RunOutput`] held in memory; [`RunOutput::write`] serializes it. Trial
//! `t` of series `s` in experiment `e` uses the seed
//! `derive_seed(master, &[tag_hash(e), tag_hash(s), t])`, and trials are
//! collected in order, so output does not depend on the thread count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use schmidt_core::seed::{derive_seed, tag_hash};
use schmidt_core::{CertificationReport, DMatrix, ProjectedCm, C64};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::formats::{fmt_f64, write_cm_files, write_json, write_unitary_file, CmSidecar, ReportFile, Table};

pub mod certify;
pub mod complexity;
pub mod fermion;
pub mod fig2;
pub mod mu;

pub use certify::{run_certify, CertifyParams};
pub use complexity::{run_complexity_scan, ComplexityParams};
pub use fermion::{run_fermion, FermionParams};
pub use fig2::{run_fig2, Fig2Params};
pub use mu::{run_mu_scan, MuParams};

/// Columns of the long-format spectrum CSV.
pub const SPECTRUM_HEADER: [&str; 10] =
    ["experiment", "series", "rotation", "noise", "K", "distinct_K", "trial", "seed", "index", "value"];

/// One normalized singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub series: String,
    pub rotation: String,
    pub noise: String,
    pub k: usize,
    pub distinct_k: usize,
    pub trial: usize,
    pub seed: u64,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub spectra: Vec<SpectrumRow>,
    pub reports: Vec<CertificationReport>,
    /// `(file stem, table)` pairs.
    pub tables: Vec<(String, Table)>,
    pub metadata: serde_json::Value,
    pub matrices: Vec<(String, ProjectedCm, CmSidecar)>,
    pub unitaries: Vec<(String, DMatrix<C64>)>,
}

impl RunOutput {
    fn new(experiment: Experiment, master_seed: u64, config: &ExperimentConfig) -> Self {
        RunOutput {
            experiment,
            master_seed,
            config: config.clone(),
            spectra: Vec::new(),
            reports: Vec::new(),
            tables: Vec::new(),
            metadata: serde_json::Value::Null,
            matrices: Vec::new(),
            unitaries: Vec::new(),
        }
    }

    pub fn spectra_table(&self) -> Table {
        let mut t = Table::new(&SPECTRUM_HEADER);
        for r in &self.spectra {
            t.rows.push(vec![
                self.experiment.name().to_string(),
                r.series.clone(),
                r.rotation.clone(),
                r.noise.clone(),
                r.k.to_string(),
                r.distinct_k.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.index.to_string(),
                fmt_f64(r.value),
            ]);
        }
        t
    }

    /// Writes every artifact under `dir` and returns the paths in write order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let name = self.experiment.name().replace('-', "_");
        let mut written = Vec::new();
        if !self.spectra.is_empty() {
            let path = dir.join(format!("{name}_spectra.csv"));
            self.spectra_table().write(&path)?;
            written.push(path);
        }
        for (stem, table) in &self.tables {
            let path = dir.join(format!("{stem}.csv"));
            table.write(&path)?;
            written.push(path);
        }
        let report_file = ReportFile {
            experiment: self.experiment.name().to_string(),
            master_seed: self.master_seed,
            config: self.config.clone(),
            metadata: self.metadata.clone(),
            reports: self.reports.clone(),
        };
        let path = dir.join(format!("{name}_reports.json"));
        write_json(&report_file, &path)?;
        written.push(path);
        let cm_dir = dir.join("cm");
        for (stem, cm, sidecar) in &self.matrices {
            write_cm_files(cm, sidecar, &cm_dir, stem)?;
            written.push(cm_dir.join(format!("{stem}.csv")));
        }
        let u_dir = dir.join("unitaries");
        for (stem, u) in &self.unitaries {
            let path = u_dir.join(format!("{stem}.txt"));
            write_unitary_file(u, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs `experiment` on a pool of `threads` workers (0 = rayon default).
/// `base_dir` resolves relative paths inside the config.
pub fn run(
    experiment: Experiment,
    config: &ExperimentConfig,
    master_seed: u64,
    base_dir: &Path,
    threads: usize,
) -> Result<RunOutput> {
    config.validate(experiment)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match experiment {
        Experiment::Fig2 => run_fig2(config, master_seed, base_dir),
        Experiment::Fermion => run_fermion(config, master_seed),
        Experiment::MuScan => run_mu_scan(config, master_seed),
        Experiment::ComplexityScan => run_complexity_scan(config, master_seed),
        Experiment::Certify => run_certify(config, master_seed, base_dir),
    })
}

pub fn trial_seed(master: u64, experiment: Experiment, series: &str, trial: usize) -> u64 {
    derive_seed(master, &[tag_hash(experiment.name()), tag_hash(series), trial as u64])
}

/// Seed of the experiment's input state (random Schmidt bases).
pub fn state_seed(master: u64, experiment: Experiment) -> u64 {
    derive_seed(master, &[tag_hash(experiment.name()), tag_hash("state")])
}

/// Runs `f(0..n)` in parallel, keeping results in trial order.
pub(crate) fn par_trials<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

pub(crate) fn spectrum_rows(series: &str, report: &CertificationReport, trial: usize, top: Option<usize>) -> Vec<SpectrumRow> {
    let take = top.unwrap_or(usize::MAX);
    report
        .normalized_svals
        .iter()
        .take(take)
        .enumerate()
        .map(|(index, &value)| SpectrumRow {
            series: series.to_string(),
            rotation: report.rotation_descriptor.clone(),
            noise: report.noise.to_string(),
            k: report.k,
            distinct_k: report.distinct_k,
            trial,
            seed: report.seed.unwrap_or_default(),
            index,
            value,
        })
        .collect()
}

/// Seeds used by one series, recorded in the run metadata.
#[derive(Debug, Clone, Serialize)]
pub(crate) struct SeriesSeeds {
    pub series: String,
    pub rotation: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub seeds: Vec<u64>,
}

pub(crate) fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
