//! Text file formats.
//!
//! * State file: header `n n_A n_B`, then one `bitstring re im` line per
//!   nonzero amplitude, qubit 0 leftmost. Blank lines and `#` comments are
//!   skipped. The reader renormalizes.
//! * Unitary dump: header `dim`, then `dim²` row-major `re im` lines.
//! * Projected CM: CSV whose first row and column hold operator labels, plus
//!   a JSON sidecar with seed, noise and state descriptor.
//! * Report file: JSON with the run metadata and every certification report;
//!   reports are re-validated on load.
//!
//! Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use schmidt_core::{CertificationReport, DMatrix, NoiseModel, PauliOp, ProjectedCm, StateVector, C64};

use crate::error::{CliError, Result};

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn parse_f64(token: Option<&str>, what: &str) -> std::result::Result<f64, String> {
    let t = token.ok_or_else(|| format!("missing {what}"))?;
    let v: f64 = t.parse().map_err(|_| format!("invalid {what} {t:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite {what}"))
    }
}

pub fn write_state<W: Write>(psi: &StateVector, mut w: W) -> std::io::Result<()> {
    let n = psi.num_qubits() as usize;
    writeln!(w, "{} {} {}", n, psi.n_a(), psi.n_b())?;
    for (index, a) in psi.amplitudes().iter().enumerate() {
        if a.re != 0.0 || a.im != 0.0 {
            writeln!(w, "{:0n$b} {} {}", index, fmt_f64(a.re), fmt_f64(a.im))?;
        }
    }
    w.flush()
}

pub fn read_state<R: BufRead>(r: R) -> std::result::Result<StateVector, String> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(|e| e.to_string()))
        .filter(|l| !matches!(l, Ok((_, t)) if t.trim().is_empty() || t.trim_start().starts_with('#')));
    let (_, header) = lines.next().ok_or("empty state file")??;
    let dims: Vec<u32> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("invalid header {header:?}")))
        .collect::<std::result::Result<_, _>>()?;
    let [n, n_a, n_b] = dims[..] else {
        return Err(format!("header must be `n n_A n_B`, got {header:?}"));
    };
    if n != n_a + n_b {
        return Err(format!("header says n = {n} but n_A + n_B = {}", n_a + n_b));
    }
    if n > schmidt_core::state::MAX_STATE_QUBITS {
        return Err(format!("{n} qubits exceed the statevector limit"));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1usize << n];
    let mut seen = vec![false; 1usize << n];
    for line in lines {
        let (no, text) = line?;
        let mut tok = text.split_whitespace();
        let bits = tok.next().unwrap_or_default();
        if bits.len() != n as usize || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(format!("line {no}: expected a {n}-bit index, got {bits:?}"));
        }
        let index = usize::from_str_radix(bits, 2).map_err(|e| format!("line {no}: {e}"))?;
        let re = parse_f64(tok.next(), "real part").map_err(|e| format!("line {no}: {e}"))?;
        let im = parse_f64(tok.next(), "imaginary part").map_err(|e| format!("line {no}: {e}"))?;
        if tok.next().is_some() {
            return Err(format!("line {no}: trailing tokens"));
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(format!("line {no}: index {bits} listed twice"));
        }
        amps[index] = C64::new(re, im);
    }
    StateVector::normalized(amps, n_a, n_b).map_err(|e| e.to_string())
}

pub fn write_state_file(psi: &StateVector, path: &Path) -> Result<()> {
    write_state(psi, create(path)?).map_err(|e| CliError::io(path, e))
}

pub fn read_state_file(path: &Path) -> Result<StateVector> {
    read_state(open(path)?).map_err(|m| CliError::format(path, m))
}

pub fn write_unitary<W: Write>(u: &DMatrix<C64>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", u.nrows())?;
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            let z = u[(r, c)];
            writeln!(w, "{} {}", fmt_f64(z.re), fmt_f64(z.im))?;
        }
    }
    w.flush()
}

pub fn read_unitary<R: Read>(mut r: R) -> std::result::Result<DMatrix<C64>, String> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| e.to_string())?;
    let mut tok = text.split_whitespace();
    let dim: usize = tok.next().and_then(|t| t.parse().ok()).ok_or("missing or invalid dimension header")?;
    let mut u = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let re = parse_f64(tok.next(), "real part")?;
            let im = parse_f64(tok.next(), "imaginary part")?;
            u[(r, c)] = C64::new(re, im);
        }
    }
    if tok.next().is_some() {
        return Err("trailing data after the matrix".into());
    }
    Ok(u)
}

pub fn write_unitary_file(u: &DMatrix<C64>, path: &Path) -> Result<()> {
    write_unitary(u, create(path)?).map_err(|e| CliError::io(path, e))
}

pub fn read_unitary_file(path: &Path) -> Result<DMatrix<C64>> {
    read_unitary(open(path)?).map_err(|m| CliError::format(path, m))
}

/// Metadata stored next to a CM CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmSidecar {
    pub seed: u64,
    pub noise: NoiseModel,
    pub state_descriptor: String,
    pub rotation_descriptor: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "distinct_K")]
    pub distinct_k: usize,
}

pub fn write_cm_csv<W: Write>(cm: &ProjectedCm, w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(cm.labels.iter().map(|p| p.to_string()));
    out.write_record(&header)?;
    for (r, label) in cm.labels.iter().enumerate() {
        let mut row = vec![label.to_string()];
        row.extend((0..cm.dim()).map(|c| fmt_f64(cm.entries[(r, c)])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cm_csv<R: Read>(r: R, noise: NoiseModel) -> std::result::Result<ProjectedCm, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = records.next().ok_or("empty CM file")?.map_err(|e| e.to_string())?;
    if header.get(0) != Some("") {
        return Err("the top-left header cell must be empty".into());
    }
    let labels: Vec<PauliOp> = header
        .iter()
        .skip(1)
        .map(|t| t.parse::<PauliOp>().map_err(|e| format!("bad column label {t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let n = labels.len();
    let mut entries = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (r, rec) in records.enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if r >= n || rec.len() != n + 1 {
            return Err(format!("row {} does not fit a {n}x{n} matrix", r + 1));
        }
        let label: PauliOp = rec[0].parse().map_err(|e| format!("bad row label {:?}: {e}", &rec[0]))?;
        if label != labels[r] {
            return Err(format!("row label {label} does not match column label {}", labels[r]));
        }
        for c in 0..n {
            entries[(r, c)] = parse_f64(rec.get(c + 1), "entry").map_err(|e| format!("row {label}: {e}"))?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(format!("expected {n} rows, found {rows}"));
    }
    ProjectedCm::from_parts(entries, labels, noise).map_err(|e| e.to_string())
}

/// Writes `<stem>.csv` and `<stem>.meta.json`.
pub fn write_cm_files(cm: &ProjectedCm, sidecar: &CmSidecar, dir: &Path, stem: &str) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_cm_csv(cm, create(&csv_path)?).map_err(|e| CliError::format(&csv_path, e.to_string()))?;
    write_json(sidecar, &dir.join(format!("{stem}.meta.json")))
}

pub fn read_cm_files(dir: &Path, stem: &str) -> Result<(ProjectedCm, CmSidecar)> {
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let sidecar: CmSidecar = read_json(&meta_path)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let cm = read_cm_csv(open(&csv_path)?, sidecar.noise).map_err(|m| CliError::format(&csv_path, m))?;
    if cm.k() != sidecar.distinct_k {
        return Err(CliError::format(&meta_path, "distinct_K does not match the CM size"));
    }
    Ok((cm, sidecar))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::format(path, e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::format(path, e.to_string()))
}

/// Everything a run writes to `<experiment>_reports.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub experiment: String,
    pub master_seed: u64,
    pub config: crate::config::ExperimentConfig,
    pub metadata: serde_json::Value,
    pub reports: Vec<CertificationReport>,
}

impl ReportFile {
    pub fn load(path: &Path) -> Result<Self> {
        let file: ReportFile = read_json(path)?;
        for (i, report) in file.reports.iter().enumerate() {
            report.validate().map_err(|e| CliError::format(path, format!("report {i}: {e}")))?;
        }
        Ok(file)
    }
}

/// Header and rows of a plain CSV table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = csv::Writer::from_writer(create(path)?);
        let fail = |e: csv::Error| CliError::format(path, e.to_string());
        out.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            out.write_record(row).map_err(fail)?;
        }
        out.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(open(path)?);
        let fail = |e: csv::Error| CliError::format(path, e.to_string());
        let header = rdr.headers().map_err(fail)?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(fail))
            .collect::<Result<_>>()?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}
