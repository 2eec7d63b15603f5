//! Numerical rank, Schmidt-number certification, and the combinatorial and
//! Monte-Carlo rank oracles.
//!
//! Singular values are always reported divided by the matrix dimension so
//! spectra of different sizes can be compared. A numerical rank `r` certifies
//! a Schmidt number of at least `ceil(√r)`, because a principal submatrix of
//! the full CM never has rank above `χ²`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::cm::{build_projected_cm, sample_pauli_set, NoiseModel, PauliSet, ProjectedCm};
use crate::error::{invalid, unsupported, Result};
use crate::linalg::{integer_rank, singular_values_desc};
use crate::random_unitary::{brickwork_circuit, haar_unitary, LocalUnitary};
use crate::state::StateVector;
use crate::C64;

/// Rank floor in normalized units used when the noise floor is lower.
pub const RANK_FLOOR: f64 = 1e-7;
/// Default safety factor `c` of [`noise_threshold`].
pub const NOISE_SAFETY_FACTOR: f64 = 3.0;

/// Singular values of `m` divided by its dimension, in descending order.
///
/// Rows and columns that are exactly zero are dropped before the
/// decomposition; they only contribute zero singular values, which are
/// appended afterwards.
pub fn singular_spectrum(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("matrix has non-finite entries"));
    }
    let (nr, nc) = m.shape();
    let full = nr.min(nc);
    let dim = nr.max(nc).max(1) as f64;
    let rows: Vec<usize> = (0..nr).filter(|&r| m.row(r).iter().any(|&v| v != 0.0)).collect();
    let cols: Vec<usize> = (0..nc).filter(|&c| m.column(c).iter().any(|&v| v != 0.0)).collect();
    let mut sv = if rows.is_empty() || cols.is_empty() {
        Vec::new()
    } else if rows.len() == nr && cols.len() == nc {
        singular_values_desc(m.clone())
    } else {
        singular_values_desc(m.select_rows(rows.iter()).select_columns(cols.iter()))
    };
    sv.iter_mut().for_each(|s| *s /= dim);
    sv.resize(full, 0.0);
    Ok(sv)
}

/// Count of values strictly above `threshold`.
pub fn numerical_rank(svals: &[f64], threshold: f64) -> usize {
    svals.iter().filter(|&&s| s > threshold).count()
}

/// `c · √(K+1) · ε / (K+1)`: the bound on noise singular values of a
/// `(K+1)`-dimensional CM, in normalized units.
pub fn noise_threshold(k: usize, eps: f64, c: f64) -> f64 {
    let n = (k + 1) as f64;
    c * n.sqrt() * eps / n
}

/// `max(1e-7, noise_threshold(K, ε̂, 3))`.
pub fn default_threshold(k: usize, noise: &NoiseModel) -> f64 {
    noise_threshold(k, noise.scale(), NOISE_SAFETY_FACTOR).max(RANK_FLOOR)
}

/// Smallest `χ` with `χ² >= rank`.
pub fn certified_lower_bound(rank: usize) -> usize {
    let mut chi = 0usize;
    while chi * chi < rank {
        chi += 1;
    }
    chi
}

/// Local rotation applied before measuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind"))]
pub enum Rotation {
    #[default]
    None,
    Haar,
    Brickwork { depth: usize },
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rotation::None => f.write_str("none"),
            Rotation::Haar => f.write_str("haar"),
            Rotation::Brickwork { depth } => write!(f, "brickwork(depth={depth})"),
        }
    }
}

/// Draws the local pair `(U_A, U_B)` for an `n_a | n_b` split; `None` for
/// [`Rotation::None`].
pub fn sample_rotation<R: Rng + ?Sized>(
    n_a: u32,
    n_b: u32,
    rotation: Rotation,
    rng: &mut R,
) -> Result<Option<(LocalUnitary, LocalUnitary)>> {
    Ok(match rotation {
        Rotation::None => None,
        Rotation::Haar => Some((haar_unitary(1 << n_a, rng)?, haar_unitary(1 << n_b, rng)?)),
        Rotation::Brickwork { depth } => Some((brickwork_circuit(n_a, depth, rng)?, brickwork_circuit(n_b, depth, rng)?)),
    })
}

/// Applies `U_A ⊗ U_B` drawn from the rotation ensemble; one pair serves the
/// whole CM.
pub fn rotate<R: Rng + ?Sized>(psi: &StateVector, rotation: Rotation, rng: &mut R) -> Result<StateVector> {
    match sample_rotation(psi.n_a(), psi.n_b(), rotation, rng)? {
        None => Ok(psi.clone()),
        Some((u_a, u_b)) => psi.apply_local_unitary(&u_a.matrix, &u_b.matrix),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig {
    /// Number of i.i.d. Pauli draws; zero keeps only the identity row.
    pub k: usize,
    pub rotation: Rotation,
    pub noise: NoiseModel,
    /// Overrides [`default_threshold`] when set.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificationReport {
    pub seed: Option<u64>,
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub k: usize,
    #[cfg_attr(feature = "serde", serde(rename = "distinct_K"))]
    pub distinct_k: usize,
    pub noise: NoiseModel,
    pub threshold: f64,
    pub normalized_svals: Vec<f64>,
    pub rank: usize,
    pub certified_chi: usize,
    pub state_descriptor: String,
    pub rotation_descriptor: String,
}

impl CertificationReport {
    /// Checks the internal consistency of a (possibly deserialized) report.
    pub fn validate(&self) -> Result<()> {
        if self.distinct_k > self.k {
            return Err(invalid!("distinct_K = {} exceeds K = {}", self.distinct_k, self.k));
        }
        if self.normalized_svals.len() != self.distinct_k + 1 {
            return Err(invalid!(
                "{} singular values for a {}-dimensional CM",
                self.normalized_svals.len(),
                self.distinct_k + 1
            ));
        }
        if self.normalized_svals.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid!("singular values are not in descending order"));
        }
        if self.rank > self.distinct_k + 1 || self.rank != numerical_rank(&self.normalized_svals, self.threshold) {
            return Err(invalid!("rank {} inconsistent with the spectrum and threshold", self.rank));
        }
        if self.certified_chi != certified_lower_bound(self.rank) {
            return Err(invalid!("certified bound {} does not match rank {}", self.certified_chi, self.rank));
        }
        Ok(())
    }
}

/// Spectrum, rank and bound of an already measured CM. `draws` is the i.i.d.
/// draw count behind it.
pub fn certify_cm(cm: &ProjectedCm, draws: usize, threshold: Option<f64>) -> Result<CertificationReport> {
    let svals = singular_spectrum(&cm.entries)?;
    let threshold = threshold.unwrap_or_else(|| default_threshold(cm.k(), &cm.noise));
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(invalid!("rank threshold must be finite and >= 0, got {threshold}"));
    }
    let rank = numerical_rank(&svals, threshold);
    Ok(CertificationReport {
        seed: None,
        k: draws.max(cm.k()),
        distinct_k: cm.k(),
        noise: cm.noise,
        threshold,
        normalized_svals: svals,
        rank,
        certified_chi: certified_lower_bound(rank),
        state_descriptor: String::new(),
        rotation_descriptor: Rotation::None.to_string(),
    })
}

/// Rotation, sampling, CM construction and rank analysis in one pass.
///
/// Draw order from `rng`: rotation unitaries, then the Pauli set, then noise.
pub fn certify<R: Rng + ?Sized>(psi: &StateVector, config: &CertifyConfig, rng: &mut R) -> Result<CertificationReport> {
    let rotated = rotate(psi, config.rotation, rng)?;
    let set = if config.k == 0 {
        PauliSet::empty(psi.n_a())?
    } else {
        sample_pauli_set(psi.n_a(), config.k, rng)?
    };
    let cm = build_projected_cm(&rotated, &set, config.noise, rng)?;
    let mut report = certify_cm(&cm, set.draws(), config.threshold)?;
    report.rotation_descriptor = config.rotation.to_string();
    Ok(report)
}

/// Rank of `{v_P : P ∈ S ∪ {I}}` for the computational-basis Schmidt vectors
/// `{|a> : a ∈ A}`, computed combinatorially.
///
/// For `W_{x,z}`, `<a|W|b> = i^{x·z} (-1)^{z·b} δ_{a, b⊕x}`, so frame vectors
/// with different `x` are orthogonal and the rank splits into sectors. Sector
/// `x` lives on `B_x = A ∩ (A ⊕ x)` and is spanned by the sign patterns
/// `b ↦ (-1)^{z·b}` for `z ∈ S_x`; the `x = 0` sector also holds the
/// identity's all-ones pattern. Each sector rank is computed exactly over the
/// integers.
pub fn sector_rank_oracle(a_set: &[u64], set: &PauliSet) -> Result<usize> {
    let m = set.num_qubits();
    if a_set.is_empty() {
        return Err(invalid!("the Schmidt support set is empty"));
    }
    let mut support: Vec<u64> = a_set.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.len() != a_set.len() || support.iter().any(|&a| a >> m != 0) {
        return Err(invalid!("Schmidt support must be distinct {m}-bit strings"));
    }
    let mut sectors: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    sectors.entry(0).or_default().push(0);
    for p in set.members() {
        sectors.entry(p.x()).or_default().push(p.z());
    }
    let sign = |z: u64, b: u64| if (z & b).count_ones() % 2 == 0 { 1i64 } else { -1 };
    let mut total = 0;
    for (x, zs) in &sectors {
        let b_x: Vec<u64> = support.iter().copied().filter(|b| support.binary_search(&(b ^ x)).is_ok()).collect();
        if b_x.is_empty() {
            continue;
        }
        let rows: Vec<Vec<i64>> = zs.iter().map(|&z| b_x.iter().map(|&b| sign(z, b)).collect()).collect();
        total += integer_rank(&rows);
    }
    Ok(total)
}

/// [`sector_rank_oracle`] for a `d × χ` basis that must consist of
/// computational basis vectors up to phases.
pub fn sector_rank_oracle_for_basis(basis: &DMatrix<C64>, set: &PauliSet) -> Result<usize> {
    let mut support = Vec::with_capacity(basis.ncols());
    for col in basis.column_iter() {
        let hits: Vec<usize> = (0..col.len()).filter(|&r| col[r].norm() > 1e-12).collect();
        match hits.as_slice() {
            [r] if (col[*r].norm() - 1.0).abs() < 1e-12 => support.push(*r as u64),
            _ => return Err(unsupported!("sector oracle needs a computational Schmidt basis")),
        }
    }
    sector_rank_oracle(&support, set)
}

/// Fraction of `trials` in which `draws` i.i.d. isotropic vectors in `R^n`
/// span the whole space.
///
/// Ensemble with `‖X‖² = μ` (requires `μ >= n`): with probability `n/μ`,
/// `X = ±√μ e_i` for a uniform index `i` and sign; otherwise `X = 0`. Then
/// `E[X Xᵀ] = I`.
pub fn isotropic_rank_experiment<R: Rng + ?Sized>(
    n: usize,
    mu: f64,
    draws: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(invalid!("need n >= 1 and at least one trial"));
    }
    if !(mu >= n as f64) || !mu.is_finite() {
        return Err(invalid!("an isotropic vector in dimension {n} needs mu >= {n}, got {mu}"));
    }
    let keep = n as f64 / mu;
    let amp = mu.sqrt();
    let mut successes = 0usize;
    for _ in 0..trials {
        if draws < n {
            // Burn the same randomness as a full trial would, then record failure.
            for _ in 0..draws {
                let _: f64 = rng.random();
                let _: usize = rng.random_range(0..n);
                let _: bool = rng.random();
            }
            continue;
        }
        let mut m = DMatrix::<f64>::zeros(draws, n);
        for r in 0..draws {
            let emit = rng.random::<f64>() < keep;
            let i = rng.random_range(0..n);
            let s = if rng.random::<bool>() { amp } else { -amp };
            if emit {
                m[(r, i)] = s;
            }
        }
        let sv = singular_values_desc(m);
        let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
        if sv.iter().filter(|&&s| s > 1e-9 * scale).count() == n {
            successes += 1;
        }
    }
    Ok(successes as f64 / trials as f64)
}
