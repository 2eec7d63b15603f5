//! Correlation matrices and the frame-vector machinery behind their rank.
//!
//! For a state with amplitude matrix `M` (`d_A × d_B`), the entry
//! `<ψ|P ⊗ Q|ψ> = Σ_b (M† P M)[b ⊕ x_Q, b] · phase_Q(b)`, so a row costs one
//! `d³` product plus `O(d)` per column. Exact entries are real up to rounding;
//! the imaginary residue is dropped.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{invalid, resource, unsupported, Result};
use crate::pauli::{enumerate_all, sample_uniform_nonidentity, PauliOp, MAX_DENSE_QUBITS};
use crate::seed::derive_seed;
use crate::state::{SchmidtData, StateVector};
use crate::C64;

/// Largest local qubit count for [`build_full_cm`] (a 4096 × 4096 matrix).
pub const MAX_FULL_CM_QUBITS: u32 = 6;
/// Largest local dimension for [`build_ul`].
pub const MAX_UL_DIM: usize = 16;
/// Draw count of the sampled lower bound used by [`mu0`] above six qubits.
pub const MU0_FALLBACK_SAMPLES: usize = 100_000;

/// Distinct non-identity Paulis in draw order, plus the number of i.i.d.
/// draws that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSet {
    m: u32,
    members: Vec<PauliOp>,
    draws: usize,
}

impl PauliSet {
    /// The empty set: the projected CM is then the 1×1 identity block.
    pub fn empty(m: u32) -> Result<Self> {
        PauliOp::identity(m)?;
        Ok(PauliSet { m, members: Vec::new(), draws: 0 })
    }

    /// Builds a set from explicit operators; duplicates are dropped, order kept.
    pub fn from_members(m: u32, ops: impl IntoIterator<Item = PauliOp>) -> Result<Self> {
        let mut set = Self::empty(m)?;
        for op in ops {
            if op.num_qubits() != m {
                return Err(invalid!("Pauli {op} is not on {m} qubits"));
            }
            if op.is_identity() {
                return Err(invalid!("the identity is not a member of P_0"));
            }
            set.push(op);
        }
        Ok(set)
    }

    fn push(&mut self, op: PauliOp) {
        self.draws += 1;
        if !self.members.contains(&op) {
            self.members.push(op);
        }
    }

    pub fn num_qubits(&self) -> u32 {
        self.m
    }

    pub fn members(&self) -> &[PauliOp] {
        &self.members
    }

    /// Number of i.i.d. draws (`K`), counting duplicates.
    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn distinct(&self) -> usize {
        self.members.len()
    }

    /// `[I] ++ members`, the row/column labels of the projected CM.
    pub fn labels(&self) -> Vec<PauliOp> {
        let mut out = Vec::with_capacity(self.members.len() + 1);
        out.push(PauliOp::identity(self.m).expect("validated on construction"));
        out.extend_from_slice(&self.members);
        out
    }
}

/// `K` i.i.d. uniform draws from `P_0` with duplicates removed.
pub fn sample_pauli_set<R: Rng + ?Sized>(m: u32, k: usize, rng: &mut R) -> Result<PauliSet> {
    if k == 0 {
        return Err(invalid!("a sampled Pauli set needs K >= 1"));
    }
    let mut set = PauliSet::empty(m)?;
    for _ in 0..k {
        set.push(sample_uniform_nonidentity(m, rng)?);
    }
    Ok(set)
}

/// How measured entries deviate from the exact expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "mode"))]
pub enum NoiseModel {
    #[default]
    Exact,
    /// Each entry is the mean of `shots` ±1 outcomes.
    Shots { shots: u32 },
    /// Each entry gets independent `N(0, sigma²)` noise.
    Gaussian { sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Shots { shots: 0 } => Err(invalid!("shot count must be at least 1")),
            NoiseModel::Gaussian { sigma } if !(sigma >= 0.0) || !sigma.is_finite() => {
                Err(invalid!("gaussian noise scale must be finite and >= 0, got {sigma}"))
            }
            _ => Ok(()),
        }
    }

    /// Per-entry noise scale `ε̂`: 0, `1/√N` or `sigma`.
    pub fn scale(&self) -> f64 {
        match *self {
            NoiseModel::Exact => 0.0,
            NoiseModel::Shots { shots } => 1.0 / (shots as f64).sqrt(),
            NoiseModel::Gaussian { sigma } => sigma,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Exact => f.write_str("exact"),
            NoiseModel::Shots { shots } => write!(f, "shots(N={shots})"),
            NoiseModel::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
        }
    }
}

/// `(K+1) × (K+1)` matrix of Pauli-pair expectation values. Row and column
/// `0` belong to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedCm {
    pub entries: DMatrix<f64>,
    pub labels: Vec<PauliOp>,
    pub noise: NoiseModel,
}

impl ProjectedCm {
    /// Reassembles a matrix read back from storage.
    pub fn from_parts(entries: DMatrix<f64>, labels: Vec<PauliOp>, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        if labels.is_empty() || !labels[0].is_identity() {
            return Err(invalid!("the first label must be the identity"));
        }
        if entries.nrows() != labels.len() || entries.ncols() != labels.len() {
            return Err(invalid!("{} labels for a {}x{} matrix", labels.len(), entries.nrows(), entries.ncols()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(invalid!("non-finite correlation entry"));
        }
        let m = labels[0].num_qubits();
        if labels.iter().any(|l| l.num_qubits() != m) || labels[1..].iter().any(|l| l.is_identity()) {
            return Err(invalid!("labels must be non-identity Paulis on {m} qubits after the first"));
        }
        if noise == NoiseModel::Exact && (entries[(0, 0)] - 1.0).abs() > 1e-12 {
            return Err(invalid!("exact correlation matrix must have entry (I,I) = 1"));
        }
        Ok(ProjectedCm { entries, labels, noise })
    }

    /// Number of non-identity operators (`K` after deduplication).
    pub fn k(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Exact `<ψ|P ⊗ Q|ψ>` for all `P` in `rows`, `Q` in `cols`.
fn correlation_block(psi: &StateVector, rows: &[PauliOp], cols: &[PauliOp]) -> DMatrix<f64> {
    let m = psi.amplitude_matrix();
    let m_adj = m.adjoint();
    let db = psi.dim_b();
    let col_phases: Vec<Vec<C64>> =
        cols.iter().map(|q| (0..db).map(|b| q.phase_value(b as u64)).collect()).collect();
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (r, p) in rows.iter().enumerate() {
        let a_p = &m_adj * p.left_multiply(&m);
        for (c, q) in cols.iter().enumerate() {
            let xq = q.x() as usize;
            let phases = &col_phases[c];
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..db {
                acc += a_p[(b ^ xq, b)] * phases[b];
            }
            out[(r, c)] = acc.re;
        }
    }
    out
}

fn require_equal_split(psi: &StateVector) -> Result<()> {
    if psi.n_a() != psi.n_b() {
        return Err(unsupported!(
            "correlation matrices need dim H_A = dim H_B (got {}|{} qubits)",
            psi.n_a(),
            psi.n_b()
        ));
    }
    Ok(())
}

/// Projected CM on `S ∪ {I}` under the given noise model.
///
/// Noise draws come from per-row generators seeded by
/// `derive_seed(base, &[row])` with `base` taken from `rng`, so results do not
/// depend on evaluation order. The `(I, I)` entry is known and never noised.
pub fn build_projected_cm<R: Rng + ?Sized>(
    psi: &StateVector,
    set: &PauliSet,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<ProjectedCm> {
    require_equal_split(psi)?;
    noise.validate()?;
    if set.num_qubits() != psi.n_a() {
        return Err(invalid!("Pauli set on {} qubits for a {}-qubit side", set.num_qubits(), psi.n_a()));
    }
    let labels = set.labels();
    let mut entries = correlation_block(psi, &labels, &labels);
    // <I⊗I> of a normalized state, pinned against rounding in the sum.
    entries[(0, 0)] = 1.0;
    if noise != NoiseModel::Exact {
        let base: u64 = rng.random();
        let n = labels.len();
        for r in 0..n {
            let mut row_rng = ChaCha8Rng::seed_from_u64(derive_seed(base, &[r as u64]));
            for c in 0..n {
                if r == 0 && c == 0 {
                    continue;
                }
                let exact = entries[(r, c)];
                entries[(r, c)] = match noise {
                    NoiseModel::Shots { shots } => {
                        let p = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
                        let ones = Binomial::new(shots as u64, p).expect("p in [0, 1]").sample(&mut row_rng);
                        2.0 * ones as f64 / shots as f64 - 1.0
                    }
                    NoiseModel::Gaussian { sigma } => {
                        exact + Normal::new(0.0, sigma).expect("validated sigma").sample(&mut row_rng)
                    }
                    NoiseModel::Exact => exact,
                };
            }
        }
    }
    Ok(ProjectedCm { entries, labels, noise })
}

/// Full `d² × d²` CM over every Pauli (identity first, canonical order).
pub fn build_full_cm(psi: &StateVector) -> Result<DMatrix<f64>> {
    require_equal_split(psi)?;
    if psi.n_a() > MAX_FULL_CM_QUBITS {
        return Err(resource!(
            "full CM on {} qubits per side exceeds the {MAX_FULL_CM_QUBITS}-qubit limit",
            psi.n_a()
        ));
    }
    let all = enumerate_all(psi.n_a(), true)?;
    let mut t = correlation_block(psi, &all, &all);
    t[(0, 0)] = 1.0;
    Ok(t)
}

/// CM of `(1-ε)|ψ><ψ| + ε I/d²` given the CM of `|ψ>`: only the `(I, I)`
/// entry of the maximally mixed part survives.
pub fn depolarize(cm: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid!("depolarizing strength {eps} outside [0, 1]"));
    }
    if cm.is_empty() {
        return Err(invalid!("empty correlation matrix"));
    }
    let mut out = cm * (1.0 - eps);
    out[(0, 0)] += eps;
    Ok(out)
}

/// `|v_P>` with coordinates `(i, j) ↦ <l_i|P|l_j>/√d` at index `i·χ + j`.
#[derive(Debug, Clone)]
pub struct FrameVector {
    pub coords: DVector<C64>,
    pub label: PauliOp,
    pub deflated: bool,
}

/// Frame vectors of the left Schmidt basis.
pub fn frame_vectors(schmidt: &SchmidtData, paulis: &[PauliOp], deflate: bool) -> Result<Vec<FrameVector>> {
    frame_vectors_of(&schmidt.left, paulis, deflate)
}

/// Frame vectors for an arbitrary `d × χ` orthonormal basis.
///
/// With `deflate`, the component along `|e_I> = Σ_i |e_ii>/√χ` is removed.
pub fn frame_vectors_of(basis: &DMatrix<C64>, paulis: &[PauliOp], deflate: bool) -> Result<Vec<FrameVector>> {
    let d = basis.nrows();
    let chi = basis.ncols();
    if chi == 0 || !d.is_power_of_two() {
        return Err(invalid!("basis must be d×χ with d a power of two and χ >= 1"));
    }
    let m = d.trailing_zeros();
    let adj = basis.adjoint();
    let scale = 1.0 / (d as f64).sqrt();
    let e_weight = 1.0 / (chi as f64).sqrt();
    paulis
        .iter()
        .map(|p| {
            if p.num_qubits() != m {
                return Err(invalid!("Pauli {p} is not on {m} qubits"));
            }
            let g = &adj * p.left_multiply(basis);
            let mut coords = DVector::from_fn(chi * chi, |k, _| g[(k / chi, k % chi)] * scale);
            if deflate {
                let overlap: C64 = (0..chi).map(|i| coords[i * chi + i]).sum::<C64>() * e_weight;
                for i in 0..chi {
                    coords[i * chi + i] -= overlap * e_weight;
                }
            }
            Ok(FrameVector { coords, label: *p, deflated: deflate })
        })
        .collect()
}

/// Result of [`mu0`]: exact when every Pauli was enumerated, otherwise a
/// lower bound from `samples` uniform draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mu0 {
    pub value: f64,
    pub exact: bool,
    pub samples: usize,
}

/// `d · max_{P ∈ P_0} Σ_{ij} |<l_i|P|l_j>|²` for a `d × χ` basis.
pub fn mu0<R: Rng + ?Sized>(basis: &DMatrix<C64>, rng: &mut R) -> Result<Mu0> {
    let d = basis.nrows();
    if basis.ncols() == 0 || d < 2 || !d.is_power_of_two() {
        return Err(invalid!("basis must be d×χ with d a power of two >= 2 and χ >= 1"));
    }
    let m = d.trailing_zeros();
    let adj = basis.adjoint();
    let mass = |p: &PauliOp| (&adj * p.left_multiply(basis)).iter().map(|v| v.norm_sqr()).sum::<f64>();
    let (best, exact, samples) = if m <= MAX_DENSE_QUBITS {
        let all = enumerate_all(m, false)?;
        let best = all.iter().map(mass).fold(0.0, f64::max);
        (best, true, all.len())
    } else {
        let mut best = 0.0f64;
        for _ in 0..MU0_FALLBACK_SAMPLES {
            best = best.max(mass(&sample_uniform_nonidentity(m, rng)?));
        }
        (best, false, MU0_FALLBACK_SAMPLES)
    };
    Ok(Mu0 { value: d as f64 * best, exact, samples })
}

/// `U_L = (1/√d) Σ_{P,i,j} <l_j|P|l_i> |e_P><e_ij|` for a full `d × d` basis;
/// rows follow the canonical Pauli order, columns `i·d + j`.
pub fn build_ul(basis: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let d = basis.nrows();
    if basis.ncols() != d || d < 2 || !d.is_power_of_two() {
        return Err(invalid!("U_L needs a square basis with power-of-two dimension"));
    }
    if d > MAX_UL_DIM {
        return Err(resource!("U_L for d = {d} exceeds the d <= {MAX_UL_DIM} limit"));
    }
    let all = enumerate_all(d.trailing_zeros(), true)?;
    let adj = basis.adjoint();
    let scale = 1.0 / (d as f64).sqrt();
    let mut ul = DMatrix::zeros(d * d, d * d);
    for (row, p) in all.iter().enumerate() {
        // g[(j, i)] = <l_j|P|l_i>
        let g = &adj * p.left_multiply(basis);
        for i in 0..d {
            for j in 0..d {
                ul[(row, i * d + j)] = g[(j, i)] * scale;
            }
        }
    }
    Ok(ul)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_rank, haar_matrix, unitarity_error};
    use crate::state::SCHMIDT_CUTOFF;
    use rand::SeedableRng;
    use std::vec;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    fn identity_basis(d: usize, chi: usize) -> DMatrix<C64> {
        DMatrix::from_fn(d, chi, |r, c| C64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
    }

    fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn frame_sum(frames: &[FrameVector]) -> DMatrix<C64> {
        let n = frames[0].coords.len();
        frames.iter().fold(DMatrix::zeros(n, n), |acc, f| acc + &f.coords * f.coords.adjoint())
    }

    fn random_spectrum(chi: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let raw: Vec<f64> = (0..chi).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    }

    #[test]
    fn pauli_set_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let one = sample_pauli_set(3, 1, &mut rng).unwrap();
        assert_eq!((one.distinct(), one.draws()), (1, 1));
        assert!(!one.members()[0].is_identity());
        assert!(sample_pauli_set(3, 0, &mut rng).is_err());

        let a = sample_pauli_set(6, 64, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        let b = sample_pauli_set(6, 64, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labels()[0], PauliOp::identity(6).unwrap());

        // Birthday bound: ~0.49 expected duplicate pairs per set of 64 draws.
        let mut near_full = 0;
        for seed in 0..200 {
            let s = sample_pauli_set(6, 64, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(s.draws(), 64);
            if s.distinct() >= 63 {
                near_full += 1;
            }
        }
        assert!(near_full >= 160, "{near_full}/200 sets with >= 63 distinct members");
    }

    #[test]
    fn explicit_sets_are_validated() {
        assert!(PauliSet::from_members(1, [p("I")]).is_err());
        assert!(PauliSet::from_members(1, [p("XX")]).is_err());
        let s = PauliSet::from_members(1, [p("X"), p("Z"), p("X")]).unwrap();
        assert_eq!((s.distinct(), s.draws()), (2, 3));
    }

    #[test]
    fn bell_projected_cm() {
        let bell = StateVector::maximally_entangled(2, 1, 1).unwrap();
        let set = PauliSet::from_members(1, [p("Z")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cm = build_projected_cm(&bell, &set, NoiseModel::Exact, &mut rng).unwrap();
        assert_eq!(cm.labels, vec![p("I"), p("Z")]);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!((cm.entries - want).abs().max() < 1e-15);
    }

    #[test]
    fn projected_cm_matches_pairwise_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in 1..=3u32 {
            let spectrum = random_spectrum(1 << m, &mut rng);
            let psi = StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap();
            let set = sample_pauli_set(m, 12, &mut rng).unwrap();
            let cm = build_projected_cm(&psi, &set, NoiseModel::Exact, &mut rng).unwrap();
            assert_eq!(cm.entries[(0, 0)], 1.0);
            for (r, a) in cm.labels.iter().enumerate() {
                for (c, b) in cm.labels.iter().enumerate() {
                    let direct = psi.pauli_pair_expectation(a, b).unwrap();
                    assert!((cm.entries[(r, c)] - direct).abs() < 1e-12);
                    assert!(cm.entries[(r, c)].abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn unequal_split_is_unsupported() {
        let psi = StateVector::maximally_entangled(2, 1, 2).unwrap();
        let set = PauliSet::from_members(1, [p("Z")]).unwrap();
        let err = build_projected_cm(&psi, &set, NoiseModel::Exact, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(crate::Error::Unsupported(_))));
        assert!(matches!(build_full_cm(&psi), Err(crate::Error::Unsupported(_))));
    }

    #[test]
    fn shot_noise_converges() {
        let bell = StateVector::maximally_entangled(2, 1, 1).unwrap();
        let set = PauliSet::from_members(1, [p("Z")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cm = build_projected_cm(&bell, &set, NoiseModel::Shots { shots: 1_000_000 }, &mut rng).unwrap();
        assert!((cm.entries[(1, 1)] - 1.0).abs() <= 0.005);
        assert!(cm.entries[(0, 1)].abs() <= 0.005);
        assert_eq!(cm.entries[(0, 0)], 1.0);
        assert!(NoiseModel::Shots { shots: 0 }.validate().is_err());
        assert!(NoiseModel::Gaussian { sigma: -1.0 }.validate().is_err());
    }

    #[test]
    fn gaussian_noise_has_requested_scale() {
        let bell = StateVector::maximally_entangled(2, 1, 1).unwrap();
        let set = PauliSet::from_members(1, [p("X"), p("Z")]).unwrap();
        let exact = build_projected_cm(&bell, &set, NoiseModel::Exact, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let sigma = 0.01;
        let trials = 10_000;
        let mut sum_sq = DMatrix::<f64>::zeros(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..trials {
            let noisy = build_projected_cm(&bell, &set, NoiseModel::Gaussian { sigma }, &mut rng).unwrap();
            let diff = noisy.entries - &exact.entries;
            sum_sq += diff.component_mul(&diff);
        }
        for r in 0..3 {
            for c in 0..3 {
                if r == 0 && c == 0 {
                    continue;
                }
                let sd = (sum_sq[(r, c)] / trials as f64).sqrt();
                assert!((sd / sigma - 1.0).abs() <= 0.05, "entry ({r},{c}) sd {sd}");
            }
        }
    }

    #[test]
    fn noise_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StateVector::random_schmidt_state(&[0.6, 0.4], 2, 2, &mut rng).unwrap();
        let set = sample_pauli_set(2, 6, &mut rng).unwrap();
        let run = |seed| {
            build_projected_cm(&psi, &set, NoiseModel::Shots { shots: 100 }, &mut ChaCha8Rng::seed_from_u64(seed))
                .unwrap()
                .entries
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn full_cm_examples() {
        let prod = StateVector::basis_state(0b0110, 2, 2).unwrap();
        let t = build_full_cm(&prod).unwrap();
        let sv = crate::linalg::singular_values_desc(t.clone());
        assert!(sv[1] < 1e-12 && sv[0] > 1.0);

        // Bell state: brute force over the 16 Pauli pairs gives diag(1, 1, 1, -1) in I, Z, X, Y order.
        let bell = StateVector::maximally_entangled(2, 1, 1).unwrap();
        let t = build_full_cm(&bell).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        let paulis = enumerate_all(1, true).unwrap();
        for (r, a) in paulis.iter().enumerate() {
            for (c, b) in paulis.iter().enumerate() {
                assert!((t[(r, c)] - bell.pauli_pair_expectation(a, b).unwrap()).abs() < 1e-15);
            }
        }
        assert!((t - want).abs().max() < 1e-15);
        let big = StateVector::maximally_entangled(1, 7, 7).unwrap();
        assert!(matches!(build_full_cm(&big), Err(crate::Error::Resource(_))));
    }

    #[test]
    fn full_cm_frobenius_norm_is_d() {
        // Σ_{P,Q} <P⊗Q>² = d² Tr ρ² = d² for a pure state, so ‖T‖_F = d and ‖T‖_F² = d².
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for m in 1..=4u32 {
            let d = (1usize << m) as f64;
            let spectrum = random_spectrum(1 << m, &mut rng);
            let psi = StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap();
            let t = build_full_cm(&psi).unwrap();
            assert!((t.norm() - d).abs() < 1e-9, "m={m}: {}", t.norm());
        }
    }

    #[test]
    fn identity_frame_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StateVector::random_schmidt_state(&[0.5, 0.3, 0.2], 3, 3, &mut rng).unwrap();
        let sd = psi.schmidt_decompose(SCHMIDT_CUTOFF);
        let id = PauliOp::identity(3).unwrap();
        let plain = &frame_vectors(&sd, &[id], false).unwrap()[0];
        let d = 8.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / d.sqrt() } else { 0.0 };
                assert!((plain.coords[i * 3 + j] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let deflated = &frame_vectors(&sd, &[id], true).unwrap()[0];
        assert!(deflated.coords.norm() < 1e-12);
        assert!(deflated.deflated);
    }

    #[test]
    fn frame_completeness_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (m, chi) in [(1u32, 1usize), (1, 2), (2, 3), (3, 4)] {
            let basis = haar_matrix(1 << m, &mut rng).columns(0, chi).into_owned();
            let all = enumerate_all(m, true).unwrap();
            let id = DMatrix::<C64>::identity(chi * chi, chi * chi);
            let plain = frame_sum(&frame_vectors_of(&basis, &all, false).unwrap());
            assert!(max_dev(&plain, &id) < 1e-10);
            let e_i = DVector::from_fn(chi * chi, |k, _| {
                C64::new(if k / chi == k % chi { 1.0 / (chi as f64).sqrt() } else { 0.0 }, 0.0)
            });
            let deflated = frame_sum(&frame_vectors_of(&basis, &all, true).unwrap());
            assert!(max_dev(&deflated, &(id - &e_i * e_i.adjoint())) < 1e-10);
        }
    }

    #[test]
    fn frame_rank_matches_projected_cm_rank() {
        // rank(T_S) against the rank of the spectrum-weighted frame Gram matrices of both sides.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..24 {
            let m = 2 + (trial % 2) as u32;
            let chi = 1 + trial % 3;
            let spectrum = random_spectrum(chi, &mut rng);
            let psi = StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap();
            let sd = psi.schmidt_decompose(SCHMIDT_CUTOFF);
            let k = 1 + trial % 10;
            let set = sample_pauli_set(m, k, &mut rng).unwrap();
            let cm = build_projected_cm(&psi, &set, NoiseModel::Exact, &mut rng).unwrap();
            let direct = crate::certify::numerical_rank(
                &crate::certify::singular_spectrum(&cm.entries).unwrap(),
                1e-9,
            );

            let weights = DVector::from_fn(chi * chi, |idx, _| {
                C64::new((sd.coefficients[idx / chi] * sd.coefficients[idx % chi]).sqrt(), 0.0)
            });
            let side_rank = |basis: &DMatrix<C64>| {
                let frames = frame_vectors_of(basis, &cm.labels, false).unwrap();
                let v = DMatrix::from_fn(chi * chi, frames.len(), |r, c| frames[c].coords[r] * weights[r]);
                complex_rank(v.adjoint() * &v, 1e-9)
            };
            let expected = side_rank(&sd.left).min(side_rank(&sd.right));
            assert_eq!(direct, expected, "trial {trial}: m={m} chi={chi} K={k}");
        }
    }

    #[test]
    fn mu0_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, chi) in [(1u32, 1usize), (3, 2), (4, 4), (6, 4)] {
            let d = 1usize << m;
            let mu = mu0(&identity_basis(d, chi), &mut rng).unwrap();
            assert!(mu.exact);
            assert!((mu.value - (d * chi) as f64).abs() < 1e-9, "d={d} chi={chi}: {}", mu.value);
        }
        let mu = mu0(&identity_basis(2, 1), &mut rng).unwrap();
        assert_eq!(mu.value, 2.0);
    }

    #[test]
    fn mu0_sampled_fallback_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = identity_basis(128, 1);
        let mu = mu0(&basis, &mut rng).unwrap();
        assert!(!mu.exact);
        assert_eq!(mu.samples, MU0_FALLBACK_SAMPLES);
        assert!(mu.value <= 128.0 + 1e-9 && mu.value > 0.0);
    }

    #[test]
    fn ul_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ul = build_ul(&identity_basis(2, 2)).unwrap();
        assert!(unitarity_error(&ul) <= 1e-12);
        let ul = build_ul(&haar_matrix(4, &mut rng)).unwrap();
        assert!(unitarity_error(&ul) <= 1e-10);
        for r in 0..ul.nrows() {
            assert!((ul.row(r).norm() - 1.0).abs() < 1e-10);
            assert!((ul.column(r).norm() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(build_ul(&identity_basis(32, 32)), Err(crate::Error::Resource(_))));
    }

    #[test]
    fn depolarized_matrix() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 0.5]);
        let out = depolarize(&t, 0.1).unwrap();
        assert!((out[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((out[(0, 1)] - 0.18).abs() < 1e-15);
        assert!((out[(1, 1)] - 0.45).abs() < 1e-15);
        assert!(depolarize(&t, 1.5).is_err());
    }
}
