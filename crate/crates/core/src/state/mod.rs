//! Dense bipartite statevectors.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, resource, Result};
use crate::linalg::{haar_matrix, jacobi_svd, unitarity_error};
use crate::pauli::PauliOp;
use crate::C64;

mod fermion;

pub use fermion::{fermion_chain_ground_state, hopping_matrix, GroundState, MAX_CHAIN_SITES};

/// Default truncation for Schmidt singular values.
pub const SCHMIDT_CUTOFF: f64 = 1e-7;
/// Largest total qubit count a `StateVector` may hold.
pub const MAX_STATE_QUBITS: u32 = 26;

const NORM_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-8;

/// Normalized pure state on `n_a + n_b` qubits. The A qubits are the
/// high-order bits of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_a: u32,
    n_b: u32,
    amps: Vec<C64>,
}

fn check_split(n_a: u32, n_b: u32) -> Result<()> {
    if n_a == 0 || n_b == 0 {
        return Err(invalid!("both sides of the bipartition need at least one qubit (got {n_a}|{n_b})"));
    }
    if n_a + n_b > MAX_STATE_QUBITS {
        return Err(resource!("{} qubits exceed the {MAX_STATE_QUBITS}-qubit statevector limit", n_a + n_b));
    }
    Ok(())
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within 1e-10).
    pub fn new(amps: Vec<C64>, n_a: u32, n_b: u32) -> Result<Self> {
        check_split(n_a, n_b)?;
        let dim = 1usize << (n_a + n_b);
        if amps.len() != dim {
            return Err(invalid!("expected {dim} amplitudes, got {}", amps.len()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(invalid!("non-finite amplitude"));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(invalid!("state norm² is {norm2}, expected 1"));
        }
        Ok(StateVector { n_a, n_b, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C64>, n_a: u32, n_b: u32) -> Result<Self> {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(invalid!("cannot normalize a state with norm² {norm2}"));
        }
        let s = 1.0 / norm2.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Self::new(amps, n_a, n_b)
    }

    /// Builds the state `Σ_ab M_ab |a>|b>` from a `d_A × d_B` matrix.
    pub fn from_amplitude_matrix(m: &DMatrix<C64>, n_a: u32, n_b: u32) -> Result<Self> {
        check_split(n_a, n_b)?;
        if m.nrows() != 1 << n_a || m.ncols() != 1 << n_b {
            return Err(invalid!("amplitude matrix is {}x{}, expected {}x{}", m.nrows(), m.ncols(), 1 << n_a, 1 << n_b));
        }
        let amps = (0..m.nrows()).flat_map(|a| (0..m.ncols()).map(move |b| (a, b))).map(|(a, b)| m[(a, b)]).collect();
        Self::new(amps, n_a, n_b)
    }

    pub fn basis_state(index: u64, n_a: u32, n_b: u32) -> Result<Self> {
        check_split(n_a, n_b)?;
        let dim = 1usize << (n_a + n_b);
        if index as usize >= dim {
            return Err(invalid!("basis index {index} out of range for {} qubits", n_a + n_b));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index as usize] = C64::new(1.0, 0.0);
        Self::new(amps, n_a, n_b)
    }

    /// `Σ_{i<χ} |i>_A |i>_B / √χ`.
    pub fn maximally_entangled(chi: usize, n_a: u32, n_b: u32) -> Result<Self> {
        check_split(n_a, n_b)?;
        let (da, db) = (1usize << n_a, 1usize << n_b);
        if chi == 0 || chi > da.min(db) {
            return Err(invalid!("Schmidt rank {chi} not in 1..={}", da.min(db)));
        }
        let mut amps = vec![C64::new(0.0, 0.0); da * db];
        let w = 1.0 / (chi as f64).sqrt();
        for i in 0..chi {
            amps[i * db + i] = C64::new(w, 0.0);
        }
        Self::new(amps, n_a, n_b)
    }

    /// A state with the given Schmidt spectrum and independent Haar-random
    /// Schmidt bases on both sides.
    pub fn random_schmidt_state<R: Rng + ?Sized>(spectrum: &[f64], n_a: u32, n_b: u32, rng: &mut R) -> Result<Self> {
        check_split(n_a, n_b)?;
        let (da, db) = (1usize << n_a, 1usize << n_b);
        validate_spectrum(spectrum, da.min(db))?;
        let left = haar_matrix(da, rng);
        let right = haar_matrix(db, rng);
        Self::with_schmidt_form(spectrum, &left, &right, n_a, n_b)
    }

    /// `Σ_i √λ_i |l_i>|r_i>` with `l_i`, `r_i` the leading columns of the given bases.
    pub fn with_schmidt_form(
        spectrum: &[f64],
        left: &DMatrix<C64>,
        right: &DMatrix<C64>,
        n_a: u32,
        n_b: u32,
    ) -> Result<Self> {
        check_split(n_a, n_b)?;
        let (da, db) = (1usize << n_a, 1usize << n_b);
        validate_spectrum(spectrum, da.min(db))?;
        if left.nrows() != da || right.nrows() != db || left.ncols() < spectrum.len() || right.ncols() < spectrum.len() {
            return Err(invalid!("Schmidt basis shapes do not match the bipartition"));
        }
        let mut m = DMatrix::zeros(da, db);
        for (i, lam) in spectrum.iter().enumerate() {
            let w = lam.sqrt();
            for a in 0..da {
                let la = left[(a, i)] * w;
                for b in 0..db {
                    m[(a, b)] += la * right[(b, i)];
                }
            }
        }
        let amps: Vec<C64> = (0..da).flat_map(|a| (0..db).map(move |b| (a, b))).map(|(a, b)| m[(a, b)]).collect();
        Self::normalized(amps, n_a, n_b)
    }

    pub fn num_qubits(&self) -> u32 {
        self.n_a + self.n_b
    }

    pub fn n_a(&self) -> u32 {
        self.n_a
    }

    pub fn n_b(&self) -> u32 {
        self.n_b
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `M` with `M[(a, b)] = <a, b|ψ>`.
    pub fn amplitude_matrix(&self) -> DMatrix<C64> {
        let db = self.dim_b();
        DMatrix::from_fn(self.dim_a(), db, |a, b| self.amps[a * db + b])
    }

    /// `ρ_A = Tr_B |ψ><ψ| = M M†`.
    pub fn reduced_density_a(&self) -> DMatrix<C64> {
        let m = self.amplitude_matrix();
        &m * m.adjoint()
    }

    /// `(U_A ⊗ U_B)|ψ>`, computed as `U_A M U_Bᵀ`.
    pub fn apply_local_unitary(&self, u_a: &DMatrix<C64>, u_b: &DMatrix<C64>) -> Result<Self> {
        let (da, db) = (self.dim_a(), self.dim_b());
        if u_a.shape() != (da, da) || u_b.shape() != (db, db) {
            return Err(invalid!(
                "local unitaries are {:?} and {:?}, expected {da}x{da} and {db}x{db}",
                u_a.shape(),
                u_b.shape()
            ));
        }
        for (name, u) in [("U_A", u_a), ("U_B", u_b)] {
            let err = unitarity_error(u);
            if err > UNITARY_TOL {
                return Err(invalid!("{name} deviates from unitarity by {err:e}"));
            }
        }
        let m = u_a * self.amplitude_matrix() * u_b.transpose();
        Self::from_amplitude_matrix(&m, self.n_a, self.n_b).or_else(|_| {
            // Rounding in the products can push the norm just past the strict check.
            let amps = (0..da).flat_map(|a| (0..db).map(move |b| (a, b))).map(|(a, b)| m[(a, b)]).collect();
            Self::normalized(amps, self.n_a, self.n_b)
        })
    }

    /// `<ψ|P ⊗ Q|ψ>` in `O(2^n)` time without forming the operator.
    pub fn pauli_pair_expectation(&self, p: &PauliOp, q: &PauliOp) -> Result<f64> {
        if p.num_qubits() != self.n_a || q.num_qubits() != self.n_b {
            return Err(invalid!(
                "Pauli sizes {}|{} do not match bipartition {}|{}",
                p.num_qubits(),
                q.num_qubits(),
                self.n_a,
                self.n_b
            ));
        }
        let db = self.dim_b();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..self.dim_a() {
            let pa = p.phase_value(a as u64);
            let a_out = a ^ p.x() as usize;
            for b in 0..db {
                let amp = self.amps[a * db + b];
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                let out = a_out * db + (b ^ q.x() as usize);
                acc += self.amps[out].conj() * pa * q.phase_value(b as u64) * amp;
            }
        }
        debug_assert!(acc.im.abs() <= 1e-10, "imaginary residue {}", acc.im);
        Ok(acc.re)
    }

    /// Schmidt decomposition from the SVD of the amplitude matrix; singular
    /// values at or below `cutoff` are dropped.
    pub fn schmidt_decompose(&self, cutoff: f64) -> SchmidtData {
        let (u, s, v) = jacobi_svd(&self.amplitude_matrix());
        let chi = s.iter().take_while(|&&x| x > cutoff).count();
        let left = u.columns(0, chi).into_owned();
        let right = v.columns(0, chi).map(|z| z.conj());
        let coefficients = s[..chi].iter().map(|x| x * x).collect();
        SchmidtData { coefficients, left, right, cutoff, n_a: self.n_a, n_b: self.n_b }
    }
}

fn validate_spectrum(spectrum: &[f64], max_len: usize) -> Result<()> {
    if spectrum.is_empty() || spectrum.len() > max_len {
        return Err(invalid!("spectrum length {} not in 1..={max_len}", spectrum.len()));
    }
    if spectrum.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(invalid!("spectrum entries must be positive"));
    }
    let total: f64 = spectrum.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid!("spectrum sums to {total}, expected 1"));
    }
    Ok(())
}

/// Schmidt form `|ψ> = Σ_i √λ_i |l_i> ⊗ |r_i>`.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    /// `λ_i` in non-increasing order.
    pub coefficients: Vec<f64>,
    /// `d_A × χ`, column `i` is `|l_i>`.
    pub left: DMatrix<C64>,
    /// `d_B × χ`, column `i` is `|r_i>`.
    pub right: DMatrix<C64>,
    pub cutoff: f64,
    n_a: u32,
    n_b: u32,
}

impl SchmidtData {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn n_a(&self) -> u32 {
        self.n_a
    }

    pub fn n_b(&self) -> u32 {
        self.n_b
    }

    /// `Σ_i √λ_i |l_i> ⊗ |r_i>` as a raw amplitude vector (not renormalized).
    pub fn reconstruct(&self) -> Vec<C64> {
        let (da, db) = (self.left.nrows(), self.right.nrows());
        let mut amps = vec![C64::new(0.0, 0.0); da * db];
        for (i, lam) in self.coefficients.iter().enumerate() {
            let w = lam.sqrt();
            for a in 0..da {
                let la = self.left[(a, i)] * w;
                for b in 0..db {
                    amps[a * db + b] += la * self.right[(b, i)];
                }
            }
        }
        amps
    }
}
