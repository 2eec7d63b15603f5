//! Pauli operators on `m` qubits in symplectic `(x, z)` form.
//!
//! `PauliOp { x, z }` stands for the Hermitian operator
//! `W_{x,z} = ⊗_n i^{x_n z_n} X_n^{x_n} Z_n^{z_n}`, so `(1, 1)` is exactly `Y`.
//! Acting on a computational basis state,
//! `W_{x,z} |b> = i^{x·z} (-1)^{z·b} |b ⊕ x>`.
//!
//! Products are tracked only up to a global phase; the protocol consumes
//! expectation values of individual operators, never group phases.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, resource, Error, Result};
use crate::C64;

/// Largest qubit count a `PauliOp` can describe (4^m must fit in a `u64`).
pub const MAX_QUBITS: u32 = 31;
/// Largest qubit count accepted by [`PauliOp::to_dense`].
pub const MAX_DENSE_QUBITS: u32 = 6;
/// Largest qubit count accepted by [`enumerate_all`].
pub const MAX_ENUMERATE_QUBITS: u32 = 7;

/// A power of `i`: the value is `i^k` with `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

impl core::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PauliOp {
    x: u64,
    z: u64,
    m: u32,
}

fn parity(v: u64) -> u32 {
    v.count_ones() & 1
}

fn check_qubits(m: u32) -> Result<()> {
    if m == 0 || m > MAX_QUBITS {
        return Err(invalid!("qubit count {m} outside 1..={MAX_QUBITS}"));
    }
    Ok(())
}

impl PauliOp {
    pub fn new(x: u64, z: u64, m: u32) -> Result<Self> {
        check_qubits(m)?;
        let mask = (1u64 << m) - 1;
        if x & !mask != 0 || z & !mask != 0 {
            return Err(invalid!("bit masks x={x:#b}, z={z:#b} do not fit in {m} qubits"));
        }
        Ok(PauliOp { x, z, m })
    }

    pub fn identity(m: u32) -> Result<Self> {
        Self::new(0, 0, m)
    }

    /// Inverse of [`PauliOp::canonical_index`].
    pub fn from_canonical_index(index: u64, m: u32) -> Result<Self> {
        check_qubits(m)?;
        if index >> (2 * m) != 0 {
            return Err(invalid!("index {index} out of range for {m} qubits"));
        }
        let mask = (1u64 << m) - 1;
        Ok(PauliOp { x: index >> m, z: index & mask, m })
    }

    /// Position in the canonical order: the integer whose binary form is `x ‖ z`.
    pub fn canonical_index(&self) -> u64 {
        (self.x << self.m) | self.z
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn num_qubits(&self) -> u32 {
        self.m
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// `i^{x·z}`, the phase that makes `W_{x,z}` Hermitian.
    pub fn hermitian_phase(&self) -> Phase {
        Phase::from_power((self.x & self.z).count_ones())
    }

    /// Phase picked up on `|b>`; caller guarantees `b < 2^m`.
    #[inline]
    pub(crate) fn phase_on(&self, b: u64) -> Phase {
        Phase::from_power((self.x & self.z).count_ones() + 2 * parity(self.z & b))
    }

    /// Complex phase on `|b>`, unchecked.
    #[inline]
    pub(crate) fn phase_value(&self, b: u64) -> C64 {
        self.phase_on(b).to_complex()
    }

    /// `W|b> = phase · |b_out>`.
    pub fn apply_to_basis(&self, b: u64) -> Result<(u64, Phase)> {
        if b >> self.m != 0 {
            return Err(invalid!("basis state {b} has more than {} bits", self.m));
        }
        Ok((b ^ self.x, self.phase_on(b)))
    }

    fn check_same_size(&self, other: &PauliOp) -> Result<()> {
        if self.m != other.m {
            return Err(invalid!("qubit counts differ: {} vs {}", self.m, other.m));
        }
        Ok(())
    }

    /// `(x·z' + x'·z) mod 2`; zero iff the operators commute.
    pub fn symplectic_product(&self, other: &PauliOp) -> Result<u8> {
        self.check_same_size(other)?;
        Ok(((parity(self.x & other.z) + parity(other.x & self.z)) & 1) as u8)
    }

    pub fn commutes_with(&self, other: &PauliOp) -> Result<bool> {
        Ok(self.symplectic_product(other)? == 0)
    }

    /// The Pauli proportional to `self · other`.
    pub fn multiply_up_to_phase(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_same_size(other)?;
        Ok(PauliOp { x: self.x ^ other.x, z: self.z ^ other.z, m: self.m })
    }

    /// Explicit `2^m × 2^m` matrix. Test oracle only.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.m > MAX_DENSE_QUBITS {
            return Err(resource!(
                "dense Pauli matrix requested for {} qubits (max {MAX_DENSE_QUBITS})",
                self.m
            ));
        }
        let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for q in 0..self.m {
            let bit = self.m - 1 - q;
            let xb = (self.x >> bit) & 1 == 1;
            let zb = (self.z >> bit) & 1 == 1;
            out = out.kronecker(&single_qubit_factor(xb, zb));
        }
        Ok(out)
    }

    /// `self · mat`, computed by permuting and phasing rows.
    pub fn left_multiply(&self, mat: &DMatrix<C64>) -> DMatrix<C64> {
        debug_assert_eq!(mat.nrows(), 1usize << self.m);
        let mut out = DMatrix::zeros(mat.nrows(), mat.ncols());
        for b in 0..mat.nrows() {
            let ph = self.phase_value(b as u64);
            let target = b ^ self.x as usize;
            for c in 0..mat.ncols() {
                out[(target, c)] = ph * mat[(b, c)];
            }
        }
        out
    }

    /// `<u|W|v>` for vectors of length `2^m`.
    pub fn matrix_element(&self, u: &[C64], v: &[C64]) -> C64 {
        debug_assert_eq!(u.len(), 1usize << self.m);
        let mut acc = C64::new(0.0, 0.0);
        for (b, vb) in v.iter().enumerate() {
            acc += u[b ^ self.x as usize].conj() * self.phase_value(b as u64) * vb;
        }
        acc
    }
}

fn single_qubit_factor(x: bool, z: bool) -> DMatrix<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match (x, z) {
        (false, false) => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        (true, false) => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        (false, true) => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        (true, true) => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
    }
}

/// Uniform draw from the `4^m - 1` non-identity Paulis.
pub fn sample_uniform_nonidentity<R: Rng + ?Sized>(m: u32, rng: &mut R) -> Result<PauliOp> {
    check_qubits(m)?;
    let idx = rng.random_range(1..(1u64 << (2 * m)));
    PauliOp::from_canonical_index(idx, m)
}

/// Every Pauli on `m` qubits in canonical order.
pub fn enumerate_all(m: u32, include_identity: bool) -> Result<Vec<PauliOp>> {
    check_qubits(m)?;
    if m > MAX_ENUMERATE_QUBITS {
        return Err(resource!(
            "enumerating 4^{m} Paulis exceeds the {MAX_ENUMERATE_QUBITS}-qubit limit"
        ));
    }
    let start = if include_identity { 0 } else { 1 };
    (start..(1u64 << (2 * m))).map(|i| PauliOp::from_canonical_index(i, m)).collect()
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.m as usize);
        for q in 0..self.m {
            let bit = self.m - 1 - q;
            s.push(match ((self.x >> bit) & 1, (self.z >> bit) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            });
        }
        f.write_str(&s)
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = s.chars().count() as u32;
        check_qubits(m)?;
        let (mut x, mut z) = (0u64, 0u64);
        for c in s.chars() {
            let (xb, zb) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => return Err(invalid!("unexpected character {other:?} in Pauli string")),
            };
            x = (x << 1) | xb;
            z = (z << 1) | zb;
        }
        PauliOp::new(x, z, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::vec;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).iter().all(|v| v.norm() <= tol)
    }

    fn basis(m: u32, b: u64) -> nalgebra::DVector<C64> {
        let mut v = nalgebra::DVector::zeros(1 << m);
        v[b as usize] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn y_on_basis_states() {
        let y = p("Y");
        assert_eq!(y.apply_to_basis(0).unwrap(), (1, Phase::I));
        // Y|1> = -i|0>; the uncorrected i^{z·b} form would give -1 here.
        assert_eq!(y.apply_to_basis(1).unwrap(), (0, Phase::MINUS_I));
        let dense = y.to_dense().unwrap();
        assert_eq!(dense[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(dense[(0, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn identity_acts_trivially() {
        let id = PauliOp::identity(3).unwrap();
        for b in 0..8 {
            assert_eq!(id.apply_to_basis(b).unwrap(), (b, Phase::ONE));
        }
        assert!(id.apply_to_basis(8).is_err());
    }

    #[test]
    fn symplectic_examples() {
        assert_eq!(p("X").symplectic_product(&p("Z")).unwrap(), 1);
        assert_eq!(p("XI").symplectic_product(&p("IZ")).unwrap(), 0);
        assert_eq!(p("XY").symplectic_product(&p("XY")).unwrap(), 0);
        assert!(p("X").symplectic_product(&p("XX")).is_err());
    }

    #[test]
    fn products_up_to_phase() {
        assert_eq!(p("X").multiply_up_to_phase(&p("Z")).unwrap(), p("Y"));
        assert_eq!(p("X").multiply_up_to_phase(&p("Y")).unwrap(), p("Z"));
        assert!(p("XZ").multiply_up_to_phase(&p("XZ")).unwrap().is_identity());
        // XZ = -iY and XY = iZ, checked on the dense matrices.
        let xz = p("X").to_dense().unwrap() * p("Z").to_dense().unwrap();
        assert!(close(&xz, &(p("Y").to_dense().unwrap() * C64::new(0.0, -1.0)), 1e-15));
        let xy = p("X").to_dense().unwrap() * p("Y").to_dense().unwrap();
        assert!(close(&xy, &(p("Z").to_dense().unwrap() * C64::new(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn dense_single_qubit_matrices() {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        assert_eq!(p("Z").to_dense().unwrap(), DMatrix::from_row_slice(2, 2, &[l, o, o, -l]));
        assert_eq!(p("X").to_dense().unwrap(), DMatrix::from_row_slice(2, 2, &[o, l, l, o]));
        assert_eq!(p("Y").to_dense().unwrap(), DMatrix::from_row_slice(2, 2, &[o, -i, i, o]));
        assert!(matches!(PauliOp::identity(7).unwrap().to_dense(), Err(Error::Resource(_))));
    }

    #[test]
    fn enumeration_sizes_and_order() {
        assert_eq!(enumerate_all(1, true).unwrap().len(), 4);
        assert_eq!(enumerate_all(2, false).unwrap().len(), 15);
        assert_eq!(enumerate_all(6, false).unwrap().len(), 4095);
        assert!(matches!(enumerate_all(8, true), Err(Error::Resource(_))));
        let labels: Vec<String> =
            enumerate_all(1, true).unwrap().iter().map(|q| alloc::format!("{q}")).collect();
        assert_eq!(labels, vec!["I", "Z", "X", "Y"]);
        let all = enumerate_all(3, true).unwrap();
        assert!(all.windows(2).all(|w| w[0].canonical_index() < w[1].canonical_index()));
    }

    #[test]
    fn text_form_round_trip() {
        for s in ["XIZY", "I", "YYYYYY", "ZXIIX"] {
            assert_eq!(alloc::format!("{}", p(s)), s);
        }
        let q = p("XIZY");
        assert_eq!((q.x(), q.z()), (0b1001, 0b0011));
        assert!("XQ".parse::<PauliOp>().is_err());
        assert!("".parse::<PauliOp>().is_err());
    }

    #[test]
    fn sampling_never_identity_and_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            assert!(!sample_uniform_nonidentity(1, &mut rng).unwrap().is_identity());
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| sample_uniform_nonidentity(4, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn single_qubit_sampling_is_uniform() {
        let n = 30_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_uniform_nonidentity(1, &mut rng).unwrap().canonical_index() as usize] += 1;
        }
        let mean = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in &counts[1..] {
            assert!((*c as f64 - mean).abs() <= 3.0 * sigma, "counts {counts:?}");
        }
        assert_eq!(counts[0], 0);
    }

    fn pauli_strategy(m: u32) -> impl Strategy<Value = PauliOp> {
        (0..(1u64 << (2 * m))).prop_map(move |i| PauliOp::from_canonical_index(i, m).unwrap())
    }

    fn pair_strategy() -> impl Strategy<Value = (PauliOp, PauliOp)> {
        (1u32..=3).prop_flat_map(|m| (pauli_strategy(m), pauli_strategy(m)))
    }

    proptest! {
        #[test]
        fn dense_is_hermitian_involution(q in (1u32..=3).prop_flat_map(pauli_strategy)) {
            let d = q.to_dense().unwrap();
            let id = DMatrix::<C64>::identity(d.nrows(), d.ncols());
            prop_assert!(close(&d, &d.adjoint(), 1e-12));
            prop_assert!(close(&(&d * &d), &id, 1e-12));
        }

        #[test]
        fn products_and_commutation_match_dense((a, b) in pair_strategy()) {
            let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
            let prod = &da * &db;
            let dc = a.multiply_up_to_phase(&b).unwrap().to_dense().unwrap();
            let found = [Phase::ONE, Phase::I, Phase::MINUS_ONE, Phase::MINUS_I]
                .iter()
                .any(|ph| close(&prod, &(&dc * ph.to_complex()), 1e-12));
            prop_assert!(found);
            let commute = close(&prod, &(&db * &da), 1e-12);
            prop_assert_eq!(commute, a.symplectic_product(&b).unwrap() == 0);
        }

        #[test]
        fn basis_action_matches_dense((q, b) in (1u32..=3).prop_flat_map(|m| (pauli_strategy(m), 0..(1u64 << m)))) {
            let m = q.num_qubits();
            let (out, ph) = q.apply_to_basis(b).unwrap();
            let col = q.to_dense().unwrap() * basis(m, b);
            let expected = basis(m, out) * ph.to_complex();
            prop_assert!((col - expected).iter().all(|v| v.norm() <= 1e-12));
        }

        #[test]
        fn trace_orthogonality((a, b) in pair_strategy()) {
            let tr = (a.to_dense().unwrap() * b.to_dense().unwrap()).trace();
            let expected = if a == b { (1u64 << a.num_qubits()) as f64 } else { 0.0 };
            prop_assert!((tr - C64::new(expected, 0.0)).norm() <= 1e-12);
        }

        #[test]
        fn left_multiply_matches_dense(q in (1u32..=3).prop_flat_map(pauli_strategy), seed in any::<u64>()) {
            let dim = 1usize << q.num_qubits();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = DMatrix::from_fn(dim, 2, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let expected = q.to_dense().unwrap() * &mat;
            prop_assert!(close(&q.left_multiply(&mat), &expected, 1e-12));
            let u: Vec<C64> = mat.column(0).iter().copied().collect();
            let v: Vec<C64> = mat.column(1).iter().copied().collect();
            let direct = (mat.column(0).adjoint() * &expected.column(1))[(0, 0)];
            prop_assert!((q.matrix_element(&u, &v) - direct).norm() <= 1e-12);
        }
    }
}
