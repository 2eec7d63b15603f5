//! Ground states of the spinless fermion chain
//! `H = -t Σ_j (c†_j c_{j+1} + h.c.) + U Σ_j n_j n_{j+1}` with open
//! boundaries, mapped to qubits by Jordan-Wigner (site `j` is qubit `j`,
//! occupied = `|1>`). Nearest-neighbour hopping carries no string sign on an
//! open chain, so every Hamiltonian block is a real symmetric matrix.
//!
//! The Hamiltonian conserves particle number. Each number sector is
//! diagonalized densely; the ground space is the set of eigenvectors within
//! `1e-9 · max(1, |E₀|)` of the lowest energy across the requested sectors.
//!
//! Tie-break for degenerate ground spaces: scan basis states in increasing
//! index order and return the normalized projection of the first one whose
//! overlap with the ground space exceeds `1e-6`. The result does not depend on
//! which eigenvectors the solver returned, and its amplitude on that basis
//! state is positive.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use super::StateVector;
use crate::error::{invalid, resource, Result};
use crate::C64;

pub const MAX_CHAIN_SITES: u32 = 14;

const DEGENERACY_TOL: f64 = 1e-9;
const OVERLAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
    /// Dimension of the ground space the state was selected from.
    pub degeneracy: usize,
    pub particle_number: usize,
}

/// Single-particle hopping matrix `h_{j,j+1} = h_{j+1,j} = -t`.
pub fn hopping_matrix(sites: usize, t: f64) -> DMatrix<f64> {
    DMatrix::from_fn(sites, sites, |i, j| if i.abs_diff(j) == 1 { -t } else { 0.0 })
}

struct Sector {
    states: Vec<u64>,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
}

fn sector_hamiltonian(sites: u32, t: f64, u_int: f64, states: &[u64]) -> DMatrix<f64> {
    let n = states.len();
    let mut h = DMatrix::zeros(n, n);
    for (col, &s) in states.iter().enumerate() {
        for j in 0..sites - 1 {
            let bj = sites - 1 - j;
            let bk = bj - 1;
            let (nj, nk) = ((s >> bj) & 1, (s >> bk) & 1);
            h[(col, col)] += u_int * (nj * nk) as f64;
            if nj != nk {
                let s2 = s ^ (1 << bj) ^ (1 << bk);
                let row = states.binary_search(&s2).expect("hopping preserves particle number");
                h[(row, col)] += -t;
            }
        }
    }
    h
}

/// Ground state on `sites` qubits split as `n_a | sites - n_a`.
///
/// `filling` restricts the search to one particle-number sector; `None`
/// searches every sector.
pub fn fermion_chain_ground_state(
    sites: u32,
    t: f64,
    u_int: f64,
    n_a: u32,
    filling: Option<usize>,
) -> Result<GroundState> {
    if sites > MAX_CHAIN_SITES {
        return Err(resource!("chain of {sites} sites exceeds the {MAX_CHAIN_SITES}-site limit"));
    }
    if sites < 2 || n_a == 0 || n_a >= sites {
        return Err(invalid!("need at least 2 sites and a proper bipartition (got L={sites}, n_A={n_a})"));
    }
    if !t.is_finite() || !u_int.is_finite() {
        return Err(invalid!("non-finite Hamiltonian parameters"));
    }
    let fillings: Vec<usize> = match filling {
        Some(f) if f > sites as usize => return Err(invalid!("filling {f} exceeds {sites} sites")),
        Some(f) => alloc::vec![f],
        None => (0..=sites as usize).collect(),
    };
    let dim = 1u64 << sites;
    let sectors: Vec<(usize, Sector)> = fillings
        .iter()
        .map(|&f| {
            let states: Vec<u64> = (0..dim).filter(|s| s.count_ones() as usize == f).collect();
            let h = sector_hamiltonian(sites, t, u_int, &states);
            (f, Sector { states, eigen: h.symmetric_eigen() })
        })
        .collect();

    let e0 = sectors
        .iter()
        .flat_map(|(_, s)| s.eigen.eigenvalues.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let tol = DEGENERACY_TOL * e0.abs().max(1.0);
    let ground_cols = |s: &Sector| -> Vec<usize> {
        (0..s.eigen.eigenvalues.len()).filter(|&k| s.eigen.eigenvalues[k] <= e0 + tol).collect()
    };
    let degeneracy: usize = sectors.iter().map(|(_, s)| ground_cols(s).len()).sum();

    for index in 0..dim {
        let f = index.count_ones() as usize;
        let Some((_, sector)) = sectors.iter().find(|(g, _)| *g == f) else {
            continue;
        };
        let cols = ground_cols(sector);
        if cols.is_empty() {
            continue;
        }
        let row = sector.states.binary_search(&index).expect("index belongs to its sector");
        let overlap: f64 = cols.iter().map(|&k| sector.eigen.eigenvectors[(row, k)].powi(2)).sum();
        if overlap.sqrt() <= OVERLAP_TOL {
            continue;
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); dim as usize];
        for (r, &s) in sector.states.iter().enumerate() {
            let v: f64 = cols
                .iter()
                .map(|&k| sector.eigen.eigenvectors[(row, k)] * sector.eigen.eigenvectors[(r, k)])
                .sum();
            amps[s as usize] = C64::new(v, 0.0);
        }
        let state = StateVector::normalized(amps, n_a, sites - n_a)?;
        return Ok(GroundState { state, energy: e0, degeneracy, particle_number: f });
    }
    unreachable!("a nonempty ground space overlaps some basis state")
}
