use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schmidt_core::certify::{certified_lower_bound, sector_rank_oracle, sector_rank_oracle_for_basis};
use schmidt_core::{
    build_projected_cm, certify, numerical_rank, sample_pauli_set, singular_spectrum, CertifyConfig, DMatrix,
    NoiseModel, PauliSet, Rotation, StateVector, C64,
};

fn random_spectrum(chi: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..chi).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// `Σ_a √λ_a |a>|a>` over the support set.
fn computational_state(support: &[u64], spectrum: &[f64], m: u32) -> (StateVector, DMatrix<C64>) {
    let d = 1usize << m;
    let basis = DMatrix::from_fn(d, support.len(), |r, c| {
        if r as u64 == support[c] {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (StateVector::with_schmidt_form(spectrum, &basis, &basis, m, m).unwrap(), basis)
}

fn exact_rank(psi: &StateVector, set: &PauliSet) -> usize {
    let cm = build_projected_cm(psi, set, NoiseModel::Exact, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    numerical_rank(&singular_spectrum(&cm.entries).unwrap(), 1e-9)
}

/// Brickwork needs at least two qubits per side.
fn rotation_from(tag: u8, m: u32) -> Rotation {
    match tag % 3 {
        0 => Rotation::None,
        2 if m >= 2 => Rotation::Brickwork { depth: 2 },
        _ => Rotation::Haar,
    }
}

#[test]
fn sector_oracle_matches_brute_force_on_100_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    for instance in 0..100 {
        let m = 1 + instance % 3;
        let d = 1u64 << m;
        let chi = rng.random_range(1..=d as usize);
        let mut pool: Vec<u64> = (0..d).collect();
        let mut support = Vec::new();
        for _ in 0..chi {
            support.push(pool.swap_remove(rng.random_range(0..pool.len())));
        }
        let spectrum = random_spectrum(chi, &mut rng);
        let k = rng.random_range(1..=2 * (d * d) as usize);
        let set = sample_pauli_set(m as u32, k, &mut rng).unwrap();
        let (psi, basis) = computational_state(&support, &spectrum, m as u32);
        let brute = exact_rank(&psi, &set);
        let oracle = sector_rank_oracle(&support, &set).unwrap();
        assert_eq!(oracle, sector_rank_oracle_for_basis(&basis, &set).unwrap());
        if brute != oracle {
            mismatches.push((instance, support.clone(), brute, oracle));
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_mode_is_sound(m in 1u32..=3, seed in any::<u64>(), k in 0usize..80, tag in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = rng.random_range(1..=1usize << m);
        let spectrum = random_spectrum(chi, &mut rng);
        let psi = StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap();
        let cfg = CertifyConfig { k, rotation: rotation_from(tag, m), noise: NoiseModel::Exact, threshold: None };
        let report = certify(&psi, &cfg, &mut rng).unwrap();
        prop_assert!(report.rank <= chi * chi);
        prop_assert!(report.certified_chi <= chi);
        prop_assert_eq!(report.certified_chi, certified_lower_bound(report.rank));
        prop_assert!(report.validate().is_ok());
    }

    #[test]
    fn rotation_preserves_the_schmidt_number(m in 1u32..=4, seed in any::<u64>(), tag in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = rng.random_range(1..=1usize << m);
        let spectrum = random_spectrum(chi, &mut rng);
        let psi = StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap();
        let rotated = schmidt_core::certify::rotate(&psi, rotation_from(tag, m), &mut rng).unwrap();
        let before = psi.schmidt_decompose(1e-7);
        let after = rotated.schmidt_decompose(1e-7);
        prop_assert_eq!(before.rank(), chi);
        prop_assert_eq!(after.rank(), chi);
        for (x, y) in before.coefficients.iter().zip(&after.coefficients) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn enlarging_the_set_never_lowers_rank(m in 1u32..=3, seed in any::<u64>(), computational in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1usize << m;
        let chi = rng.random_range(1..=d);
        let spectrum = random_spectrum(chi, &mut rng);
        let psi = if computational {
            let support: Vec<u64> = (0..chi as u64).collect();
            computational_state(&support, &spectrum, m).0
        } else {
            StateVector::random_schmidt_state(&spectrum, m, m, &mut rng).unwrap()
        };
        let big = sample_pauli_set(m, 3 * d * d, &mut rng).unwrap();
        let mut last = 0;
        for size in 0..=big.distinct() {
            let sub = PauliSet::from_members(m, big.members()[..size].iter().copied()).unwrap();
            let rank = exact_rank(&psi, &sub);
            prop_assert!(rank >= last);
            last = rank;
        }
    }

    #[test]
    fn sector_oracle_agrees_with_direct_rank(m in 1u32..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1u64 << m;
        let support: Vec<u64> = (0..d).filter(|_| rng.random::<bool>()).collect();
        prop_assume!(!support.is_empty());
        let spectrum = random_spectrum(support.len(), &mut rng);
        let set = sample_pauli_set(m, rng.random_range(1..=(d * d) as usize), &mut rng).unwrap();
        let (psi, _) = computational_state(&support, &spectrum, m);
        prop_assert_eq!(sector_rank_oracle(&support, &set).unwrap(), exact_rank(&psi, &set));
    }
}
