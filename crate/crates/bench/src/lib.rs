//! Fixed inputs shared by the benchmarks.

use statedisc::hsp::{coset_state, dihedral_group, enumerate_subgroups};
use statedisc::states::{random_density, random_pure_state, DensityMatrix, Ensemble};

/// `n` seeded mixed states of full rank in dimension `d`, uniform priors.
pub fn mixed_ensemble(n: usize, d: usize) -> Ensemble {
    let states = (0..n as u64).map(|k| random_density(d, d, 7 + k).unwrap()).collect();
    Ensemble::uniform(states).unwrap()
}

/// `n` seeded pure qubit states.
pub fn pure_qubits(n: usize) -> Vec<DensityMatrix> {
    (0..n as u64).map(|k| random_pure_state(2, 11 + k).unwrap()).collect()
}

/// Coset states of every subgroup of the dihedral group of order 2m.
pub fn dihedral_cosets(m: usize) -> Vec<DensityMatrix> {
    let g = dihedral_group(m).unwrap();
    enumerate_subgroups(&g).unwrap().iter().map(|h| coset_state(&g, h).unwrap()).collect()
}
