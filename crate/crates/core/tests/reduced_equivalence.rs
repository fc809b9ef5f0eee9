//! The compressed representation must agree with explicit tensor powers.

use statedisc::linalg::ComplexMatrix;
use statedisc::pgm::{bk_lower_bound, helstrom, pgm, per_state_success};
use statedisc::reduced::ReducedEnsemble;
use statedisc::states::{
    max_eigenvalue, max_pairwise_fidelity, random_density, random_pure_state, tensor_power, DensityMatrix, Ensemble,
};

fn explicit(states: &[DensityMatrix], n: usize) -> Ensemble {
    Ensemble::uniform(states.iter().map(|s| tensor_power(s, n).unwrap()).collect()).unwrap()
}

fn check(states: &[DensityMatrix], n: usize, priors: &[f64]) {
    let (base, _) = ReducedEnsemble::from_states(states).unwrap();
    let red = base.tensor_power(n, 4096).unwrap();
    for t in red.traces() {
        assert!((t - 1.0).abs() < 1e-10, "trace {t}");
    }
    let full = explicit(states, n);
    let full = Ensemble::new(full.into_states(), priors.to_vec()).unwrap();

    let dense = per_state_success(&full, &pgm(&full).unwrap()).unwrap();
    let block = red.success(&red.pgm(priors).unwrap());
    for (a, b) in dense.iter().zip(&block) {
        assert!((a - b).abs() < 1e-9, "pgm success {a} vs {b}");
    }
    let (bkd, bkr) = (bk_lower_bound(&full).unwrap(), red.bk_lower_bound(priors).unwrap());
    assert!((bkd - bkr).abs() < 1e-9, "bk {bkd} vs {bkr} (n = {n})");
    if states.len() >= 2 {
        let f_dense = max_pairwise_fidelity(&full).unwrap();
        let f_block = red.max_pairwise_fidelity().unwrap();
        assert!((f_dense - f_block).abs() < 1e-9, "fidelity {f_dense} vs {f_block}");
    }
    assert!((max_eigenvalue(&full).unwrap() - red.max_eigenvalue().unwrap()).abs() < 1e-10);
    if states.len() == 2 {
        let h = helstrom(priors[0], &full.states()[0], priors[1], &full.states()[1]).unwrap();
        let s = red.success(&red.helstrom(priors[0], priors[1]).unwrap());
        let avg = priors[0] * s[0] + priors[1] * s[1];
        assert!((h.value - avg).abs() < 1e-9);
    }
}

#[test]
fn pure_states_use_gram_route() {
    for seed in 0..10 {
        let states: Vec<_> = (0..3).map(|k| random_pure_state(2, seed * 10 + k).unwrap()).collect();
        for n in 1..=4 {
            check(&states, n, &[0.2, 0.3, 0.5]);
        }
        let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
        assert!(base.tensor_power(10, 4096).unwrap().working_dim() <= 3);
    }
}

#[test]
fn mixed_states_match() {
    for seed in 0..6 {
        let states = vec![random_density(2, 2, seed).unwrap(), random_density(2, 1, seed + 100).unwrap()];
        for n in 1..=3 {
            check(&states, n, &[0.4, 0.6]);
        }
        let states: Vec<_> = (0..3).map(|k| random_density(3, 2, seed * 7 + k).unwrap()).collect();
        check(&states, 2, &[1.0 / 3.0; 3]);
    }
}

#[test]
fn commuting_states_split_into_blocks() {
    let a = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.5, 0.3, 0.2, 0.0])).unwrap();
    let b = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.1, 0.1, 0.4, 0.4])).unwrap();
    let c = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.25; 4])).unwrap();
    let states = vec![a, b, c];
    let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
    assert!(base.blocks().iter().all(|b| b.dim() == 1));
    for n in 1..=3 {
        check(&states, n, &[0.5, 0.25, 0.25]);
    }
    // 4^6 outcomes collapse to C(9, 3) = 84 types
    assert_eq!(base.tensor_power(6, 4096).unwrap().blocks().len(), 84);
}

#[test]
fn embedding_lifts_to_valid_povm() {
    let states: Vec<_> = (0..3).map(|k| random_pure_state(4, 40 + k).unwrap()).collect();
    let (red, emb) = ReducedEnsemble::from_states(&states).unwrap();
    assert!(red.working_dim() <= 3);
    let priors = [0.5, 0.25, 0.25];
    let bp = red.pgm(&priors).unwrap();
    let lifted = emb.lift(&bp, 3).unwrap();
    let full = Ensemble::new(states, priors.to_vec()).unwrap();
    let direct = pgm(&full).unwrap();
    let a = per_state_success(&full, &lifted).unwrap();
    let b = per_state_success(&full, &direct).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
    for (m, d) in lifted.elements().iter().zip(direct.elements()) {
        assert!((m - d).frobenius_norm() < 1e-8);
    }
}

#[test]
fn ambient_cap_is_enforced() {
    let states = vec![random_pure_state(2, 1).unwrap(), random_pure_state(2, 2).unwrap()];
    let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
    assert!(base.tensor_power(12, 4096).is_ok());
    assert!(base.tensor_power(13, 4096).is_err());
}

#[test]
fn fidelity_of_powers_is_multiplicative() {
    for seed in 0..6 {
        let states = vec![random_density(2, 2, seed).unwrap(), random_density(2, 1, seed + 100).unwrap()];
        let f1 = statedisc::states::fidelity(&states[0], &states[1]).unwrap();
        let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
        for n in 1..=3 {
            let fr = base.tensor_power(n, 4096).unwrap().fidelity(0, 1).unwrap();
            let fd = max_pairwise_fidelity(&explicit(&states, n)).unwrap();
            assert!((fr - f1.powi(n as i32)).abs() < 1e-12, "reduced {fr} vs {}", f1.powi(n as i32));
            assert!((fd - f1.powi(n as i32)).abs() < 1e-10, "dense {fd} vs {}", f1.powi(n as i32));
        }
    }
}

#[test]
fn symmetric_noncommuting_states_split_with_multiplicity() {
    use statedisc::hsp::{coset_state, dihedral_group, enumerate_subgroups};
    let g = dihedral_group(3).unwrap();
    let states: Vec<_> = enumerate_subgroups(&g).unwrap().iter().map(|h| coset_state(&g, h).unwrap()).collect();
    let (base, emb) = ReducedEnsemble::from_states(&states).unwrap();
    // trivial and sign characters once each, the 2-dimensional irrep twice
    let mut shape: Vec<(usize, f64)> = base.blocks().iter().map(|b| (b.dim(), b.multiplicity())).collect();
    shape.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(shape, vec![(1, 1.0), (1, 1.0), (2, 2.0)]);
    let priors = [0.1, 0.15, 0.15, 0.2, 0.2, 0.2];
    for n in 1..=3 {
        check(&states, n, &priors);
    }
    let full = Ensemble::new(states, priors.to_vec()).unwrap();
    let lifted = emb.lift(&base.pgm(&priors).unwrap(), 6).unwrap();
    let direct = pgm(&full).unwrap();
    for (m, d) in lifted.elements().iter().zip(direct.elements()) {
        assert!((m - d).frobenius_norm() < 1e-8);
    }
}

#[test]
fn random_invariant_ensembles_match() {
    // I_2 ⊗ A_i ⊕ B_i with random A_i, B_i, hidden by a random unitary
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    for seed in 0..4u64 {
        let a: Vec<_> = (0..3).map(|k| random_density(2, 2, 100 * seed + k).unwrap()).collect();
        let b: Vec<_> = (0..3).map(|k| random_density(2, 2, 100 * seed + 50 + k).unwrap()).collect();
        let u = {
            let psi = random_density(6, 6, 999 + seed).unwrap();
            statedisc::linalg::herm_eig(psi.matrix()).unwrap().eigenvectors
        };
        let states: Vec<_> = (0..3)
            .map(|i| {
                let mut m = DMatrix::<Complex64>::zeros(6, 6);
                let ai = a[i].matrix().as_matrix() * Complex64::new(0.3, 0.0);
                m.view_mut((0, 0), (2, 2)).copy_from(&ai);
                m.view_mut((2, 2), (2, 2)).copy_from(&ai);
                m.view_mut((4, 4), (2, 2)).copy_from(&(b[i].matrix().as_matrix() * Complex64::new(0.4, 0.0)));
                let rotated = &u * m * u.adjoint();
                DensityMatrix::new(ComplexMatrix::new(rotated).unwrap().hermitian_part()).unwrap()
            })
            .collect();
        let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
        assert!(base.working_dim() <= 4, "working dim {}", base.working_dim());
        for n in 1..=2 {
            check(&states, n, &[0.3, 0.3, 0.4]);
        }
    }
}

#[test]
fn disjoint_supports_drop_empty_products() {
    let a = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
    let b = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.0, 1.0])).unwrap();
    let states = vec![a, b];
    for n in 1..=4 {
        check(&states, n, &[0.5, 0.5]);
    }
    let (base, _) = ReducedEnsemble::from_states(&states).unwrap();
    assert_eq!(base.tensor_power(4, 4096).unwrap().blocks().len(), 2);
}
