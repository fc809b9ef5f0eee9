use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statedisc::linalg::ComplexMatrix;
use statedisc::pgm::{bk_lower_bound, helstrom, pgm, success_report};
use statedisc::states::{random_density, DensityMatrix, Ensemble};

fn random_priors(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn random_ensemble(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Ensemble {
    let states = (0..n)
        .map(|_| random_density(d, rng.random_range(1..=d), rng.random()).unwrap())
        .collect();
    Ensemble::new(states, random_priors(n, rng)).unwrap()
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    g.qr().q()
}

#[test]
fn pgm_dominates_bk_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..300 {
        let n = rng.random_range(2..=5);
        let d = rng.random_range(2..=4);
        let e = random_ensemble(&mut rng, n, d);
        let m = pgm(&e).unwrap();
        let r = success_report(&e, &m).unwrap();
        assert!(r.average >= bk_lower_bound(&e).unwrap() - 1e-9);
        assert!(r.worst_case <= r.average + 1e-12);
        assert!(r.per_state.iter().all(|&s| (-1e-8..=1.0 + 1e-8).contains(&s)));
    }
}

#[test]
fn pgm_error_at_most_twice_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let d = rng.random_range(2..=4);
        let e = random_ensemble(&mut rng, 2, d);
        let avg = success_report(&e, &pgm(&e).unwrap()).unwrap().average;
        let p = e.priors();
        let h = helstrom(p[0], &e.states()[0], p[1], &e.states()[1]).unwrap();
        assert!(1.0 - avg <= 2.0 * (1.0 - h.value) + 1e-9);
        assert!(avg <= h.value + 1e-9);
    }
}

#[test]
fn pgm_is_unitarily_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(2..=4);
        let d = rng.random_range(2..=4);
        let e = random_ensemble(&mut rng, n, d);
        let u = random_unitary(d, &mut rng);
        let conj = |m: &ComplexMatrix| ComplexMatrix::new(&u * m.as_matrix() * u.adjoint()).unwrap();
        let rotated = Ensemble::new(
            e.states()
                .iter()
                .map(|s| DensityMatrix::new(conj(s.matrix()).hermitian_part()).unwrap())
                .collect(),
            e.priors().to_vec(),
        )
        .unwrap();
        let m = pgm(&e).unwrap();
        let mr = pgm(&rotated).unwrap();
        for (a, b) in m.elements().iter().zip(mr.elements()) {
            assert!((&conj(a) - b).frobenius_norm() <= 1e-8);
        }
        let r = success_report(&e, &m).unwrap();
        let rr = success_report(&rotated, &mr).unwrap();
        for (a, b) in r.per_state.iter().zip(&rr.per_state) {
            assert!((a - b).abs() <= 1e-8);
        }
    }
}
