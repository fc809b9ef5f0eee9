//! Density matrices, ensembles and the ensemble statistics (pairwise
//! fidelity, largest eigenvalue) that feed the copy-count bounds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, checked_power_dim, ComplexMatrix, DEFAULT_DIM_CAP};

pub(crate) const STATE_TOL: f64 = 1e-10;
pub(crate) const PRIOR_SUM_TOL: f64 = 1e-12;
const FIDELITY_CLAMP: f64 = 1e-9;

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace, each within 1e-10.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: ||rho - rho^H||_F = {defect:.3e} exceeds {STATE_TOL:e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.12} + {:.3e}i differs from 1 by more than {STATE_TOL:e}",
                tr.re, tr.im
            )));
        }
        let min = linalg::herm_eig(&mat)?.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: minimum eigenvalue {min:.3e} below -{STATE_TOL:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Skips the spectral check for matrices that are density matrices by
    /// construction (tensor products, projections of valid states).
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        debug_assert!(mat.hermiticity_defect() <= 1e-8);
        Self { mat }
    }

    /// |ψ><ψ| for a nonzero vector ψ (normalized here).
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if psi.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("pure state vector must be nonzero and finite".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Ok(Self { mat: ComplexMatrix::outer(&v) })
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("dimension must be at least 1".into()));
        }
        Ok(Self { mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::herm_eig(&self.mat)?.eigenvalues)
    }

    /// Largest eigenvalue ||ρ||.
    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::herm_eig(&self.mat)?.max_eigenvalue())
    }
}

/// N states on a common space together with a prior distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if priors.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        if let Some((i, s)) = states.iter().enumerate().find(|(_, s)| s.dim() != dim) {
            return Err(Error::InvalidEnsemble(format!(
                "state {i} has dimension {}, expected {dim}",
                s.dim()
            )));
        }
        validate_priors(&priors)?;
        Ok(Self { states, priors })
    }

    /// Uniform priors over the given states.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len().max(1);
        Self::new(states, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn into_states(self) -> Vec<DensityMatrix> {
        self.states
    }
}

pub(crate) fn validate_priors(priors: &[f64]) -> Result<()> {
    if let Some((i, p)) = priors.iter().enumerate().find(|(_, p)| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::BadPriors(format!("prior {i} = {p} is not a finite nonnegative number")));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > PRIOR_SUM_TOL {
        return Err(Error::BadPriors(format!(
            "priors sum to {sum:.15}, which differs from 1 by more than {PRIOR_SUM_TOL:e}"
        )));
    }
    Ok(())
}

pub(crate) fn clamp_fidelity(f: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&f) {
        Ok(f)
    } else if (-FIDELITY_CLAMP..0.0).contains(&f) {
        Ok(0.0)
    } else if f > 1.0 && f <= 1.0 + FIDELITY_CLAMP {
        Ok(1.0)
    } else {
        Err(Error::NumericalFailure(format!("fidelity {f} outside [0, 1] beyond clamping tolerance")))
    }
}

/// F(ρ, σ) = ||√ρ √σ||₁², the squared convention.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let a = linalg::psd_sqrt(rho.matrix())?;
    let b = linalg::psd_sqrt(sigma.matrix())?;
    let t = linalg::trace_norm(&(&a * &b))?;
    clamp_fidelity(t * t)
}

/// max over i != j of F(ρ_i, ρ_j).
pub fn max_pairwise_fidelity(e: &Ensemble) -> Result<f64> {
    let n = e.len();
    if n < 2 {
        return Err(Error::TooFewStates { needed: 2, got: n });
    }
    let roots = e
        .states()
        .iter()
        .map(|s| linalg::psd_sqrt(s.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let t = linalg::trace_norm(&(&roots[i] * &roots[j]))?;
            best = best.max(clamp_fidelity(t * t)?);
        }
    }
    Ok(best)
}

/// λ = max_i ||ρ_i||.
pub fn max_eigenvalue(e: &Ensemble) -> Result<f64> {
    e.states().iter().try_fold(0.0f64, |acc, s| Ok(acc.max(s.max_eigenvalue()?)))
}

/// ρ^{⊗n}, refusing results with d^n above `DEFAULT_DIM_CAP`.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_capped(rho, n, DEFAULT_DIM_CAP)
}

pub fn tensor_power_capped(rho: &DensityMatrix, n: usize, cap: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("copy count must be at least 1".into()));
    }
    let dim = checked_power_dim(rho.dim(), n);
    if dim > cap as u128 {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let mut acc = rho.matrix().clone();
    for _ in 1..n {
        acc = linalg::kron_capped(&acc, rho.matrix(), cap)?;
    }
    Ok(DensityMatrix::from_trusted(acc))
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    // column-major fill order is part of the determinism contract
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Haar-random pure state, deterministic per seed.
pub fn random_pure_state(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(d, 1, &mut rng);
    DensityMatrix::pure(&g.column(0).into_owned())
}

/// G G^H / Tr(G G^H) for a d×rank complex Gaussian G, deterministic per seed.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::BadRank { rank, dim: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(d, rank, &mut rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let m = ComplexMatrix::new(w / Complex64::new(tr, 0.0))?;
    Ok(DensityMatrix::from_trusted(m.hermitian_part()))
}
