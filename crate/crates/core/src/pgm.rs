//! POVMs, the pretty good (square-root) measurement, success statistics,
//! the pairwise-fidelity lower bound on average success, and the exact
//! two-state Helstrom measurement used as an optimality oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, DEFAULT_KERNEL_TOL};
use crate::states::{self, DensityMatrix, Ensemble, PRIOR_SUM_TOL};

pub(crate) const POVM_TOL: f64 = 1e-8;

/// N positive operators on a common space summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    /// Checks positivity (min eigenvalue ≥ -1e-8) and completeness
    /// (||Σ M_i - I||_F ≤ 1e-8).
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, m) in elements.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has dimension {}, expected {dim}",
                    m.dim()
                )));
            }
            let min = linalg::herm_eig(m)
                .map_err(|e| Error::InvalidPovm(format!("element {i}: {e}")))?
                .min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has eigenvalue {min:.3e} below -{POVM_TOL:e}"
                )));
            }
            sum = &sum + m;
        }
        let defect = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if defect > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// {I/N, ..., I/N}.
    pub fn trivial(n: usize, dim: usize) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidPovm("need at least one element of dimension at least 1".into()));
        }
        Ok(Self { elements: vec![ComplexMatrix::identity(dim).scale(1.0 / n as f64); n] })
    }

    pub(crate) fn from_trusted(elements: Vec<ComplexMatrix>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Completeness defect ||Σ M_i - I||_F.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let sum = self.elements.iter().fold(ComplexMatrix::zeros(dim), |acc, m| &acc + m);
        (&sum - &ComplexMatrix::identity(dim)).frobenius_norm()
    }
}

/// Per-state and aggregate success probabilities of a measurement on an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessReport {
    pub per_state: Vec<f64>,
    pub average: f64,
    pub worst_case: f64,
    pub bk_bound: f64,
}

/// Pretty good measurement M_i = S^{-1/2} p_i ρ_i S^{-1/2} with S = Σ p_j ρ_j.
/// The part of the identity outside the support of S is split evenly over
/// all N outcomes so that the elements sum to I.
pub fn pgm(e: &Ensemble) -> Result<Povm> {
    if e.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let dim = e.dim();
    let n = e.len();
    let mut s = ComplexMatrix::zeros(dim);
    for (rho, &p) in e.states().iter().zip(e.priors()) {
        s = &s + &rho.matrix().scale(p);
    }
    let r = linalg::inv_sqrt_on_support(&s.hermitian_part(), DEFAULT_KERNEL_TOL)?;
    let mut elements: Vec<ComplexMatrix> = e
        .states()
        .iter()
        .zip(e.priors())
        .map(|(rho, &p)| (&(&r * &rho.matrix().scale(p)) * &r).hermitian_part())
        .collect();
    let covered = elements.iter().fold(ComplexMatrix::zeros(dim), |acc, m| &acc + m);
    let share = (&ComplexMatrix::identity(dim) - &covered).scale(1.0 / n as f64);
    for m in &mut elements {
        *m = (&*m + &share).hermitian_part();
    }
    Povm::new(elements)
}

fn check_compatible(e: &Ensemble, m: &Povm) -> Result<()> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch { left: e.dim(), right: m.dim() });
    }
    if e.len() != m.len() {
        return Err(Error::CountMismatch { states: e.len(), elements: m.len() });
    }
    Ok(())
}

/// Re Tr(ρ_i M_i) for each i.
pub fn per_state_success(e: &Ensemble, m: &Povm) -> Result<Vec<f64>> {
    check_compatible(e, m)?;
    Ok(e.states()
        .iter()
        .zip(m.elements())
        .map(|(rho, mi)| rho.matrix().trace_product_re(mi))
        .collect())
}

pub fn success_report(e: &Ensemble, m: &Povm) -> Result<SuccessReport> {
    let per_state = per_state_success(e, m)?;
    let average = per_state.iter().zip(e.priors()).map(|(s, p)| s * p).sum();
    let worst_case = per_state.iter().copied().fold(f64::INFINITY, f64::min);
    let bk_bound = bk_lower_bound(e)?;
    Ok(SuccessReport { per_state, average, worst_case, bk_bound })
}

/// 1 - Σ_{i≠j} √(p_i p_j) √F(ρ_i, ρ_j); unclamped, so it can be negative.
pub fn bk_lower_bound(e: &Ensemble) -> Result<f64> {
    let roots = e
        .states()
        .iter()
        .map(|s| linalg::psd_sqrt(s.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let p = e.priors();
    let mut off = 0.0;
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            if p[i] == 0.0 || p[j] == 0.0 {
                continue;
            }
            // ||√ρ_i √ρ_j||₁ is already √F
            let root_f = states::clamp_fidelity(linalg::trace_norm(&(&roots[i] * &roots[j]))?)?;
            off += 2.0 * (p[i] * p[j]).sqrt() * root_f;
        }
    }
    Ok(1.0 - off)
}

/// Optimal two-state measurement and its success probability.
#[derive(Clone, Debug)]
pub struct Helstrom {
    pub value: f64,
    pub povm: Povm,
}

/// Projector onto the positive part of p₀ρ₀ - p₁ρ₁ (outcome 0) and its
/// complement (outcome 1); value ½(1 + ||p₀ρ₀ - p₁ρ₁||₁).
pub fn helstrom(p0: f64, rho0: &DensityMatrix, p1: f64, rho1: &DensityMatrix) -> Result<Helstrom> {
    if !(p0 >= 0.0 && p1 >= 0.0) || (p0 + p1 - 1.0).abs() > PRIOR_SUM_TOL {
        return Err(Error::BadPriors(format!("p0 = {p0}, p1 = {p1} do not form a distribution")));
    }
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch { left: rho0.dim(), right: rho1.dim() });
    }
    let gamma = &rho0.matrix().scale(p0) - &rho1.matrix().scale(p1);
    let eig = linalg::herm_eig(&gamma)?;
    let cut = helstrom_tie_tol(eig.spectral_norm());
    let value = 0.5 * (1.0 + eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>());
    let m0 = eig.spectral_projector(|x| x > cut);
    let m1 = &ComplexMatrix::identity(rho0.dim()) - &m0;
    Ok(Helstrom { value, povm: Povm::from_trusted(vec![m0, m1.hermitian_part()]) })
}

/// Eigenvalues of the difference operator at or below this are ties.
pub(crate) fn helstrom_tie_tol(norm: f64) -> f64 {
    1e-13 * norm.max(1.0)
}
