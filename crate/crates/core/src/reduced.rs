//! Block-diagonal representation of an ensemble restricted to the joint
//! support of its states.
//!
//! Success probabilities, fidelities and the pretty good measurement are
//! invariant under isometric embedding, so all of them can be evaluated on
//! a compressed copy of the ensemble. Two compressions are used:
//!
//! * commuting ensembles are diagonalized into 1×1 blocks; the n-fold
//!   tensor power then only depends on the multiset of blocks chosen per
//!   copy, which collapses d^n outcomes into C(n+k-1, n) weighted blocks;
//! * otherwise the support is split along the eigenspaces of a generic
//!   element of the states' commutant, and subspaces carrying equivalent
//!   copies of the same action are kept once with a multiplicity (this is
//!   what makes group-symmetric ensembles such as coset states cheap);
//! * within a dense block, low-rank states are compressed through the Gram
//!   matrix of their factors, (F_i^H F_j)^{⊗n}, so n copies of N pure
//!   states never need more than N dimensions.
//!
//! Neither step changes any quantity computed downstream; the tests in
//! `tests/reduced_equivalence.rs` check this against explicit tensor powers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, checked_power_dim, ComplexMatrix, DEFAULT_KERNEL_TOL};
use crate::pgm::{helstrom_tie_tol, Povm};
use crate::states::{clamp_fidelity, DensityMatrix};

const COMMUTE_TOL: f64 = 1e-11;
const DIAGONAL_TOL: f64 = 1e-10;
const FACTOR_TOL: f64 = 1e-14;
const MERGE_TOL: f64 = 1e-10;
const ZERO_BLOCK_TOL: f64 = 1e-13;
const COMMUTANT_TOL: f64 = 1e-10;
const CLUSTER_TOL: f64 = 1e-6;
/// Largest support dimension for which the commutant is computed (the
/// linear system has dimension r²).
const ALGEBRA_MAX_DIM: usize = 24;

/// Per-state operators on one block, repeated `multiplicity` times.
#[derive(Clone, Debug)]
pub struct Block {
    multiplicity: f64,
    states: Vec<ComplexMatrix>,
}

impl Block {
    pub fn multiplicity(&self) -> f64 {
        self.multiplicity
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }
}

/// An ensemble's states as a weighted direct sum of blocks.
#[derive(Clone, Debug)]
pub struct ReducedEnsemble {
    n_states: usize,
    ambient_dim: u128,
    blocks: Vec<Block>,
}

/// Isometries placing each block of a freshly reduced ensemble back in
/// the original space.
#[derive(Clone, Debug)]
pub struct Embedding {
    ambient_dim: usize,
    /// One isometry per copy of each block.
    isometries: Vec<Vec<DMatrix<Complex64>>>,
}

/// POVM elements per block and per outcome.
#[derive(Clone, Debug)]
pub struct BlockPovm {
    blocks: Vec<Vec<ComplexMatrix>>,
}

impl BlockPovm {
    pub fn blocks(&self) -> &[Vec<ComplexMatrix>] {
        &self.blocks
    }

    pub(crate) fn zeros_like(red: &ReducedEnsemble) -> Self {
        Self {
            blocks: red
                .blocks
                .iter()
                .map(|b| vec![ComplexMatrix::zeros(b.dim()); red.n_states])
                .collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &BlockPovm) {
        for (mine, theirs) in self.blocks.iter_mut().zip(&other.blocks) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = &*a + b;
            }
        }
    }

    pub(crate) fn scaled(&self, s: f64) -> BlockPovm {
        BlockPovm {
            blocks: self.blocks.iter().map(|bl| bl.iter().map(|m| m.scale(s)).collect()).collect(),
        }
    }
}

impl ReducedEnsemble {
    /// Compresses `states` onto their joint support and splits it into
    /// invariant blocks where possible.
    pub fn from_states(states: &[DensityMatrix]) -> Result<(Self, Embedding)> {
        let first = states.first().ok_or(Error::EmptyEnsemble)?;
        let dim = first.dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: s.dim() });
        }
        let n = states.len();
        let mut s = ComplexMatrix::zeros(dim);
        for rho in states {
            s = &s + rho.matrix();
        }
        let eig = linalg::herm_eig(&s.scale(1.0 / n as f64))?;
        let cut = DEFAULT_KERNEL_TOL * eig.max_eigenvalue();
        let v = eig.eigenvector_columns(|x| x > cut);
        let reduced: Vec<ComplexMatrix> = states
            .iter()
            .map(|rho| ComplexMatrix::from_raw(v.adjoint() * rho.matrix().as_matrix() * &v).hermitian_part())
            .collect();

        let parts = match diagonalize_commuting(&reduced)? {
            Some(w) => diagonal_parts(&reduced, &w),
            None => match decompose_algebra(&reduced)? {
                Some(parts) => parts,
                None => vec![Part { states: reduced, copies: vec![DMatrix::identity(v.ncols(), v.ncols())] }],
            },
        };
        let mut blocks = Vec::with_capacity(parts.len());
        let mut isometries = Vec::with_capacity(parts.len());
        for p in parts {
            blocks.push(Block { multiplicity: p.copies.len() as f64, states: p.states });
            isometries.push(p.copies.iter().map(|w| &v * w).collect());
        }
        Ok((
            Self { n_states: n, ambient_dim: dim as u128, blocks },
            Embedding { ambient_dim: dim, isometries },
        ))
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Dimension of the space the ensemble originally lived in.
    pub fn ambient_dim(&self) -> u128 {
        self.ambient_dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Σ_b dim(b) without multiplicity, i.e. the working size.
    pub fn working_dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    /// The reduced form of the n-fold tensor powers ρ_i^{⊗n}. `dim_cap`
    /// bounds the ambient dimension d^n, not the (smaller) working size.
    pub fn tensor_power(&self, n: usize, dim_cap: usize) -> Result<ReducedEnsemble> {
        if n == 0 {
            return Err(Error::InvalidArgument("copy count must be at least 1".into()));
        }
        let mut ambient: u128 = 1;
        for _ in 0..n {
            ambient = ambient.saturating_mul(self.ambient_dim);
        }
        if ambient > dim_cap as u128 {
            return Err(Error::DimensionOverflow { dim: ambient, cap: dim_cap });
        }
        let factors: Vec<Vec<DMatrix<Complex64>>> = self
            .blocks
            .iter()
            .map(|b| b.states.iter().map(state_factor).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;

        let mut blocks = Vec::new();
        for counts in multisets(self.blocks.len(), n) {
            let seq: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(b, &c)| std::iter::repeat(b).take(c))
                .collect();
            let mut multiplicity = multinomial(n, &counts);
            for (b, &c) in counts.iter().enumerate() {
                multiplicity *= self.blocks[b].multiplicity.powi(c as i32);
            }
            let explicit_dim: usize = seq.iter().map(|&b| self.blocks[b].dim()).product();
            let gram_dim: usize = (0..self.n_states)
                .map(|i| seq.iter().map(|&b| factors[b][i].ncols()).product::<usize>())
                .sum();
            if gram_dim == 0 {
                // no state has weight on this product of blocks
                continue;
            }
            let states = if gram_dim < explicit_dim {
                gram_compress(&seq, &factors, self.n_states)?
            } else {
                (0..self.n_states)
                    .map(|i| {
                        seq.iter()
                            .skip(1)
                            .fold(self.blocks[seq[0]].states[i].clone(), |acc, &b| {
                                ComplexMatrix::from_raw(acc.as_matrix().kronecker(self.blocks[b].states[i].as_matrix()))
                            })
                    })
                    .collect()
            };
            blocks.push(Block { multiplicity, states });
        }
        Ok(ReducedEnsemble { n_states: self.n_states, ambient_dim: ambient, blocks })
    }

    fn check_priors(&self, priors: &[f64]) -> Result<()> {
        if priors.len() != self.n_states {
            return Err(Error::BadPriors(format!(
                "{} priors for {} states",
                priors.len(),
                self.n_states
            )));
        }
        crate::states::validate_priors(priors)
    }

    /// Block form of the pretty good measurement, with the same kernel
    /// threshold and residual rule as [`crate::pgm::pgm`].
    pub fn pgm(&self, priors: &[f64]) -> Result<BlockPovm> {
        self.check_priors(priors)?;
        let n = self.n_states as f64;
        let weighted: Vec<ComplexMatrix> = self
            .blocks
            .iter()
            .map(|b| {
                b.states
                    .iter()
                    .zip(priors)
                    .fold(ComplexMatrix::zeros(b.dim()), |acc, (rho, &p)| &acc + &rho.scale(p))
            })
            .collect();
        let eigs: Vec<Option<linalg::HermitianEigenSystem>> = weighted
            .iter()
            .map(|s| if s.dim() == 1 { Ok(None) } else { linalg::herm_eig(s).map(Some) })
            .collect::<Result<_>>()?;
        let lam_max = weighted
            .iter()
            .zip(&eigs)
            .map(|(s, e)| e.as_ref().map_or(s[(0, 0)].re, |e| e.max_eigenvalue()))
            .fold(0.0f64, f64::max);
        let cut = DEFAULT_KERNEL_TOL * lam_max;

        let mut out = Vec::with_capacity(self.blocks.len());
        for ((b, s), eig) in self.blocks.iter().zip(&weighted).zip(&eigs) {
            let elems = match eig {
                None => {
                    let total = s[(0, 0)].re;
                    b.states
                        .iter()
                        .zip(priors)
                        .map(|(rho, &p)| {
                            let m = if total > cut && total > 0.0 { p * rho[(0, 0)].re / total } else { 1.0 / n };
                            ComplexMatrix::from_real_diagonal(&[m])
                        })
                        .collect()
                }
                Some(eig) => {
                    let r = eig.map_eigenvalues(|x| if x > cut && x > 0.0 { x.sqrt().recip() } else { 0.0 });
                    let mut elems: Vec<ComplexMatrix> = b
                        .states
                        .iter()
                        .zip(priors)
                        .map(|(rho, &p)| (&(&r * &rho.scale(p)) * &r).hermitian_part())
                        .collect();
                    let covered = elems.iter().fold(ComplexMatrix::zeros(b.dim()), |acc, m| &acc + m);
                    let share = (&ComplexMatrix::identity(b.dim()) - &covered).scale(1.0 / n);
                    for m in &mut elems {
                        *m = (&*m + &share).hermitian_part();
                    }
                    elems
                }
            };
            out.push(elems);
        }
        Ok(BlockPovm { blocks: out })
    }

    /// Block form of the two-state Helstrom measurement.
    pub fn helstrom(&self, p0: f64, p1: f64) -> Result<BlockPovm> {
        if self.n_states != 2 {
            return Err(Error::InvalidArgument(format!(
                "Helstrom measurement needs exactly 2 states, got {}",
                self.n_states
            )));
        }
        self.check_priors(&[p0, p1])?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let gamma = &b.states[0].scale(p0) - &b.states[1].scale(p1);
                let m0 = if b.dim() == 1 {
                    let g = gamma[(0, 0)].re;
                    ComplexMatrix::from_real_diagonal(&[if g > helstrom_tie_tol(g.abs()) { 1.0 } else { 0.0 }])
                } else {
                    let eig = linalg::herm_eig(&gamma)?;
                    let cut = helstrom_tie_tol(eig.spectral_norm());
                    eig.spectral_projector(|x| x > cut)
                };
                let m1 = (&ComplexMatrix::identity(b.dim()) - &m0).hermitian_part();
                Ok(vec![m0, m1])
            })
            .collect::<Result<_>>()?;
        Ok(BlockPovm { blocks })
    }

    /// Tr(ρ_i M_i) for each outcome i, summed over blocks with multiplicity.
    pub fn success(&self, povm: &BlockPovm) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for (b, elems) in self.blocks.iter().zip(&povm.blocks) {
            for (i, (rho, m)) in b.states.iter().zip(elems).enumerate() {
                out[i] += b.multiplicity * rho.trace_product_re(m);
            }
        }
        out
    }

    /// F(ρ_i, ρ_j) = ||√ρ_i √ρ_j||₁², using that trace norms add over blocks.
    pub fn fidelity(&self, i: usize, j: usize) -> Result<f64> {
        let roots = self.block_roots()?;
        self.fidelity_from_roots(&roots, i, j)
    }

    fn block_roots(&self) -> Result<Vec<Vec<ComplexMatrix>>> {
        self.blocks
            .iter()
            .map(|b| b.states.iter().map(psd_sqrt_block).collect::<Result<Vec<_>>>())
            .collect()
    }

    fn fidelity_from_roots(&self, roots: &[Vec<ComplexMatrix>], i: usize, j: usize) -> Result<f64> {
        let mut root_f = 0.0;
        for (b, r) in self.blocks.iter().zip(roots) {
            let prod = &r[i] * &r[j];
            let tn = if prod.dim() == 1 { prod[(0, 0)].norm() } else { linalg::trace_norm(&prod)? };
            root_f += b.multiplicity * tn;
        }
        clamp_fidelity(root_f * root_f)
    }

    pub fn max_pairwise_fidelity(&self) -> Result<f64> {
        if self.n_states < 2 {
            return Err(Error::TooFewStates { needed: 2, got: self.n_states });
        }
        let roots = self.block_roots()?;
        let mut best = 0.0f64;
        for i in 0..self.n_states {
            for j in (i + 1)..self.n_states {
                best = best.max(self.fidelity_from_roots(&roots, i, j)?);
            }
        }
        Ok(best)
    }

    /// 1 - Σ_{i≠j} √(p_i p_j) √F(ρ_i, ρ_j).
    pub fn bk_lower_bound(&self, priors: &[f64]) -> Result<f64> {
        self.check_priors(priors)?;
        let roots = self.block_roots()?;
        let mut off = 0.0;
        for i in 0..self.n_states {
            for j in (i + 1)..self.n_states {
                if priors[i] == 0.0 || priors[j] == 0.0 {
                    continue;
                }
                let f = self.fidelity_from_roots(&roots, i, j)?;
                off += 2.0 * (priors[i] * priors[j]).sqrt() * f.sqrt();
            }
        }
        Ok(1.0 - off)
    }

    /// max_i ||ρ_i||.
    pub fn max_eigenvalue(&self) -> Result<f64> {
        let mut best = 0.0f64;
        for b in &self.blocks {
            for rho in &b.states {
                let top = if rho.dim() == 1 { rho[(0, 0)].re } else { linalg::herm_eig(rho)?.max_eigenvalue() };
                best = best.max(top);
            }
        }
        Ok(best)
    }

    /// Σ_b m_b Tr ρ_i^b, which is 1 for every state up to rounding.
    pub fn traces(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for b in &self.blocks {
            for (i, rho) in b.states.iter().enumerate() {
                out[i] += b.multiplicity * rho.trace().re;
            }
        }
        out
    }
}

impl Embedding {
    /// Places block elements back in the original space; the complement
    /// of the joint support is split evenly over all outcomes.
    pub fn lift(&self, povm: &BlockPovm, n_outcomes: usize) -> Result<Povm> {
        let d = self.ambient_dim;
        let mut covered = DMatrix::<Complex64>::zeros(d, d);
        for v in self.isometries.iter().flatten() {
            covered += v * v.adjoint();
        }
        let share = (DMatrix::identity(d, d) - covered) * Complex64::new(1.0 / n_outcomes as f64, 0.0);
        let mut elements = vec![share; n_outcomes];
        for (copies, elems) in self.isometries.iter().zip(&povm.blocks) {
            for v in copies {
                for (out, m) in elements.iter_mut().zip(elems) {
                    *out += v * m.as_matrix() * v.adjoint();
                }
            }
        }
        Povm::new(elements.into_iter().map(|m| ComplexMatrix::from_raw(m).hermitian_part()).collect())
    }
}

fn psd_sqrt_block(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() == 1 {
        return Ok(ComplexMatrix::from_real_diagonal(&[rho[(0, 0)].re.max(0.0).sqrt()]));
    }
    linalg::psd_sqrt(rho)
}

/// Returns a unitary diagonalizing every matrix when they pairwise commute.
fn diagonalize_commuting(mats: &[ComplexMatrix]) -> Result<Option<DMatrix<Complex64>>> {
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let comm = &(&mats[i] * &mats[j]) - &(&mats[j] * &mats[i]);
            if comm.frobenius_norm() > COMMUTE_TOL {
                return Ok(None);
            }
        }
    }
    // generic real combination; a coincidental degeneracy is caught below
    let dim = mats[0].dim();
    let mut c = ComplexMatrix::zeros(dim);
    for (i, m) in mats.iter().enumerate() {
        c = &c + &m.scale(1.0 / (i as f64 + std::f64::consts::E));
    }
    let w = linalg::herm_eig(&c)?.eigenvectors;
    for m in mats {
        let d = w.adjoint() * m.as_matrix() * &w;
        let off: f64 = d
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx % dim != idx / dim)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > DIAGONAL_TOL {
            return Ok(None);
        }
    }
    Ok(Some(w))
}

/// Block states plus the isometries (into the support) of each copy.
struct Part {
    states: Vec<ComplexMatrix>,
    copies: Vec<DMatrix<Complex64>>,
}

/// 1×1 blocks from a joint eigenbasis; basis vectors on which every state
/// takes the same values become copies of one block.
fn diagonal_parts(mats: &[ComplexMatrix], w: &DMatrix<Complex64>) -> Vec<Part> {
    let mut parts: Vec<(Vec<f64>, Part)> = Vec::new();
    for k in 0..w.ncols() {
        let col = w.column(k);
        let vals: Vec<f64> = mats.iter().map(|m| (col.adjoint() * m.as_matrix() * col)[(0, 0)].re).collect();
        let iso = w.columns(k, 1).into_owned();
        match parts.iter_mut().find(|(x, _)| x.iter().zip(&vals).all(|(a, b)| (a - b).abs() <= MERGE_TOL)) {
            Some((_, p)) => p.copies.push(iso),
            None => parts.push((
                vals.clone(),
                Part { states: vals.iter().map(|&x| ComplexMatrix::from_real_diagonal(&[x])).collect(), copies: vec![iso] },
            )),
        }
    }
    parts.into_iter().map(|(_, p)| p).collect()
}

/// Splits the space into subspaces invariant under every matrix, using the
/// eigenspaces of a generic Hermitian element of their commutant, and
/// identifies subspaces carrying equivalent copies. Returns `None` when the
/// matrices act irreducibly, the space is too large to attempt, or the
/// result fails to reproduce the input.
fn decompose_algebra(mats: &[ComplexMatrix]) -> Result<Option<Vec<Part>>> {
    let r = mats[0].dim();
    if r < 2 || r > ALGEBRA_MAX_DIM {
        return Ok(None);
    }
    // vec(Xρ − ρX) = (ρ^T ⊗ I − I ⊗ ρ) vec(X), column-major
    let id = DMatrix::<Complex64>::identity(r, r);
    let mut gram = DMatrix::<Complex64>::zeros(r * r, r * r);
    for m in mats {
        let k = m.as_matrix().transpose().kronecker(&id) - id.kronecker(m.as_matrix());
        gram += k.adjoint() * &k;
    }
    let eig = linalg::herm_eig(&ComplexMatrix::from_raw(gram).hermitian_part())?;
    let cut = COMMUTANT_TOL * eig.max_eigenvalue().max(f64::MIN_POSITIVE);
    let null: Vec<DMatrix<Complex64>> = (0..r * r)
        .filter(|&c| eig.eigenvalues[c] <= cut)
        .map(|c| DMatrix::from_column_slice(r, r, eig.eigenvectors.column(c).as_slice()))
        .collect();
    if null.len() <= 1 {
        return Ok(None);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut herm = DMatrix::<Complex64>::zeros(r, r);
    let mut mixer = DMatrix::<Complex64>::zeros(r, r);
    for x in &null {
        herm += (x + x.adjoint()) * Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        mixer += x * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let c = linalg::herm_eig(&ComplexMatrix::from_raw(herm).hermitian_part())?;
    let spread = (c.max_eigenvalue() - c.min_eigenvalue()).max(1.0);
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..r {
        if c.eigenvalues[k] - c.eigenvalues[k - 1] > CLUSTER_TOL * spread {
            clusters.push(Vec::new());
        }
        clusters.last_mut().expect("nonempty").push(k);
    }
    if clusters.len() == 1 {
        return Ok(None);
    }

    // a state with no weight on a subspace restricts to rounding noise
    let restrict = |w: &DMatrix<Complex64>| -> Vec<ComplexMatrix> {
        mats.iter()
            .map(|m| {
                let b = ComplexMatrix::from_raw(w.adjoint() * m.as_matrix() * w).hermitian_part();
                if b.frobenius_norm() <= ZERO_BLOCK_TOL {
                    ComplexMatrix::zeros(b.dim())
                } else {
                    b
                }
            })
            .collect()
    };
    let mut parts: Vec<Part> = Vec::new();
    let mut rebuilt = vec![DMatrix::<Complex64>::zeros(r, r); mats.len()];
    for cl in &clusters {
        let w = DMatrix::from_fn(r, cl.len(), |row, k| c.eigenvectors[(row, cl[k])]);
        let states = restrict(&w);
        for (acc, b) in rebuilt.iter_mut().zip(&states) {
            *acc += &w * b.as_matrix() * w.adjoint();
        }
        // T maps the representative's coordinates to this subspace's:
        // T B_rep = B_w T for every state, so T/√c is the change of basis
        let found = parts.iter_mut().find_map(|p| {
            if p.states[0].dim() != cl.len() {
                return None;
            }
            let t = w.adjoint() * &mixer * &p.copies[0];
            let scale = (t.adjoint() * &t).trace().re / cl.len() as f64;
            if !(scale > MERGE_TOL) {
                return None;
            }
            let u = t / Complex64::new(scale.sqrt(), 0.0);
            let unitary = (u.adjoint() * &u - DMatrix::<Complex64>::identity(cl.len(), cl.len())).norm() <= MERGE_TOL;
            let same = p
                .states
                .iter()
                .zip(&states)
                .all(|(a, b)| (&u * a.as_matrix() * u.adjoint() - b.as_matrix()).norm() <= MERGE_TOL);
            (unitary && same).then(|| (p, &w * u))
        });
        match found {
            Some((p, iso)) => p.copies.push(iso),
            None => parts.push(Part { states, copies: vec![w] }),
        }
    }
    for (m, acc) in mats.iter().zip(&rebuilt) {
        if (m.as_matrix() - acc).norm() > DIAGONAL_TOL {
            return Ok(None);
        }
    }
    Ok(Some(parts))
}

/// F with ρ = F F^H, dropping eigenvalues at or below 1e-14.
fn state_factor(rho: &ComplexMatrix) -> Result<DMatrix<Complex64>> {
    if rho.dim() == 1 {
        let x = rho[(0, 0)].re;
        return Ok(if x > FACTOR_TOL {
            DMatrix::from_element(1, 1, Complex64::new(x.sqrt(), 0.0))
        } else {
            DMatrix::zeros(1, 0)
        });
    }
    let eig = linalg::herm_eig(rho)?;
    let cols: Vec<usize> = (0..eig.dim()).filter(|&k| eig.eigenvalues[k] > FACTOR_TOL).collect();
    Ok(DMatrix::from_fn(eig.dim(), cols.len(), |r, k| {
        eig.eigenvectors[(r, cols[k])] * eig.eigenvalues[cols[k]].sqrt()
    }))
}

/// Compresses the block ⊗_l B_{seq[l]} onto the span of the tensor-product
/// factors of all states, using only the Gram matrix of those factors.
fn gram_compress(
    seq: &[usize],
    factors: &[Vec<DMatrix<Complex64>>],
    n_states: usize,
) -> Result<Vec<ComplexMatrix>> {
    let widths: Vec<usize> = (0..n_states)
        .map(|i| seq.iter().map(|&b| factors[b][i].ncols()).product())
        .collect();
    let offsets: Vec<usize> = widths
        .iter()
        .scan(0, |acc, &w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let k: usize = widths.iter().sum();
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..n_states {
        for j in 0..n_states {
            if widths[i] == 0 || widths[j] == 0 {
                continue;
            }
            let blk = seq
                .iter()
                .map(|&b| factors[b][i].adjoint() * &factors[b][j])
                .reduce(|acc, o| acc.kronecker(&o))
                .expect("copy count is at least 1");
            gram.view_mut((offsets[i], offsets[j]), (widths[i], widths[j])).copy_from(&blk);
        }
    }
    let eig = linalg::herm_eig(&ComplexMatrix::from_raw(gram.clone()).hermitian_part())?;
    let cut = DEFAULT_KERNEL_TOL * eig.max_eigenvalue();
    let keep: Vec<usize> = (0..k).filter(|&c| eig.eigenvalues[c] > cut).collect();
    if keep.is_empty() {
        return Err(Error::NumericalFailure("Gram matrix of tensor-power factors vanished".into()));
    }
    // rows of Λ^{-1/2} U^H
    let proj = DMatrix::from_fn(keep.len(), k, |r, c| {
        eig.eigenvectors[(c, keep[r])].conj() / eig.eigenvalues[keep[r]].sqrt()
    });
    (0..n_states)
        .map(|i| {
            let r = keep.len();
            if widths[i] == 0 {
                return Ok(ComplexMatrix::zeros(r));
            }
            let coords = &proj * gram.columns(offsets[i], widths[i]);
            Ok(ComplexMatrix::from_raw(&coords * coords.adjoint()).hermitian_part())
        })
        .collect()
}

/// All count vectors of length `k` summing to `n`, in lexicographic order
/// of the corresponding nondecreasing block sequences.
fn multisets(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == k - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c;
            rec(k, left - c, pos + 1, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(k, n, 0, &mut vec![0; k], &mut out);
    out
}

fn multinomial(n: usize, counts: &[usize]) -> f64 {
    let mut left = n;
    let mut acc = 1.0;
    for &c in counts {
        acc *= binomial(left, c);
        left -= c;
    }
    acc
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// d^n for reporting, saturating.
pub fn power_dim(d: usize, n: usize) -> u128 {
    checked_power_dim(d, n)
}
