//! Copy-count bounds and the numeric minimal-copies search that checks them.
//!
//! Sufficient copies (pairwise fidelity at most F, N states, worst-case
//! error ε):
//!
//! ```text
//! n ≥ 2 (log N − log ε) / (−log F)
//! ```
//!
//! Necessary copies for success probability η, with λ the largest
//! eigenvalue over the ensemble and d the dimension:
//!
//! ```text
//! n ≥ (log N + log η) / log(λ d)
//! ```
//!
//! Both are ratios of logarithms, so the base does not matter; natural logs
//! are used and the result is rounded up to an integer.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{checked_power_dim, DEFAULT_DIM_CAP};
use crate::minimax::{solve_reduced, MinimaxConfig};
use crate::reduced::ReducedEnsemble;
use crate::states::DensityMatrix;

/// An integer copy count, or the statement that the formula gives none.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopyBound {
    Finite(u64),
    /// The formula degenerates (denominator zero or fidelity 1).
    NoFiniteBound,
}

impl CopyBound {
    pub fn finite(self) -> Option<u64> {
        match self {
            CopyBound::Finite(n) => Some(n),
            CopyBound::NoFiniteBound => None,
        }
    }
}

impl fmt::Display for CopyBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopyBound::Finite(n) => write!(f, "{n}"),
            CopyBound::NoFiniteBound => f.write_str("no finite bound"),
        }
    }
}

impl Serialize for CopyBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CopyBound::Finite(n) => s.serialize_u64(*n),
            CopyBound::NoFiniteBound => s.serialize_str("no finite bound"),
        }
    }
}

/// Ceiling that ignores rounding noise just above an integer.
fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn check_count(n_states: usize) -> Result<()> {
    if n_states < 2 {
        return Err(Error::TooFewStates { needed: 2, got: n_states });
    }
    Ok(())
}

/// ⌈2 (ln N − ln ε) / (−ln F)⌉, at least 1.
pub fn copies_upper(n_states: usize, fidelity: f64, epsilon: f64) -> Result<u64> {
    check_count(n_states)?;
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::BadFidelity(fidelity));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let x = 2.0 * ((n_states as f64).ln() - epsilon.ln()) / -fidelity.ln();
    Ok(ceil_tolerant(x).max(1.0) as u64)
}

/// [`copies_upper`] extended to measured fidelities at the ends of [0, 1]:
/// orthogonal states (F = 0) need one copy, F = 1 admits no finite count.
pub fn upper_prediction(n_states: usize, fidelity: f64, epsilon: f64) -> Result<CopyBound> {
    check_count(n_states)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    if fidelity <= 0.0 {
        Ok(CopyBound::Finite(1))
    } else if fidelity >= 1.0 {
        Ok(CopyBound::NoFiniteBound)
    } else {
        copies_upper(n_states, fidelity, epsilon).map(CopyBound::Finite)
    }
}

/// ⌈(ln N + ln η) / ln(λ d)⌉ clamped at 0; no finite bound when λ d ≤ 1.
pub fn copies_lower(n_states: usize, eta: f64, lambda: f64, dim: usize) -> Result<CopyBound> {
    check_count(n_states)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::BadEta(eta));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let lo = 1.0 / dim as f64 - 1e-12;
    if !(lambda >= lo && lambda <= 1.0 + 1e-12) {
        return Err(Error::BadLambda { lambda, dim });
    }
    let ld = lambda * dim as f64;
    if ld <= 1.0 + 1e-12 {
        return Ok(CopyBound::NoFiniteBound);
    }
    let x = ((n_states as f64).ln() + eta.ln()) / ld.ln();
    Ok(CopyBound::Finite(ceil_tolerant(x).max(0.0) as u64))
}

/// 1 − N F^{n/2}, unclamped.
pub fn bk_success_at(n_states: usize, fidelity: f64, n: u32) -> f64 {
    1.0 - n_states as f64 * fidelity.powf(n as f64 / 2.0)
}

/// Both copy-count bounds with their inputs. Any bound whose inputs are
/// missing is omitted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n_states: Option<usize>,
    pub fidelity: Option<f64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub dim: Option<usize>,
    pub n_upper: Option<CopyBound>,
    pub n_lower: Option<CopyBound>,
}

impl BoundReport {
    pub fn compute(
        n_states: Option<usize>,
        fidelity: Option<f64>,
        epsilon: Option<f64>,
        eta: Option<f64>,
        lambda: Option<f64>,
        dim: Option<usize>,
    ) -> Result<Self> {
        let n_upper = match (n_states, fidelity, epsilon) {
            (Some(n), Some(f), Some(e)) => Some(copies_upper(n, f, e).map(CopyBound::Finite)?),
            _ => None,
        };
        let n_lower = match (n_states, eta, lambda, dim) {
            (Some(n), Some(h), Some(l), Some(d)) => Some(copies_lower(n, h, l, d)?),
            _ => None,
        };
        Ok(Self { n_states, fidelity, epsilon, eta, lambda, dim, n_upper, n_lower })
    }
}

/// How worst-case success at n copies is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    /// Pretty good measurement for uniform priors.
    PgmWorstCase,
    /// Minimax solver primal value.
    Minimax,
}

impl SearchMethod {
    pub fn label(self) -> &'static str {
        match self {
            SearchMethod::PgmWorstCase => "pgm",
            SearchMethod::Minimax => "minimax",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub dim_cap: usize,
    pub minimax: MinimaxConfig,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { dim_cap: DEFAULT_DIM_CAP, minimax: MinimaxConfig::default() }
    }
}

/// Success statistics at one copy count, all under uniform priors.
#[derive(Clone, Debug, PartialEq)]
pub struct CopyEvaluation {
    pub n: usize,
    pub worst_case: f64,
    pub average: f64,
    pub bk_bound: f64,
}

/// Evaluates n copies of an already reduced ensemble.
pub fn evaluate_copies(
    base: &ReducedEnsemble,
    n: usize,
    method: SearchMethod,
    opts: &SearchOptions,
) -> Result<CopyEvaluation> {
    let red = base.tensor_power(n, opts.dim_cap)?;
    let k = red.n_states();
    let uniform = vec![1.0 / k as f64; k];
    let bk_bound = red.bk_lower_bound(&uniform)?;
    let (worst_case, average) = match method {
        SearchMethod::PgmWorstCase => {
            let s = red.success(&red.pgm(&uniform)?);
            let worst = s.iter().copied().fold(f64::INFINITY, f64::min);
            (worst, s.iter().sum::<f64>() / k as f64)
        }
        SearchMethod::Minimax => {
            let r = solve_reduced(&red, &opts.minimax)?;
            (r.primal_value, r.average())
        }
    };
    Ok(CopyEvaluation { n, worst_case, average, bk_bound })
}

fn check_search_dims(states: &[DensityMatrix], n_max: usize, opts: &SearchOptions) -> Result<()> {
    let d = states.first().ok_or(Error::EmptyEnsemble)?.dim();
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let dim = checked_power_dim(d, n_max);
    if dim > opts.dim_cap as u128 {
        return Err(Error::DimensionOverflow { dim, cap: opts.dim_cap });
    }
    Ok(())
}

/// Evaluations for n = 1..=n_max.
pub fn sweep(
    states: &[DensityMatrix],
    n_max: usize,
    method: SearchMethod,
    opts: &SearchOptions,
) -> Result<Vec<CopyEvaluation>> {
    check_search_dims(states, n_max, opts)?;
    let (base, _) = ReducedEnsemble::from_states(states)?;
    (1..=n_max).map(|n| evaluate_copies(&base, n, method, opts)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(usize),
    ExceedsNMax,
}

impl fmt::Display for SearchOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchOutcome::Found(n) => write!(f, "{n}"),
            SearchOutcome::ExceedsNMax => f.write_str("exceeds n_max"),
        }
    }
}

/// First n ≤ n_max whose worst-case success reaches 1 − ε.
pub fn min_copies_search(
    states: &[DensityMatrix],
    epsilon: f64,
    method: SearchMethod,
    n_max: usize,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    check_search_dims(states, n_max, opts)?;
    let (base, _) = ReducedEnsemble::from_states(states)?;
    first_success(&base, epsilon, method, n_max, opts)
}

/// [`min_copies_search`] on an already reduced ensemble.
pub fn first_success(
    base: &ReducedEnsemble,
    epsilon: f64,
    method: SearchMethod,
    n_max: usize,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    for n in 1..=n_max {
        if evaluate_copies(base, n, method, opts)?.worst_case >= 1.0 - epsilon {
            return Ok(SearchOutcome::Found(n));
        }
    }
    Ok(SearchOutcome::ExceedsNMax)
}
