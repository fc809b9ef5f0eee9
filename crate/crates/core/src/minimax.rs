//! A single measurement with a certified worst-case success probability.
//!
//! The prior player runs multiplicative weights over the simplex against a
//! measurement player that best-responds with the pretty good measurement
//! (or the exact Helstrom measurement for two states). The time-averaged
//! measurement is the primal candidate; its worst-case success is a lower
//! bound on the game value. The dual certificate is the smallest average
//! success any visited prior concedes to the best measurement known for it.

use crate::error::{Error, Result};
use crate::linalg::DEFAULT_DIM_CAP;
use crate::pgm::Povm;
use crate::reduced::{BlockPovm, ReducedEnsemble};
use crate::states::{tensor_power_capped, DensityMatrix};

const PRIOR_FLOOR: f64 = 1e-300;

/// Inner maximizer used at each step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BestResponse {
    #[default]
    Pgm,
    /// Exact Helstrom measurement when there are two states, PGM otherwise.
    HelstromIfN2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxConfig {
    pub max_iters: usize,
    /// Duality-gap target; the solver stops as soon as it is met.
    pub tol: f64,
    pub best_response: BestResponse,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        Self { max_iters: 2000, tol: 1e-3, best_response: BestResponse::Pgm }
    }
}

impl MinimaxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MinimaxResult {
    pub povm: Povm,
    pub primal_value: f64,
    pub dual_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MinimaxResult {
    pub fn gap(&self) -> f64 {
        self.dual_value - self.primal_value
    }
}

/// Solver output on a reduced ensemble, before any lifting.
#[derive(Clone, Debug)]
pub struct ReducedMinimax {
    pub povm: BlockPovm,
    /// Success of the returned measurement on each state.
    pub per_state: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ReducedMinimax {
    pub fn gap(&self) -> f64 {
        self.dual_value - self.primal_value
    }

    /// Uniform-prior average success of the returned measurement.
    pub fn average(&self) -> f64 {
        self.per_state.iter().sum::<f64>() / self.per_state.len() as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn best_response(red: &ReducedEnsemble, priors: &[f64], kind: BestResponse) -> Result<BlockPovm> {
    match kind {
        BestResponse::HelstromIfN2 if red.n_states() == 2 => red.helstrom(priors[0], priors[1]),
        _ => red.pgm(priors),
    }
}

struct Best {
    primal: f64,
    per_state: Vec<f64>,
    povm: BlockPovm,
}

/// Multiplicative weights on a reduced ensemble.
pub fn solve_reduced(red: &ReducedEnsemble, cfg: &MinimaxConfig) -> Result<ReducedMinimax> {
    cfg.validate()?;
    let n = red.n_states();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let eta = (8.0 * (n as f64).ln() / cfg.max_iters as f64).sqrt();

    let mut priors = vec![1.0 / n as f64; n];
    let mut cumulative = vec![0.0; n];
    let mut povm_sum = BlockPovm::zeros_like(red);
    // (prior, its best-response average success) per iteration
    let mut history: Vec<(Vec<f64>, f64)> = Vec::with_capacity(cfg.max_iters);
    let mut best: Option<Best> = None;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=cfg.max_iters {
        let m = best_response(red, &priors, cfg.best_response)?;
        let payoff = red.success(&m);
        let conceded = dot(&priors, &payoff);
        povm_sum.add_assign(&m);
        for (c, g) in cumulative.iter_mut().zip(&payoff) {
            *c += g;
        }
        history.push((priors.clone(), conceded));
        iterations = t;

        let averaged: Vec<f64> = cumulative.iter().map(|c| c / t as f64).collect();
        let primal = averaged.iter().copied().fold(f64::INFINITY, f64::min);
        let improved = best.as_ref().map_or(true, |b| primal > b.primal);
        if improved {
            let b = Best { primal, per_state: averaged, povm: povm_sum.scaled(1.0 / t as f64) };
            // the returned measurement is also a response to every visited prior
            dual = history
                .iter()
                .map(|(p, a)| a.max(dot(p, &b.per_state)))
                .fold(f64::INFINITY, f64::min);
            best = Some(b);
        } else {
            let b = best.as_ref().expect("set on the first iteration");
            dual = dual.min(conceded.max(dot(&priors, &b.per_state)));
        }

        let b = best.as_ref().expect("set on the first iteration");
        if dual - b.primal <= cfg.tol {
            converged = true;
            break;
        }

        for (p, g) in priors.iter_mut().zip(&payoff) {
            *p = (*p * (-eta * g).exp()).max(PRIOR_FLOOR);
        }
        let z: f64 = priors.iter().sum();
        for p in &mut priors {
            *p /= z;
        }
    }

    let b = best.expect("max_iters is at least 1");
    Ok(ReducedMinimax {
        povm: b.povm,
        per_state: b.per_state,
        primal_value: b.primal,
        dual_value: dual,
        iterations,
        converged,
    })
}

/// Worst-case optimal measurement for `states` (prior-free), with certificates.
pub fn solve_minimax(states: &[DensityMatrix], cfg: &MinimaxConfig) -> Result<MinimaxResult> {
    let (red, embedding) = ReducedEnsemble::from_states(states)?;
    let r = solve_reduced(&red, cfg)?;
    let povm = embedding.lift(&r.povm, states.len())?;
    Ok(MinimaxResult {
        povm,
        primal_value: r.primal_value,
        dual_value: r.dual_value,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// Whether a single measurement on n copies reaches success ≥ 1 - ε on
/// every state. Builds the tensor powers explicitly.
pub fn worst_case_povm_exists(
    states: &[DensityMatrix],
    epsilon: f64,
    n: usize,
    cfg: &MinimaxConfig,
) -> Result<(bool, MinimaxResult)> {
    worst_case_povm_exists_capped(states, epsilon, n, cfg, DEFAULT_DIM_CAP)
}

pub fn worst_case_povm_exists_capped(
    states: &[DensityMatrix],
    epsilon: f64,
    n: usize,
    cfg: &MinimaxConfig,
    dim_cap: usize,
) -> Result<(bool, MinimaxResult)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let powers = states
        .iter()
        .map(|s| tensor_power_capped(s, n, dim_cap))
        .collect::<Result<Vec<_>>>()?;
    let r = solve_minimax(&powers, cfg)?;
    Ok((r.primal_value >= 1.0 - epsilon, r))
}
