//! Subcommand logic, separated from argument parsing so it can be driven
//! directly from tests.

use std::fmt::Write as _;

use serde::Serialize;

use statedisc::bounds::{self, upper_prediction, BoundReport, CopyBound, SearchMethod, SearchOptions, SearchOutcome};
use statedisc::hsp::{hsp_ensemble, Group, Subgroup};
use statedisc::minimax::{solve_reduced, MinimaxConfig};
use statedisc::reduced::{power_dim, ReducedEnsemble};
use statedisc::states::{self, Ensemble};
use statedisc::Error;

use crate::output::{rows_table, sig12, SweepRow};
use crate::CliError;

/// Largest n considered when no --n-max is given.
pub const DEFAULT_N_MAX_CEILING: usize = 12;

pub fn check_cap(d: usize, n: usize, cap: usize) -> Result<(), CliError> {
    let dim = power_dim(d, n);
    if dim > cap as u128 {
        return Err(CliError::Validation(format!(
            "tensor power dimension {d}^{n} = {dim} exceeds the dimension cap {cap} (d = {d}, n = {n}, --dim-cap {cap})"
        )));
    }
    Ok(())
}

/// Largest n ≤ 12 with d^n within the cap.
pub fn default_n_max(d: usize, cap: usize) -> usize {
    (1..=DEFAULT_N_MAX_CEILING).take_while(|&n| power_dim(d, n) <= cap as u128).last().unwrap_or(1)
}

fn bound_flag_error(e: Error) -> CliError {
    let msg = match e {
        Error::TooFewStates { got, .. } => format!("--N must be at least 2, got {got}"),
        Error::BadFidelity(f) => format!("--F must lie in (0, 1), got {f}"),
        Error::BadEpsilon(x) => format!("--eps must lie in (0, 1), got {x}"),
        Error::BadEta(x) => format!("--eta must lie in (0, 1], got {x}"),
        Error::BadLambda { lambda, dim } => {
            format!("--lambda must lie in [1/d, 1] = [{}, 1] for --d {dim}, got {lambda}", 1.0 / dim as f64)
        }
        Error::InvalidArgument(m) => format!("--d: {m}"),
        other => return other.into(),
    };
    CliError::Validation(msg)
}

#[derive(Clone, Debug, Default)]
pub struct BoundsInput {
    pub n_states: Option<usize>,
    pub fidelity: Option<f64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub dim: Option<usize>,
}

pub fn cmd_bounds(input: &BoundsInput) -> Result<BoundReport, CliError> {
    let r = BoundReport::compute(input.n_states, input.fidelity, input.epsilon, input.eta, input.lambda, input.dim)
        .map_err(bound_flag_error)?;
    if r.n_upper.is_none() && r.n_lower.is_none() {
        return Err(CliError::Validation(
            "nothing to compute: give --N --F --eps for the sufficient count and/or --N --eta --lambda --d for the necessary count"
                .into(),
        ));
    }
    Ok(r)
}

pub fn render_bounds(r: &BoundReport) -> String {
    let mut s = String::new();
    if let Some(u) = r.n_upper {
        let _ = writeln!(
            s,
            "n_upper  {:>16}  (N = {}, F = {}, eps = {})",
            u.to_string(),
            r.n_states.unwrap_or_default(),
            r.fidelity.unwrap_or_default(),
            r.epsilon.unwrap_or_default()
        );
    }
    if let Some(l) = r.n_lower {
        let _ = writeln!(
            s,
            "n_lower  {:>16}  (N = {}, eta = {}, lambda = {}, d = {})",
            l.to_string(),
            r.n_states.unwrap_or_default(),
            r.eta.unwrap_or_default(),
            r.lambda.unwrap_or_default(),
            r.dim.unwrap_or_default()
        );
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminateOptions {
    pub copies: usize,
    pub method: SearchMethod,
    pub dim_cap: usize,
    pub minimax: MinimaxConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum DiscriminateReport {
    Pgm {
        copies: usize,
        per_state: Vec<f64>,
        average: f64,
        worst_case: f64,
        bk_bound: f64,
    },
    Minimax {
        copies: usize,
        per_state: Vec<f64>,
        average: f64,
        primal_value: f64,
        dual_value: f64,
        gap: f64,
        iterations: usize,
        converged: bool,
    },
}

impl DiscriminateReport {
    pub fn worst_case(&self) -> f64 {
        match self {
            DiscriminateReport::Pgm { worst_case, .. } => *worst_case,
            DiscriminateReport::Minimax { primal_value, .. } => *primal_value,
        }
    }

    pub fn sweep_row(&self, bk_bound: f64) -> Result<SweepRow, CliError> {
        let (n, average, method) = match self {
            DiscriminateReport::Pgm { copies, average, .. } => (*copies, *average, "pgm"),
            DiscriminateReport::Minimax { copies, average, .. } => (*copies, *average, "minimax"),
        };
        SweepRow::from_evaluation(
            &bounds::CopyEvaluation { n, worst_case: self.worst_case(), average, bk_bound },
            method,
        )
    }
}

/// Runs one measurement at n copies. PGM uses the ensemble priors; the
/// minimax certificate is prior-free and its average is over uniform priors.
pub fn cmd_discriminate(ens: &Ensemble, opts: &DiscriminateOptions) -> Result<(DiscriminateReport, f64), CliError> {
    if opts.copies == 0 {
        return Err(CliError::Validation("--copies must be at least 1".into()));
    }
    check_cap(ens.dim(), opts.copies, opts.dim_cap)?;
    let (base, _) = ReducedEnsemble::from_states(ens.states())?;
    let red = base.tensor_power(opts.copies, opts.dim_cap)?;
    let priors = ens.priors();
    let bk = red.bk_lower_bound(priors)?;
    let report = match opts.method {
        SearchMethod::PgmWorstCase => {
            let per_state = red.success(&red.pgm(priors)?);
            let average = per_state.iter().zip(priors).map(|(s, p)| s * p).sum();
            let worst_case = per_state.iter().copied().fold(f64::INFINITY, f64::min);
            DiscriminateReport::Pgm { copies: opts.copies, per_state, average, worst_case, bk_bound: bk }
        }
        SearchMethod::Minimax => {
            let r = solve_reduced(&red, &opts.minimax)?;
            DiscriminateReport::Minimax {
                copies: opts.copies,
                average: r.average(),
                gap: r.gap(),
                per_state: r.per_state,
                primal_value: r.primal_value,
                dual_value: r.dual_value,
                iterations: r.iterations,
                converged: r.converged,
            }
        }
    };
    Ok((report, bk))
}

pub fn render_discriminate(r: &DiscriminateReport) -> String {
    let mut s = String::new();
    let per = |s: &mut String, v: &[f64]| {
        for (i, p) in v.iter().enumerate() {
            let _ = writeln!(s, "  state {i:<3} {}", sig12(*p));
        }
    };
    match r {
        DiscriminateReport::Pgm { copies, per_state, average, worst_case, bk_bound } => {
            let _ = writeln!(s, "pretty good measurement, {copies} cop{}", if *copies == 1 { "y" } else { "ies" });
            per(&mut s, per_state);
            let _ = writeln!(s, "average     {}", sig12(*average));
            let _ = writeln!(s, "worst_case  {}", sig12(*worst_case));
            let _ = writeln!(s, "bk_bound    {}", sig12(*bk_bound));
        }
        DiscriminateReport::Minimax {
            copies,
            per_state,
            average,
            primal_value,
            dual_value,
            gap,
            iterations,
            converged,
        } => {
            let _ = writeln!(s, "minimax measurement, {copies} cop{}", if *copies == 1 { "y" } else { "ies" });
            per(&mut s, per_state);
            let _ = writeln!(s, "average     {}", sig12(*average));
            let _ = writeln!(s, "primal      {}", sig12(*primal_value));
            let _ = writeln!(s, "dual        {}", sig12(*dual_value));
            let _ = writeln!(s, "gap         {}", sig12(*gap));
            let _ = writeln!(s, "iterations  {iterations} ({})", if *converged { "converged" } else { "iteration limit" });
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub method: String,
    pub epsilon: f64,
    pub n_states: usize,
    pub dim: usize,
    pub fidelity: Option<f64>,
    pub lambda: f64,
    pub min_copies: Option<usize>,
    pub n_max: usize,
    pub n_upper: Option<CopyBound>,
    pub n_lower: Option<CopyBound>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn outcome(&self) -> SearchOutcome {
        self.summary.min_copies.map_or(SearchOutcome::ExceedsNMax, SearchOutcome::Found)
    }
}

/// Evaluates n = 1..=n_max under uniform priors and reports the first n whose
/// worst-case success reaches 1 − ε, next to both copy-count bounds.
pub fn cmd_sweep(
    ens: &Ensemble,
    n_max: Option<usize>,
    epsilon: f64,
    method: SearchMethod,
    opts: &SearchOptions,
) -> Result<SweepReport, CliError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::Validation(format!("--epsilon must lie in (0, 1), got {epsilon}")));
    }
    let d = ens.dim();
    let n_max = n_max.unwrap_or_else(|| default_n_max(d, opts.dim_cap));
    if n_max == 0 {
        return Err(CliError::Validation("--n-max must be at least 1".into()));
    }
    check_cap(d, n_max, opts.dim_cap)?;
    let evals = bounds::sweep(ens.states(), n_max, method, opts)?;
    let rows = evals.iter().map(|e| SweepRow::from_evaluation(e, method.label())).collect::<Result<Vec<_>, _>>()?;
    let min_copies = evals.iter().find(|e| e.worst_case >= 1.0 - epsilon).map(|e| e.n);

    let n_states = ens.len();
    let lambda = states::max_eigenvalue(ens)?;
    let (fidelity, n_upper, n_lower) = if n_states >= 2 {
        let f = states::max_pairwise_fidelity(ens)?;
        (
            Some(f),
            Some(upper_prediction(n_states, f, epsilon)?),
            Some(bounds::copies_lower(n_states, 1.0 - epsilon, lambda, d)?),
        )
    } else {
        (None, None, None)
    };
    Ok(SweepReport {
        rows,
        summary: SweepSummary {
            method: method.label().into(),
            epsilon,
            n_states,
            dim: d,
            fidelity,
            lambda,
            min_copies,
            n_max,
            n_upper,
            n_lower,
        },
    })
}

fn or_na(b: Option<CopyBound>) -> String {
    b.map_or_else(|| "n/a (single state)".into(), |b| b.to_string())
}

pub fn render_summary(s: &SweepSummary) -> String {
    let found = match s.min_copies {
        Some(n) => n.to_string(),
        None => format!("exceeds n_max = {}", s.n_max),
    };
    let mut out = String::new();
    let _ = writeln!(out, "minimal copies for worst-case success >= {} ({}): {found}", sig12(1.0 - s.epsilon), s.method);
    let _ = writeln!(
        out,
        "predicted sufficient copies (pairwise fidelity bound, F = {}): {}",
        s.fidelity.map_or("n/a".into(), sig12),
        or_na(s.n_upper)
    );
    let _ = writeln!(
        out,
        "predicted necessary copies (eigenvalue bound, lambda = {}, d = {}): {}",
        sig12(s.lambda),
        s.dim,
        or_na(s.n_lower)
    );
    out
}

pub fn render_sweep(r: &SweepReport) -> String {
    format!("{}\n{}", rows_table(&r.rows), render_summary(&r.summary))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HspReport {
    pub group_order: usize,
    pub subgroups: Vec<Vec<usize>>,
    pub sweep: SweepReport,
}

/// Coset-state experiment: builds the ensemble over the given subgroups and
/// sweeps it with the minimax method.
pub fn cmd_hsp(
    g: &Group,
    subgroups: &[Subgroup],
    epsilon: f64,
    n_max: Option<usize>,
    method: SearchMethod,
    opts: &SearchOptions,
) -> Result<HspReport, CliError> {
    let ens = hsp_ensemble(g, subgroups)?;
    let sweep = cmd_sweep(&ens, n_max, epsilon, method, opts).map_err(|e| match e {
        CliError::Validation(m) if m.contains("dimension cap") => {
            CliError::Validation(format!("{m}; lower --n-max, or raise --dim-cap"))
        }
        other => other,
    })?;
    Ok(HspReport {
        group_order: g.order(),
        subgroups: subgroups.iter().map(|h| h.elements().to_vec()).collect(),
        sweep,
    })
}

pub fn render_hsp(r: &HspReport) -> String {
    let s = &r.sweep.summary;
    let mut out = String::new();
    let _ = writeln!(out, "group order        {}", r.group_order);
    let _ = writeln!(out, "subgroups (N)      {}", s.n_states);
    for h in &r.subgroups {
        let _ = writeln!(out, "  {h:?}");
    }
    let _ = writeln!(out, "dimension          {}", s.dim);
    let _ = writeln!(out, "max pairwise F     {}", s.fidelity.map_or("n/a".into(), sig12));
    let _ = writeln!(out, "lambda             {}", sig12(s.lambda));
    let _ = writeln!(out, "n_upper            {}", or_na(s.n_upper));
    let _ = writeln!(out, "n_lower            {}", or_na(s.n_lower));
    out.push('\n');
    out.push_str(&render_sweep(&r.sweep));
    out
}
