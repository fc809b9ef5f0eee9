//! Command-line front end for `statedisc`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use statedisc::bounds::{SearchMethod, SearchOptions};
use statedisc::hsp::{cyclic_group, dihedral_group, enumerate_subgroups, Group};
use statedisc::io;
use statedisc::minimax::{BestResponse, MinimaxConfig};
use statedisc::states::{random_density, random_pure_state, Ensemble};
use statedisc::DEFAULT_DIM_CAP;

pub mod commands;
pub mod output;

use commands::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<statedisc::Error> for CliError {
    fn from(e: statedisc::Error) -> Self {
        match e {
            statedisc::Error::NumericalFailure(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "statedisc", version, about = "Quantum state discrimination: measurements, certificates and copy-count bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sufficient and necessary copy counts from ensemble parameters
    Bounds(BoundsArgs),
    /// Measure n copies of an ensemble with the PGM or the minimax solver
    Discriminate(DiscriminateArgs),
    /// Success versus number of copies, with the minimal n reaching 1 - epsilon
    Sweep(SweepArgs),
    /// Coset-state ensembles of a finite group
    Hsp(HspArgs),
    /// Write a seeded random ensemble as JSON
    GenEnsemble(GenEnsembleArgs),
    /// Write a cyclic or dihedral group as JSON
    GenGroup(GenGroupArgs),
    /// List all subgroups of a group as JSON
    Subgroups(GroupSource),
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Number of states
    #[arg(long = "N")]
    pub n_states: Option<usize>,
    /// Largest pairwise fidelity
    #[arg(long = "F")]
    pub fidelity: Option<f64>,
    /// Allowed worst-case error
    #[arg(long, visible_alias = "epsilon")]
    pub eps: Option<f64>,
    /// Target success probability for the necessary count
    #[arg(long)]
    pub eta: Option<f64>,
    /// Largest eigenvalue over the ensemble
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Hilbert space dimension
    #[arg(long)]
    pub d: Option<usize>,
    /// Also print the report as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pgm,
    Minimax,
}

impl From<MethodArg> for SearchMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pgm => SearchMethod::PgmWorstCase,
            MethodArg::Minimax => SearchMethod::Minimax,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ResponseArg {
    Pgm,
    Helstrom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Tensor-power dimension cap
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    pub dim_cap: usize,
    /// Minimax iteration budget
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Minimax duality-gap target
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Inner maximizer of the minimax solver
    #[arg(long, value_enum, default_value_t = ResponseArg::Pgm)]
    pub best_response: ResponseArg,
}

impl SolverArgs {
    fn minimax(&self) -> MinimaxConfig {
        MinimaxConfig {
            max_iters: self.max_iters,
            tol: self.tol,
            best_response: match self.best_response {
                ResponseArg::Pgm => BestResponse::Pgm,
                ResponseArg::Helstrom => BestResponse::HelstromIfN2,
            },
        }
    }

    fn search(&self) -> SearchOptions {
        SearchOptions { dim_cap: self.dim_cap, minimax: self.minimax() }
    }
}

#[derive(Args, Debug)]
pub struct DiscriminateArgs {
    /// Ensemble JSON file
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Pgm)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    pub out: OutFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Ensemble JSON file
    pub file: PathBuf,
    /// Largest number of copies (default: largest n <= 12 within the dimension cap)
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, visible_alias = "eps", default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Minimax)]
    pub method: MethodArg,
    /// Write the sweep as CSV to this path
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["group", "family"])))]
pub struct GroupSource {
    /// Group JSON file
    #[arg(long)]
    pub group: Option<PathBuf>,
    /// cyclic:n or dihedral:m
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("which").required(true).args(["all_subgroups", "subgroups"])))]
pub struct HspArgs {
    #[command(flatten)]
    pub source: GroupSource,
    /// Use every subgroup of the group
    #[arg(long)]
    pub all_subgroups: bool,
    /// Subgroup JSON file: one {"elements": [...]} or an array of them
    #[arg(long)]
    pub subgroups: Option<PathBuf>,
    #[arg(long, visible_alias = "eps", default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Minimax)]
    pub method: MethodArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct GenEnsembleArgs {
    #[arg(long, default_value_t = 2)]
    pub states: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Rank of each state; 1 gives pure states
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output path (default: stdout)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenGroupArgs {
    /// cyclic:n or dihedral:m
    #[arg(long)]
    pub family: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn parse_family(text: &str) -> Result<Group, CliError> {
    let bad = || CliError::Validation(format!("--family expects cyclic:n or dihedral:m, got {text:?}"));
    let (kind, n) = text.split_once(':').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let g = match kind.trim() {
        "cyclic" => cyclic_group(n),
        "dihedral" => dihedral_group(n),
        _ => return Err(bad()),
    };
    g.map_err(|e| CliError::Validation(format!("--family {text}: {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: statedisc::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble, CliError> {
    with_file(path, io::parse_ensemble(&read(path)?))
}

pub fn load_group(src: &GroupSource) -> Result<Group, CliError> {
    match (&src.group, &src.family) {
        (Some(p), _) => with_file(p, io::parse_group(&read(p)?)),
        (None, Some(f)) => parse_family(f),
        (None, None) => Err(CliError::Validation("give --group or --family".into())),
    }
}

fn write_to(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => writeln!(out, "{text}").map_err(CliError::io),
    }
}

fn write_csv_file(path: &Path, rows: &[output::SweepRow]) -> Result<(), CliError> {
    let f = std::fs::File::create(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    output::write_csv(rows, std::io::BufWriter::new(f))
}

/// Generated ensembles derive one seed per state from the base seed.
pub fn generate_ensemble(states: usize, dim: usize, rank: usize, seed: u64) -> Result<Ensemble, CliError> {
    if states == 0 {
        return Err(CliError::Validation("--states must be at least 1".into()));
    }
    let list = (0..states as u64)
        .map(|k| {
            let s = seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            if rank == 1 {
                random_pure_state(dim, s)
            } else {
                random_density(dim, rank, s)
            }
        })
        .collect::<statedisc::Result<Vec<_>>>()
        .map_err(|e| CliError::Validation(format!("--dim/--rank: {e}")))?;
    Ok(Ensemble::uniform(list)?)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let w = |out: &mut dyn Write, s: &str| write!(out, "{s}").map_err(CliError::io);
    match cmd {
        Command::Bounds(a) => {
            let r = cmd_bounds(&BoundsInput {
                n_states: a.n_states,
                fidelity: a.fidelity,
                epsilon: a.eps,
                eta: a.eta,
                lambda: a.lambda,
                dim: a.d,
            })?;
            w(out, &render_bounds(&r))?;
            if a.json {
                w(out, &format!("{}\n", serde_json::to_string_pretty(&r).expect("report serializes")))?;
            }
        }
        Command::Discriminate(a) => {
            let ens = load_ensemble(&a.file)?;
            let opts = DiscriminateOptions {
                copies: a.copies,
                method: a.method.into(),
                dim_cap: a.solver.dim_cap,
                minimax: a.solver.minimax(),
            };
            let (r, bk) = cmd_discriminate(&ens, &opts)?;
            match a.out {
                OutFormat::Text => w(out, &render_discriminate(&r))?,
                OutFormat::Json => {
                    w(out, &format!("{}\n", serde_json::to_string_pretty(&r).expect("report serializes")))?
                }
                OutFormat::Csv => w(out, &output::csv_string(&[r.sweep_row(bk)?])?)?,
            }
        }
        Command::Sweep(a) => {
            let ens = load_ensemble(&a.file)?;
            let r = cmd_sweep(&ens, a.n_max, a.epsilon, a.method.into(), &a.solver.search())?;
            if let Some(p) = &a.csv {
                write_csv_file(p, &r.rows)?;
            }
            w(out, &render_sweep(&r))?;
        }
        Command::Hsp(a) => {
            let g = load_group(&a.source)?;
            let subs = match &a.subgroups {
                Some(p) => with_file(p, io::parse_subgroups(&read(p)?, &g))?,
                None => enumerate_subgroups(&g)?,
            };
            let r = cmd_hsp(&g, &subs, a.epsilon, a.n_max, a.method.into(), &a.solver.search())?;
            if let Some(p) = &a.csv {
                write_csv_file(p, &r.sweep.rows)?;
            }
            w(out, &render_hsp(&r))?;
        }
        Command::GenEnsemble(a) => {
            let ens = generate_ensemble(a.states, a.dim, a.rank, a.seed)?;
            write_to(&a.output, &io::ensemble_to_json(&ens), out)?;
        }
        Command::GenGroup(a) => {
            let g = parse_family(&a.family)?;
            write_to(&a.output, &io::group_to_json(&g), out)?;
        }
        Command::Subgroups(src) => {
            let g = load_group(&src)?;
            write_to(&None, &io::subgroups_to_json(&enumerate_subgroups(&g)?), out)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
