//! Multi-hypothesis quantum state discrimination.
//!
//! Builds the pretty good measurement for an ensemble of density matrices,
//! certifies worst-case success with a minimax solver, evaluates copy-count
//! bounds, and searches numerically for the number of copies actually
//! needed. Tensor powers are handled through a compressed block
//! representation so that searches stay cheap at desk scale.

pub mod bounds;
pub mod error;
pub mod hsp;
pub mod io;
pub mod linalg;
pub mod minimax;
pub mod pgm;
pub mod reduced;
pub mod states;

pub use bounds::{
    bk_success_at, copies_lower, copies_upper, min_copies_search, BoundReport, CopyBound, CopyEvaluation,
    SearchMethod, SearchOptions, SearchOutcome,
};
pub use error::{Error, Result};
pub use hsp::{coset_state, cyclic_group, dihedral_group, enumerate_subgroups, hsp_ensemble, Group, Subgroup};
pub use linalg::{ComplexMatrix, DEFAULT_DIM_CAP};
pub use minimax::{solve_minimax, BestResponse, MinimaxConfig, MinimaxResult};
pub use pgm::{bk_lower_bound, helstrom, per_state_success, pgm, success_report, Helstrom, Povm, SuccessReport};
pub use reduced::ReducedEnsemble;
pub use states::{fidelity, max_pairwise_fidelity, DensityMatrix, Ensemble};
