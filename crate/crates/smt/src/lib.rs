//! SMT-LIB2 encodings for continuous reachability and soundness, driven
//! through an external solver process.

pub mod psi;
pub mod queries;
pub mod script;
pub mod sexpr;
pub mod solver;

pub use psi::{emit_psi, Encoding, MarkingTerm, Psi};
pub use queries::{
    check_continuous_soundness, compute_k_bounds, compute_k_q, compute_k_z, decide_creach_smt, ContinuousSoundness,
    KBounds, KValue, SmtOptions,
};
pub use script::{SmtModel, SmtScript, Sort, Value};
pub use solver::{solve_script, solver_available, CheckSat, Session, SmtError, SolveResult, SolverConfig};
