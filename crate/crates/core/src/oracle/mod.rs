//! SOS rank at desk scale by semidefinite feasibility, plus univariate
//! positivity certificates on `[0, n]`.

mod assemble;
pub mod ipm;
mod lift;
mod rank;
mod sdp;

pub use assemble::{assemble_dense, assemble_dense_with_limit, assemble_symmetric, DENSE_N_LIMIT};
pub use lift::{lift_nonneg, lift_nonneg_tol, GramSos, Lifting, Parity};
pub use rank::{feasibility_at, sos_rank, DegreeOutcome, Method, RankOptions, RankResult, CONVENTION};
pub use sdp::{
    sdp_feasible, sdp_feasible_with, FeasibilityResult, GramTerm, SdpConstraint, SdpProblem,
    SolveOptions, Status,
};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("dense assembly limited to n <= {limit}, got n = {n}")]
    Size { n: u64, limit: u64 },
    #[error("malformed problem: {0}")]
    Problem(String),
    #[error("lifting failed: {0}")]
    Lifting(String),
}
