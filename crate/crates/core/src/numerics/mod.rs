//! Exact rational and high-precision polynomial arithmetic.

pub mod cheb;
pub mod hpfloat;
pub mod interp;
pub mod poly;
pub mod rational;
pub mod sign;

pub use cheb::{cheb_eval, cheb_t, smallest_root_shifted_cheb};
pub use hpfloat::{HpFloat, DEFAULT_PRECISION, MIN_PRECISION};
pub use interp::{divided_differences, newton_eval, newton_interpolate};
pub use poly::{AnyPoly, AnyScalar, Coeff, CoeffKind, UniPoly};
pub use sign::{integer_sign_profile, Sign, SignProfile};

#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("coefficient kinds differ in `{op}`; convert explicitly first")]
    KindMismatch { op: &'static str },
    #[error("cannot parse number {0}")]
    Parse(String),
    #[error("interpolation nodes are not pairwise distinct")]
    DuplicateNodes,
    #[error("length mismatch: {left} nodes vs {right} values")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
}

/// Precision for interpolating at `nodes` equispaced points.
pub fn interpolation_precision(base: u32, nodes: usize) -> u32 {
    base.max(DEFAULT_PRECISION).max(8 * nodes as u32)
}
