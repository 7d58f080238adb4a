//! Closed-form bound shapes (unit constants, natural logarithms) and the
//! smoothed-analysis experiment with quadrature checks of its integral bounds.

mod ij;
mod quad;
mod shapes;
mod smoothed;

pub use ij::{check_ij_inequalities, IJReport, IJRow};
pub use quad::{gk15_adaptive, integrate_log_weight, Quadrature};
pub use shapes::{bound_shapes, smoothed_bound_fn, BoundShape, SHAPE_LABEL};
pub use smoothed::{
    fit_affine, run_smoothed, run_smoothed_with, smoothed_samples, AffineFit, SampleBound,
    SmoothedSample, SmoothedStats, BOUND_FN_NAME,
};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature did not converge for k = {k}: error estimate {err:e} exceeds {target:e}")]
    Quadrature { k: u64, err: f64, target: f64 },
    #[error("oracle: {0}")]
    Oracle(String),
}
