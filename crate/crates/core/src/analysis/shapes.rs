use rug::{Float, Rational};
use serde::Serialize;

use crate::model::KnapsackInstance;

pub const SHAPE_LABEL: &str = "shape, unit constants";

/// Asymptotic rank bounds evaluated with every hidden constant set to one.
/// These are shapes, not certified ranks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundShape {
    /// `min{ceil q, n - floor q}`
    pub baseline: f64,
    /// `min{n, sqrt(n ln(1/q̂))}`
    pub integrality: f64,
    /// `sqrt(n) ln(2/q̂) + sqrt(n floor q) ln n`
    pub upper_lower_layers: f64,
    /// `n - floor q`
    pub upper_upper_layers: f64,
    /// `sqrt(n) (sqrt(q) ln n + ln(1/σ))`, present when a σ is supplied.
    pub smoothed: Option<f64>,
    pub label: &'static str,
}

impl BoundShape {
    fn zero(sigma: Option<f64>) -> Self {
        BoundShape {
            baseline: 0.0,
            integrality: 0.0,
            upper_lower_layers: 0.0,
            upper_upper_layers: 0.0,
            smoothed: sigma.map(|_| 0.0),
            label: SHAPE_LABEL,
        }
    }
}

/// `ln` of a positive rational without going through `f64`, so tiny `q̂`
/// such as `2^-2000` still work.
fn ln_rational(x: &Rational) -> f64 {
    Float::with_val(128, x).ln().to_f64()
}

pub fn bound_shapes(inst: &KnapsackInstance, sigma: Option<f64>) -> BoundShape {
    if inst.is_integral() || !inst.q_in_range() {
        return BoundShape::zero(sigma);
    }
    let n = inst.n() as f64;
    let fl = inst.floor_i64() as f64;
    let ce = inst.ceil_i64() as f64;
    let ln_inv_hat = -ln_rational(&inst.q_hat());
    let q = inst.q().to_f64();
    BoundShape {
        baseline: ce.min(n - fl),
        integrality: n.min((n * ln_inv_hat).sqrt()),
        upper_lower_layers: n.sqrt() * (2f64.ln() + ln_inv_hat) + (n * fl).sqrt() * n.ln(),
        upper_upper_layers: n - fl,
        smoothed: sigma.map(|s| n.sqrt() * (q.sqrt() * n.ln() - s.ln())),
        label: SHAPE_LABEL,
    }
}

/// Per-sample rank bound `B(q')`, extended to all reals.
pub fn smoothed_bound_fn(qprime: f64, n: u64) -> f64 {
    let nf = n as f64;
    if !(qprime > 0.0 && qprime < nf) || qprime.fract() == 0.0 {
        return 0.0;
    }
    let fl = qprime.floor();
    let hat = qprime - fl;
    if qprime < (n / 2) as f64 {
        nf.sqrt() * (2.0 / hat).ln() + (nf * fl).sqrt() * nf.ln()
    } else {
        nf - fl
    }
}
