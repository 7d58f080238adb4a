use serde::Serialize;

use super::quad::{gk15_adaptive, integrate_log_weight};
use super::AnalysisError;
use crate::model::KnapsackInstance;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IJRow {
    pub k: u64,
    pub in_c: bool,
    pub i_k: f64,
    pub i_bound: f64,
    pub i_error: f64,
    pub j_k: f64,
    pub j_bound: f64,
    pub j_error: f64,
    /// `J_bound - J_k`. For `k ∈ C` this is the Gaussian mass outside
    /// `[0, 1]`, integrated directly since the bound is tight to many digits.
    pub j_slack: f64,
    /// `min((I_bound - I_k)/I_bound, j_slack/J_bound)`
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IJReport {
    pub n: u64,
    pub q: String,
    pub sigma: f64,
    pub rows: Vec<IJRow>,
}

impl IJReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.margin > 0.0)
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Quadrature error estimates must stay below this fraction of each bound.
const ERROR_FRACTION: f64 = 0.01;

/// Evaluates, for `k = 1..=n`,
/// `I_k = ∫_0^1 φ(u) ln(1/u) du` and `J_k = ∫_0^1 φ(u) du` with
/// `φ(u) = exp(-(u - (q - k + 1))^2 / (2σ^2))`, against the explicit bounds:
/// for `k ∈ C = {floor q, ceil q, ceil q + 1}`,
/// `I_k <= σ(1 + ln(1/σ)) + sqrt(2π) σ ln(1/σ)` and `J_k <= σ sqrt(2π)`;
/// otherwise both are at most `exp(-1/(2σ^2))`.
pub fn check_ij_inequalities(inst: &KnapsackInstance, sigma: f64) -> Result<IJReport, AnalysisError> {
    let n = inst.n();
    let half = (n / 2) as f64;
    let q = inst.q().to_f64();
    if !(q > 0.0 && q < half) {
        return Err(AnalysisError::Precondition(format!("need 0 < q < floor(n/2), got q = {q}")));
    }
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(AnalysisError::Precondition(format!("need 0 < sigma < 1/2, got {sigma}")));
    }
    let fl = inst.floor_i64();
    let ce = inst.ceil_i64();
    let c_set = [fl, ce, ce + 1];
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let ln_inv = -sigma.ln();
    let near_i = sigma * (1.0 + ln_inv) + root_2pi * sigma * ln_inv;
    let near_j = sigma * root_2pi;
    let far = (-1.0 / (2.0 * sigma * sigma)).exp();

    let mut rows = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let in_c = c_set.contains(&(k as i64));
        let (i_bound, j_bound) = if in_c { (near_i, near_j) } else { (far, far) };
        let center = q - k as f64 + 1.0;
        let phi = move |u: f64| {
            let z = (u - center) / sigma;
            (-0.5 * z * z).exp()
        };
        let i_target = 1e-3 * ERROR_FRACTION * i_bound;
        let j_target = 1e-3 * ERROR_FRACTION * j_bound;
        let iq = integrate_log_weight(phi, i_target);
        let jq = gk15_adaptive(phi, 0.0, 1.0, j_target, 4000);
        for (err, bound) in [(iq.error, i_bound), (jq.error, j_bound)] {
            if err > ERROR_FRACTION * bound {
                return Err(AnalysisError::Quadrature {
                    k,
                    err,
                    target: ERROR_FRACTION * bound,
                });
            }
        }
        let j_slack = if in_c {
            gaussian_outside_unit(center, sigma)
        } else {
            j_bound - jq.value
        };
        let margin = ((i_bound - iq.value) / i_bound).min(j_slack / j_bound);
        rows.push(IJRow {
            k,
            in_c,
            i_k: iq.value,
            i_bound,
            i_error: iq.error,
            j_k: jq.value,
            j_bound,
            j_error: jq.error,
            j_slack,
            margin,
        });
    }
    Ok(IJReport {
        n,
        q: inst.q_string(),
        sigma,
        rows,
    })
}

/// `∫_{R \ [0,1]} exp(-(u - c)^2 / (2σ^2)) du`, truncated where the
/// integrand underflows.
fn gaussian_outside_unit(center: f64, sigma: f64) -> f64 {
    let phi = |u: f64| {
        let z = (u - center) / sigma;
        (-0.5 * z * z).exp()
    };
    let reach = 40.0 * sigma;
    let mut total = 0.0;
    let lo = (center - reach).min(0.0);
    if lo < 0.0 {
        let tol = 1e-9 * sigma * phi(0.0).max(f64::MIN_POSITIVE);
        total += gk15_adaptive(phi, lo, 0.0, tol, 4000).value;
    }
    let hi = (center + reach).max(1.0);
    if hi > 1.0 {
        let tol = 1e-9 * sigma * phi(1.0).max(f64::MIN_POSITIVE);
        total += gk15_adaptive(phi, 1.0, hi, tol, 4000).value;
    }
    total
}
