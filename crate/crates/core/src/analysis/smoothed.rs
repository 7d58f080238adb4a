use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use super::shapes::smoothed_bound_fn;
use super::AnalysisError;
use crate::model::KnapsackInstance;
use crate::oracle::{sos_rank, RankOptions};

pub const BOUND_FN_NAME: &str = "B(q') = sqrt(n) ln(2/frac(q')) + sqrt(n floor(q')) ln n on (0, floor(n/2)); n - floor(q') on [floor(n/2), n); 0 otherwise";

/// What is averaged over the perturbed instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SampleBound {
    /// The closed-form per-sample bound `B(q')`.
    Shape,
    /// The oracle rank of `MK(q')`; only for `n <= 6`.
    OracleRank,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedSample {
    pub sample_index: u64,
    pub eta: f64,
    pub q_prime: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedStats {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub sigma: f64,
    pub per_sample_bound_fn: String,
}

impl SmoothedStats {
    /// `mean / (sqrt(n) (sqrt(q) ln n + ln(1/σ)))`.
    pub fn scaling_constant(&self, inst: &KnapsackInstance) -> f64 {
        let n = inst.n() as f64;
        let q = inst.q().to_f64();
        self.mean / (n.sqrt() * (q.sqrt() * n.ln() - self.sigma.ln()))
    }
}

pub const MIN_SAMPLES: u64 = 100;
const ORACLE_N_LIMIT: u64 = 6;

/// `η_i = σ z_i` where `z_i` is the first standard normal drawn from the
/// ChaCha8 stream `i` under key `seed`; independent of evaluation order.
fn eta(base: &ChaCha8Rng, index: u64, sigma: f64) -> f64 {
    let mut rng = base.clone();
    rng.set_stream(index);
    let z: f64 = StandardNormal.sample(&mut rng);
    sigma * z
}

fn oracle_bound(n: u64, qp: f64) -> Result<f64, AnalysisError> {
    let q = Rational::from_f64(qp).ok_or_else(|| AnalysisError::Oracle(format!("q' = {qp} is not finite")))?;
    let inst = KnapsackInstance::new(n, q).map_err(|e| AnalysisError::Oracle(e.to_string()))?;
    let res = sos_rank(&inst, n as u32, &RankOptions::default()).map_err(|e| AnalysisError::Oracle(e.to_string()))?;
    match (res.rank, res.unresolved) {
        (Some(r), false) => Ok(r as f64),
        _ => Err(AnalysisError::Oracle(format!("rank of n={n} q'={qp} unresolved"))),
    }
}

pub fn smoothed_samples(
    inst: &KnapsackInstance,
    sigma: f64,
    samples: u64,
    seed: u64,
    what: SampleBound,
) -> Result<Vec<SmoothedSample>, AnalysisError> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(AnalysisError::Precondition(format!("need 0 < sigma < 1, got {sigma}")));
    }
    if samples < MIN_SAMPLES {
        return Err(AnalysisError::Precondition(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let n = inst.n();
    if what == SampleBound::OracleRank && n > ORACLE_N_LIMIT {
        return Err(AnalysisError::Precondition(format!(
            "oracle ranks need n <= {ORACLE_N_LIMIT}, got {n}"
        )));
    }
    let q = inst.q().to_f64();
    let base = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let e = eta(&base, i, sigma);
            let qp = q + e;
            let bound = match what {
                SampleBound::Shape => smoothed_bound_fn(qp, n),
                SampleBound::OracleRank => oracle_bound(n, qp)?,
            };
            Ok(SmoothedSample {
                sample_index: i,
                eta: e,
                q_prime: qp,
                bound,
            })
        })
        .collect()
}

fn stats_of(samples: &[SmoothedSample], seed: u64, sigma: f64) -> SmoothedStats {
    let m = samples.len() as f64;
    // indexed order keeps the sums bit-stable
    let mean = samples.iter().map(|s| s.bound).sum::<f64>() / m;
    let var = samples.iter().map(|s| (s.bound - mean).powi(2)).sum::<f64>() / (m - 1.0);
    SmoothedStats {
        mean,
        stderr: (var / m).sqrt(),
        samples: samples.len() as u64,
        seed,
        sigma,
        per_sample_bound_fn: BOUND_FN_NAME.to_string(),
    }
}

pub fn run_smoothed(inst: &KnapsackInstance, sigma: f64, samples: u64, seed: u64) -> Result<SmoothedStats, AnalysisError> {
    run_smoothed_with(inst, sigma, samples, seed, SampleBound::Shape).map(|(s, _)| s)
}

pub fn run_smoothed_with(
    inst: &KnapsackInstance,
    sigma: f64,
    samples: u64,
    seed: u64,
    what: SampleBound,
) -> Result<(SmoothedStats, Vec<SmoothedSample>), AnalysisError> {
    let rows = smoothed_samples(inst, sigma, samples, seed, what)?;
    let mut stats = stats_of(&rows, seed, sigma);
    if what == SampleBound::OracleRank {
        stats.per_sample_bound_fn = "oracle SOS rank of MK(q')".to_string();
    }
    Ok((stats, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`. A constant `y` is fitted exactly
/// and reports `R^2 = 1`.
pub fn fit_affine(x: &[f64], y: &[f64]) -> AffineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need two points");
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    AffineFit {
        slope,
        intercept,
        r_squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u64, q: &str) -> KnapsackInstance {
        KnapsackInstance::parse(n, q).unwrap()
    }

    #[test]
    fn deterministic_for_seed() {
        let i = inst(100, "3/2");
        let a = run_smoothed(&i, 0.1, 2000, 7).unwrap();
        let b = run_smoothed(&i, 0.1, 2000, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let c = run_smoothed(&i, 0.1, 2000, 8).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn prefix_samples_do_not_depend_on_count() {
        let i = inst(100, "3/2");
        let a = smoothed_samples(&i, 0.2, 100, 3, SampleBound::Shape).unwrap();
        let b = smoothed_samples(&i, 0.2, 500, 3, SampleBound::Shape).unwrap();
        assert_eq!(a[..], b[..100]);
    }

    #[test]
    fn vanishing_sigma_recovers_point_bound() {
        let i = inst(100, "3/2");
        let s = run_smoothed(&i, 1e-12, 200, 1).unwrap();
        assert!((s.mean - smoothed_bound_fn(1.5, 100)).abs() < 1e-9);
    }

    #[test]
    fn stderr_is_sd_over_root_m() {
        let i = inst(100, "3/2");
        let (s, rows) = run_smoothed_with(&i, 0.3, 400, 5, SampleBound::Shape).unwrap();
        let m = rows.len() as f64;
        let sd = (rows.iter().map(|r| (r.bound - s.mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        assert!((s.stderr - sd / m.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let i = inst(100, "3/2");
        assert!(run_smoothed(&i, 0.1, 99, 1).is_err());
        assert!(run_smoothed(&i, 1.5, 1000, 1).is_err());
        assert!(run_smoothed_with(&i, 0.1, 100, 1, SampleBound::OracleRank).is_err());
    }

    #[test]
    fn oracle_substitution_small_n() {
        let i = inst(4, "3/2");
        let (s, _) = run_smoothed_with(&i, 0.05, 100, 1, SampleBound::OracleRank).unwrap();
        assert!(s.mean >= 1.0 && s.mean <= 4.0, "{}", s.mean);
    }

    #[test]
    fn affine_fit_exact_line() {
        let f = fit_affine(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }
}
