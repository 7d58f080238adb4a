//! Gram systems for `|x| - opt = s0(x) + s1(x) (|x| - q)` on `{0,1}^n` with
//! `deg s0 <= 2d + 2`, `deg s1 <= 2d`. When `q > n` the target is the
//! refutation `-1 = s0 + s1 (|x| - q)`.

use rug::Rational;

use super::sdp::{GramTerm, SdpConstraint, SdpProblem};
use super::OracleError;
use crate::model::{optimum, KnapsackInstance, OptValue};

pub const DENSE_N_LIMIT: u64 = 8;

fn target(inst: &KnapsackInstance, weight: u64) -> Rational {
    match optimum(inst) {
        OptValue::Value(opt) => Rational::from(weight as i64 - opt as i64),
        OptValue::Infeasible => Rational::from(-1),
    }
}

/// Multilinear monomials of degree `<= deg`, as bitmasks ordered by size.
fn multilinear_basis(n: u32, deg: u32) -> Vec<u64> {
    let mut basis: Vec<u64> = (0..(1u64 << n))
        .filter(|s| s.count_ones() <= deg)
        .collect();
    basis.sort_by_key(|s| (s.count_ones(), *s));
    basis
}

pub fn assemble_dense(inst: &KnapsackInstance, d: u32) -> Result<SdpProblem, OracleError> {
    assemble_dense_with_limit(inst, d, DENSE_N_LIMIT)
}

pub fn assemble_dense_with_limit(
    inst: &KnapsackInstance,
    d: u32,
    limit: u64,
) -> Result<SdpProblem, OracleError> {
    let n = inst.n();
    if n > limit {
        return Err(OracleError::Size { n, limit });
    }
    let n32 = n as u32;
    let b0 = multilinear_basis(n32, d + 1);
    let b1 = multilinear_basis(n32, d);
    let q = inst.q().to_f64();
    let constraints = (0..(1u64 << n))
        .map(|x| {
            let w = x.count_ones() as u64;
            let eval = |basis: &[u64]| -> Vec<f64> {
                basis
                    .iter()
                    .map(|s| if s & x == *s { 1.0 } else { 0.0 })
                    .collect()
            };
            let mut terms = vec![GramTerm {
                block: 0,
                coef: 1.0,
                v: eval(&b0),
            }];
            let c1 = w as f64 - q;
            if c1 != 0.0 {
                terms.push(GramTerm {
                    block: 1,
                    coef: c1,
                    v: eval(&b1),
                });
            }
            SdpConstraint {
                terms,
                rhs: target(inst, w),
            }
        })
        .collect();
    Ok(SdpProblem {
        blocks: vec![b0.len(), b1.len()],
        constraints,
    })
}

fn binomial_f64(m: i64, k: usize) -> f64 {
    if m < 0 || (k as i64) > m {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (m - i as i64) as f64 / (i + 1) as f64)
}

/// Level weight `c_j(w) = prod_{i<j} (w - i)(n - w - i)`, nonnegative on
/// `0..=n`, divided by its maximum over levels.
fn level_weight(n: u64, j: u64, w: u64) -> f64 {
    let raw = |w: u64| -> f64 {
        (0..j)
            .map(|i| (w as f64 - i as f64) * (n as f64 - w as f64 - i as f64))
            .product()
    };
    let peak = (0..=n).map(raw).fold(0.0, f64::max);
    if peak == 0.0 {
        0.0
    } else {
        raw(w) / peak
    }
}

/// Blocks `(j, dim)` for a symmetric SOS of degree `<= 2t` in `w = |x|`:
/// `sum_j c_j(w) sigma_j(w)` with `deg sigma_j <= 2(t - j)`, using the basis
/// `C(w - j, k) / C(n - 2j, k)`, `k <= min(t - j, n - 2j)`.
fn symmetric_blocks(n: u64, t: u32) -> Vec<(u64, usize)> {
    (0..=u64::from(t))
        .filter(|&j| 2 * j <= n)
        .map(|j| (j, (u64::from(t) - j).min(n - 2 * j) as usize + 1))
        .collect()
}

fn symmetric_vector(n: u64, j: u64, dim: usize, w: u64) -> Vec<f64> {
    (0..dim)
        .map(|k| binomial_f64(w as i64 - j as i64, k) / binomial_f64((n - 2 * j) as i64, k))
        .collect()
}

pub fn assemble_symmetric(inst: &KnapsackInstance, d: u32) -> SdpProblem {
    let n = inst.n();
    let s0 = symmetric_blocks(n, d + 1);
    let s1 = symmetric_blocks(n, d);
    let mut blocks: Vec<usize> = s0.iter().map(|b| b.1).collect();
    blocks.extend(s1.iter().map(|b| b.1));
    let q = inst.q().to_f64();
    let constraints = (0..=n)
        .map(|w| {
            let mut terms = Vec::new();
            for (idx, &(j, dim)) in s0.iter().enumerate() {
                let c = level_weight(n, j, w);
                if c != 0.0 {
                    terms.push(GramTerm {
                        block: idx,
                        coef: c,
                        v: symmetric_vector(n, j, dim, w),
                    });
                }
            }
            for (idx, &(j, dim)) in s1.iter().enumerate() {
                let c = level_weight(n, j, w) * (w as f64 - q);
                if c != 0.0 {
                    terms.push(GramTerm {
                        block: s0.len() + idx,
                        coef: c,
                        v: symmetric_vector(n, j, dim, w),
                    });
                }
            }
            SdpConstraint {
                terms,
                rhs: target(inst, w),
            }
        })
        .collect();
    SdpProblem {
        blocks,
        constraints,
    }
}
