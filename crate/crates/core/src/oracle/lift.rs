//! Univariate positivity certificates on `[0, n]`:
//! even degree `p = t1 + t2 x (n - x)`, odd degree `p = x t1 + (n - x) t2`,
//! with `t1, t2` given by Gram matrices in the Chebyshev basis of `[0, n]`.

use nalgebra::DMatrix;
use rug::Rational;
use serde::Serialize;

use super::sdp::{sdp_feasible, GramTerm, SdpConstraint, SdpProblem, Status};
use super::OracleError;
use crate::numerics::{HpFloat, UniPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
pub struct GramSos {
    /// Gram matrix in the basis `T_k(2x/n - 1)`, `k < dim`.
    pub gram: DMatrix<f64>,
}

impl GramSos {
    fn empty() -> Self {
        GramSos {
            gram: DMatrix::zeros(0, 0),
        }
    }

    pub fn eval(&self, x: f64, n: f64) -> f64 {
        let b = cheb_basis(self.gram.nrows(), x, n);
        let v = nalgebra::DVector::from_vec(b);
        (v.transpose() * &self.gram * &v)[(0, 0)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.gram.nrows() == 0 {
            return 0.0;
        }
        nalgebra::SymmetricEigen::new(self.gram.clone())
            .eigenvalues
            .min()
    }
}

#[derive(Clone, Debug)]
pub struct Lifting {
    pub parity: Parity,
    pub n: u64,
    /// `p = scale * (t1-part + t2-part)`.
    pub scale: f64,
    pub t1: GramSos,
    pub t2: GramSos,
    /// Max relative reconstruction error on the half-integer grid of `[0, n]`.
    pub residual: f64,
}

impl Lifting {
    /// Value of the parity form at `x`.
    pub fn reconstruct(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let (w1, w2) = weights(self.parity, x, n);
        self.scale * (w1 * self.t1.eval(x, n) + w2 * self.t2.eval(x, n))
    }
}

fn cheb_basis(dim: usize, x: f64, n: f64) -> Vec<f64> {
    let z = if n > 0.0 { 2.0 * x / n - 1.0 } else { 0.0 };
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        out.push(match k {
            0 => 1.0,
            1 => z,
            _ => 2.0 * z * out[k - 1] - out[k - 2],
        });
    }
    out
}

/// Multipliers of `t1` and `t2`, normalized to at most 1 on `[0, n]`.
fn weights(parity: Parity, x: f64, n: f64) -> (f64, f64) {
    match parity {
        Parity::Even => (1.0, 4.0 * x * (n - x) / (n * n)),
        Parity::Odd => (x / n, (n - x) / n),
    }
}

pub fn lift_nonneg(
    p: &UniPoly<HpFloat>,
    n: u64,
    d_budget: usize,
) -> Result<Lifting, OracleError> {
    lift_nonneg_tol(p, n, d_budget, 1e-6)
}

pub fn lift_nonneg_tol(
    p: &UniPoly<HpFloat>,
    n: u64,
    d_budget: usize,
    tol: f64,
) -> Result<Lifting, OracleError> {
    if n == 0 {
        return Err(OracleError::Lifting("interval [0, 0] is degenerate".into()));
    }
    let deg = p.degree().unwrap_or(0);
    if deg > d_budget {
        return Err(OracleError::Lifting(format!(
            "degree {deg} exceeds budget {d_budget}"
        )));
    }
    let prec = p.prec().unwrap_or(crate::numerics::DEFAULT_PRECISION);
    let nf = n as f64;
    let eval = |x: f64| -> f64 {
        p.eval(&HpFloat::from_f64(x, prec)).to_f64()
    };
    let grid: Vec<f64> = (0..=4 * n).map(|k| k as f64 / 4.0).collect();
    let scale = grid.iter().map(|&x| eval(x).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Lifting {
            parity: Parity::Even,
            n,
            scale: 0.0,
            t1: GramSos::empty(),
            t2: GramSos::empty(),
            residual: 0.0,
        });
    }
    if grid.iter().any(|&x| eval(x) < -tol * scale) {
        return Err(OracleError::Lifting("p is negative on [0, n]".into()));
    }

    let (parity, d1, d2) = if deg % 2 == 0 {
        (Parity::Even, deg / 2 + 1, deg / 2)
    } else {
        (Parity::Odd, deg / 2 + 1, deg / 2 + 1)
    };
    let mut blocks = vec![d1];
    if d2 > 0 {
        blocks.push(d2);
    }
    // deg + 1 Chebyshev nodes determine a polynomial of degree deg
    let constraints = (0..=deg)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * (deg + 1)) as f64;
            let x = nf * (1.0 - theta.cos()) / 2.0;
            let (w1, w2) = weights(parity, x, nf);
            let mut terms = vec![GramTerm {
                block: 0,
                coef: w1,
                v: cheb_basis(d1, x, nf),
            }];
            if d2 > 0 {
                terms.push(GramTerm {
                    block: 1,
                    coef: w2,
                    v: cheb_basis(d2, x, nf),
                });
            }
            let rhs = Rational::from_f64(eval(x) / scale).unwrap_or_default();
            SdpConstraint { terms, rhs }
        })
        .collect();
    let problem = SdpProblem {
        blocks,
        constraints,
    };
    let res = sdp_feasible(&problem, 1e-9)?;
    if res.status != Status::Feasible {
        return Err(OracleError::Lifting(format!(
            "no certificate at degree {deg} ({:?}, margin {:e})",
            res.status, res.margin
        )));
    }
    let mut w = res.witness.expect("feasible has witness").into_iter();
    let t1 = GramSos {
        gram: w.next().expect("t1 block"),
    };
    let t2 = w.next().map_or_else(GramSos::empty, |gram| GramSos { gram });
    let mut lifting = Lifting {
        parity,
        n,
        scale,
        t1,
        t2,
        residual: 0.0,
    };
    lifting.residual = grid
        .iter()
        .map(|&x| (lifting.reconstruct(x) - eval(x)).abs() / scale)
        .fold(0.0, f64::max);
    if lifting.residual > tol {
        return Err(OracleError::Lifting(format!(
            "reconstruction residual {:e} exceeds {tol:e}",
            lifting.residual
        )));
    }
    Ok(lifting)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[i64]) -> UniPoly<HpFloat> {
        UniPoly::<Rational>::from_i64s(cs).to_hp(128)
    }

    #[test]
    fn constant_one() {
        let l = lift_nonneg(&poly(&[1]), 3, 10).unwrap();
        assert_eq!(l.parity, Parity::Even);
        assert!(l.t2.gram.nrows() == 0);
        assert!((l.reconstruct(1.3) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn identity_on_unit_interval() {
        let l = lift_nonneg(&poly(&[0, 1]), 1, 10).unwrap();
        assert_eq!(l.parity, Parity::Odd);
        // t2 must vanish: (1 - x) t2 is zero at x = 0 only if t2(0) = 0, and t2 is constant
        assert!(l.t2.eval(0.5, 1.0).abs() < 1e-6);
        assert!((l.t1.eval(0.5, 1.0) * l.scale - 1.0).abs() < 1e-6);
    }

    #[test]
    fn interval_weight_itself() {
        // p = x (n - x): t1 vanishes at both ends, so t1 = 0 and t2 = 1
        let l = lift_nonneg(&poly(&[0, 5, -1]), 5, 10).unwrap();
        assert_eq!(l.parity, Parity::Even);
        assert!(l.t1.eval(2.0, 5.0).abs() < 1e-6);
        assert!(l.residual < 1e-6);
    }

    #[test]
    fn positive_quartic_and_negative_rejected() {
        // (x - 2)^2 (x - 3)^2 + 1 on [0, 4]
        let q = poly(&[-2, 1]).mul(&poly(&[-3, 1]));
        let p = q.mul(&q).add(&poly(&[1]));
        let l = lift_nonneg(&p, 4, 10).unwrap();
        assert!(l.t1.min_eigenvalue() > -1e-8);
        assert!(lift_nonneg(&poly(&[-1, 1]), 4, 10).is_err());
    }
}
