//! The identity behind `A_{k,r}(x) = (|x| - r) prod_{j<k} (|x| - j)`:
//! on integers `t >= 0`,
//! `(t - r) prod_{j<k}(t - j) = (k - r) k! C(t, k) + (k + 1)! C(t, k + 1)`,
//! and both binomials are squares of elementary symmetric polynomials in
//! `x_i^2` over the hypercube.

use rug::{Integer, Rational};

use super::CertError;
use crate::numerics::{rational::factorial, UniPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct AkrIdentity {
    pub k: u32,
    pub r: Rational,
    pub lhs: UniPoly<Rational>,
    pub rhs: UniPoly<Rational>,
    pub equal: bool,
}

/// `t (t - 1) ... (t - k + 1)`
pub fn falling_factorial(k: u32) -> UniPoly<Rational> {
    (0..k).fold(UniPoly::from_i64s(&[1]), |acc, j| {
        acc.mul(&UniPoly::linear_root(Rational::from(j)))
    })
}

/// `C(t, k)` as a polynomial in `t`.
pub fn binomial_poly(k: u32) -> UniPoly<Rational> {
    let kf = Rational::from(factorial(k));
    falling_factorial(k).scale(&kf.recip())
}

pub fn akr_polynomial(k: u32, r: &Rational) -> Result<AkrIdentity, CertError> {
    if k == 0 || *r <= k - 1 || *r > k {
        return Err(CertError::AkrRange {
            k,
            r: r.to_string(),
        });
    }
    let lhs = UniPoly::linear_root(r.clone()).mul(&falling_factorial(k));
    let kf = Rational::from(factorial(k));
    let k1f = Rational::from(factorial(k + 1));
    let c1 = Rational::from(Rational::from(Integer::from(k)) - r) * &kf;
    let rhs = binomial_poly(k).scale(&c1).add(&binomial_poly(k + 1).scale(&k1f));
    let equal = lhs == rhs;
    Ok(AkrIdentity {
        k,
        r: r.clone(),
        lhs,
        rhs,
        equal,
    })
}
