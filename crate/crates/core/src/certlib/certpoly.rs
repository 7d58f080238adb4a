//! Univariate polynomials as they appear in certificates: either dense
//! coefficient vectors or compact closed forms whose dense expansion would be
//! too large to handle (degree ~10^4 at tens of thousands of bits).

use rug::{Integer, Rational};

use crate::numerics::{cheb_eval, cheb_t, AnyPoly, HpFloat, UniPoly};

#[derive(Clone, Debug, PartialEq)]
pub enum CertPoly {
    Dense(AnyPoly),
    /// `scale * T_d(alpha x + beta)^power`
    ChebPower(ChebPower),
    /// `(x - ceil) - (x - q) * sigma1(x)`
    Complement {
        sigma1: Box<CertPoly>,
        q: Rational,
        ceil: Integer,
    },
    /// `(mul * inner(x + shift) + add) / div`
    Affine {
        inner: Box<CertPoly>,
        shift: Integer,
        mul: Rational,
        add: Rational,
        div: Option<HpFloat>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChebPower {
    pub d: u32,
    pub power: u32,
    pub scale: Rational,
    pub alpha: HpFloat,
    pub beta: HpFloat,
}

impl ChebPower {
    pub fn degree(&self) -> usize {
        self.d as usize * self.power as usize
    }

    pub fn eval(&self, x: &Rational, prec: u32) -> HpFloat {
        let work = prec + 32;
        let y = &self.alpha.with_prec(work) * &HpFloat::from_rational(x, work)
            + self.beta.with_prec(work);
        cheb_eval(self.d, &y)
            .powi(self.power)
            .mul_rational(&self.scale)
            .with_prec(prec)
    }

    /// Bits lost to cancellation when expanding in the monomial basis and
    /// evaluating on `[0, x_max]`.
    pub fn cancellation_bits(&self, x_max: u64) -> u32 {
        let z = self.alpha.to_f64().abs() * x_max as f64 + self.beta.to_f64().abs();
        let growth = (z + (z * z + 1.0).sqrt()).log2();
        (self.degree() as f64 * growth).ceil() as u32 + 16
    }

    /// Monomial coefficients at `prec` bits.
    pub fn expand(&self, prec: u32) -> UniPoly<HpFloat> {
        let inner = cheb_t(self.d)
            .to_hp(prec)
            .compose_affine(&self.alpha.with_prec(prec), &self.beta.with_prec(prec));
        inner
            .pow(self.power)
            .scale(&HpFloat::from_rational(&self.scale, prec))
    }
}

impl CertPoly {
    pub fn degree(&self) -> Option<usize> {
        match self {
            CertPoly::Dense(p) => p.degree(),
            CertPoly::ChebPower(c) => Some(c.degree()),
            CertPoly::Complement { sigma1, .. } => match sigma1.degree() {
                // (x - ceil) - (x - q) sigma1: leading term from the product
                Some(d) => Some(d + 1),
                None => Some(1),
            },
            CertPoly::Affine { inner, mul, add, .. } => {
                let inner_deg = if *mul == 0 { None } else { inner.degree() };
                match inner_deg {
                    Some(d) => Some(d),
                    None if *add != 0 => Some(0),
                    None => None,
                }
            }
        }
    }

    /// Value at `x`, correctly rounded for dense rational forms and accurate
    /// to roughly `prec` bits otherwise.
    pub fn eval(&self, x: &Rational, prec: u32) -> HpFloat {
        match self {
            CertPoly::Dense(AnyPoly::Rational(p)) => HpFloat::from_rational(&p.eval(x), prec),
            CertPoly::Dense(AnyPoly::Float(p)) => {
                let work = p.prec().unwrap_or(prec).max(prec);
                p.with_prec(work)
                    .eval(&HpFloat::from_rational(x, work))
                    .with_prec(prec)
            }
            CertPoly::ChebPower(c) => c.eval(x, prec),
            CertPoly::Complement { sigma1, q, ceil } => {
                let work = prec + 16;
                let s = sigma1.eval(x, work);
                let lin = HpFloat::from_rational(&Rational::from(x - ceil), work);
                let dx = HpFloat::from_rational(&Rational::from(x - q), work);
                (lin - &dx * &s).with_prec(prec)
            }
            CertPoly::Affine {
                inner,
                shift,
                mul,
                add,
                div,
            } => {
                let xs = Rational::from(x + shift);
                let v = inner.eval(&xs, prec).mul_rational(mul).add_rational(add);
                match div {
                    Some(dv) => v / dv.with_prec(prec),
                    None => v,
                }
            }
        }
    }

    /// Monomial coefficients, or `None` when the expansion would exceed
    /// `max_degree` or needs a closed form that has no finite expansion.
    pub fn to_dense(&self, max_degree: usize, prec: u32) -> Option<AnyPoly> {
        if self.degree().unwrap_or(0) > max_degree {
            return None;
        }
        Some(match self {
            CertPoly::Dense(p) => p.clone(),
            CertPoly::ChebPower(c) => AnyPoly::Float(c.expand(prec)),
            CertPoly::Complement { sigma1, q, ceil } => {
                let s = sigma1.to_dense(max_degree, prec)?;
                AnyPoly::Float(complement_dense(&s.to_float(prec), q, ceil, prec))
            }
            CertPoly::Affine {
                inner,
                shift,
                mul,
                add,
                div,
            } => {
                let p = inner.to_dense(max_degree, prec)?;
                match (p, div) {
                    (AnyPoly::Rational(p), None) => AnyPoly::Rational(
                        p.compose_affine(&Rational::from(1), &Rational::from(shift))
                            .scale(mul)
                            .add(&UniPoly::constant(add.clone())),
                    ),
                    (p, div) => {
                        let p = p.to_float(prec);
                        let one = HpFloat::one(prec);
                        let mut out = p
                            .compose_affine(&one, &HpFloat::from_integer(shift, prec))
                            .scale(&HpFloat::from_rational(mul, prec))
                            .add(&UniPoly::constant(HpFloat::from_rational(add, prec)));
                        if let Some(dv) = div {
                            out = out.scale(&dv.with_prec(prec).recip());
                        }
                        AnyPoly::Float(out)
                    }
                }
            }
        })
    }

    pub fn is_structured(&self) -> bool {
        !matches!(self, CertPoly::Dense(_))
    }
}

/// `(x - ceil) - (x - q) * s` in floating point.
pub fn complement_dense(s: &UniPoly<HpFloat>, q: &Rational, ceil: &Integer, prec: u32) -> UniPoly<HpFloat> {
    let lin = UniPoly::new(vec![HpFloat::from_integer(&Integer::from(-ceil), prec), HpFloat::one(prec)]);
    let xq = UniPoly::new(vec![HpFloat::from_rational(&Rational::from(-q), prec), HpFloat::one(prec)]);
    lin.sub(&xq.mul(s))
}

/// `(x - ceil) - (x - q) * s` exactly.
pub fn complement_exact(s: &UniPoly<Rational>, q: &Rational, ceil: &Integer) -> UniPoly<Rational> {
    let lin = UniPoly::new(vec![Rational::from(-ceil), Rational::from(1)]);
    let xq = UniPoly::new(vec![Rational::from(-q), Rational::from(1)]);
    lin.sub(&xq.mul(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn cheb_power_closed_form_matches_expansion() {
        let prec = 256;
        let c = ChebPower {
            d: 5,
            power: 3,
            scale: r(1, 8),
            alpha: HpFloat::from_i64(1, prec) / HpFloat::from_i64(7, prec),
            beta: HpFloat::from_f64(-0.9, prec),
        };
        let dense = c.expand(prec + c.cancellation_bits(7));
        for k in 0..=14 {
            let x = r(k, 2);
            let a = c.eval(&x, prec);
            let b = dense.eval(&HpFloat::from_rational(&x, dense.prec().unwrap()));
            let err = (&a - &b).abs().to_f64();
            assert!(err <= 1e-60 * (1.0 + b.to_f64().abs()), "x={x} err={err}");
        }
        assert_eq!(dense.degree(), Some(15));
    }

    #[test]
    fn complement_and_affine_agree_with_dense() {
        let prec = 200;
        let s = CertPoly::Dense(AnyPoly::Rational(UniPoly::from_i64s(&[3, -1, 2])));
        let comp = CertPoly::Complement {
            sigma1: Box::new(s.clone()),
            q: r(5, 2),
            ceil: Integer::from(3),
        };
        let aff = CertPoly::Affine {
            inner: Box::new(comp.clone()),
            shift: Integer::from(2),
            mul: r(-2, 3),
            add: r(1, 1),
            div: Some(HpFloat::from_i64(5, prec)),
        };
        assert_eq!(comp.degree(), Some(3));
        let dc = comp.to_dense(100, prec).unwrap();
        let da = aff.to_dense(100, prec).unwrap().to_float(prec);
        for k in -3..6 {
            let x = Rational::from(k);
            let v = comp.eval(&x, prec);
            let w = dc.to_float(prec).eval(&HpFloat::from_rational(&x, prec));
            assert!((&v - &w).abs().to_f64() < 1e-50);
            let v = aff.eval(&x, prec);
            let w = da.eval(&HpFloat::from_rational(&x, prec));
            assert!((&v - &w).abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn dense_refused_above_limit() {
        let c = CertPoly::ChebPower(ChebPower {
            d: 30,
            power: 10,
            scale: r(1, 1),
            alpha: HpFloat::one(64),
            beta: HpFloat::zero(64),
        });
        assert!(c.to_dense(100, 256).is_none());
    }
}
