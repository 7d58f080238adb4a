use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::NumericsError;

/// Smallest precision (in bits) an [`HpFloat`] may carry.
pub const MIN_PRECISION: u32 = 64;

/// Default working precision for certificate construction.
pub const DEFAULT_PRECISION: u32 = 256;

/// Arbitrary-precision binary float with an explicit precision.
///
/// Every operation is correctly rounded (MPFR, round-to-nearest) at the
/// smaller of the operand precisions.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct HpFloat(Float);

fn clamp_prec(prec: u32) -> u32 {
    prec.max(MIN_PRECISION)
}

impl HpFloat {
    pub fn zero(prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), 0))
    }

    pub fn one(prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), 1))
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), v))
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), v))
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), r))
    }

    pub fn from_integer(i: &Integer, prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), i))
    }

    /// Exactly `2^exp`.
    pub fn pow2(exp: i32, prec: u32) -> Self {
        let mut f = Float::with_val(clamp_prec(prec), 1);
        f <<= exp;
        HpFloat(f)
    }

    pub fn pi(prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), Constant::Pi))
    }

    pub fn from_float(f: Float) -> Self {
        let p = clamp_prec(f.prec());
        if p == f.prec() {
            HpFloat(f)
        } else {
            HpFloat(Float::with_val(p, f))
        }
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Re-rounds to a different precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        HpFloat(Float::with_val(clamp_prec(prec), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Exact rational value of this float. Fails for NaN and infinities.
    pub fn to_rational(&self) -> Option<Rational> {
        self.0.to_rational()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// Sign as -1, 0 or 1 (NaN maps to 0).
    pub fn signum_i32(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn abs(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn recip(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn sqrt(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn cos(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.cos_ref()))
    }

    pub fn sin(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.sin_ref()))
    }

    pub fn acos(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.acos_ref()))
    }

    pub fn cosh(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.cosh_ref()))
    }

    pub fn acosh(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.acosh_ref()))
    }

    pub fn ln(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn log2(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.log2_ref()))
    }

    pub fn exp(&self) -> Self {
        HpFloat(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn powi(&self, e: u32) -> Self {
        HpFloat(Float::with_val(self.prec(), (&self.0).pow(e)))
    }

    pub fn mul_i64(&self, v: i64) -> Self {
        HpFloat(Float::with_val(self.prec(), &self.0 * v))
    }

    pub fn add_i64(&self, v: i64) -> Self {
        HpFloat(Float::with_val(self.prec(), &self.0 + v))
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        HpFloat(Float::with_val(self.prec(), &self.0 * r))
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        HpFloat(Float::with_val(self.prec(), &self.0 + r))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other.with_prec(self.prec().min(other.prec()))
        } else {
            let p = self.prec().min(other.prec());
            self.with_prec(p)
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other.with_prec(self.prec().min(other.prec()))
        } else {
            let p = self.prec().min(other.prec());
            self.with_prec(p)
        }
    }

    /// Number of decimal digits that round-trips this precision exactly.
    pub fn roundtrip_digits(prec: u32) -> usize {
        // ceil(p * log10 2) + 1 digits suffice for a p-bit significand.
        ((prec as f64) * std::f64::consts::LOG10_2).ceil() as usize + 2
    }

    /// Decimal string that parses back to the identical value at `self.prec()`.
    pub fn to_decimal_string(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0
            .to_string_radix(10, Some(Self::roundtrip_digits(self.prec())))
    }

    pub fn parse_decimal(s: &str, prec: u32) -> Result<Self, NumericsError> {
        let parsed =
            Float::parse(s.trim()).map_err(|e| NumericsError::Parse(format!("{s:?}: {e}")))?;
        Ok(HpFloat(Float::with_val(clamp_prec(prec), parsed)))
    }
}

impl fmt::Debug for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}b]", self.0.to_string_radix(10, Some(20)), self.prec())
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(17)))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&HpFloat> for &HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: &HpFloat) -> HpFloat {
                let p = self.prec().min(rhs.prec());
                HpFloat(Float::with_val(p, &self.0 $op &rhs.0))
            }
        }
        impl $tr<HpFloat> for HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: HpFloat) -> HpFloat {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&HpFloat> for HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: &HpFloat) -> HpFloat {
                (&self).$method(rhs)
            }
        }
        impl $tr<HpFloat> for &HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: HpFloat) -> HpFloat {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat(-self.0)
    }
}

impl Neg for &HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat(Float::with_val(self.prec(), -&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_min_of_operands() {
        let a = HpFloat::from_i64(3, 256);
        let b = HpFloat::from_i64(7, 128);
        assert_eq!((&a + &b).prec(), 128);
        assert_eq!((&b * &a).prec(), 128);
    }

    #[test]
    fn precision_floor_is_64_bits() {
        assert_eq!(HpFloat::one(8).prec(), MIN_PRECISION);
    }

    #[test]
    fn decimal_roundtrip_is_bit_exact() {
        for prec in [64u32, 256, 1000] {
            let x = HpFloat::from_i64(2, prec).sqrt() / HpFloat::from_i64(-3, prec);
            let s = x.to_decimal_string();
            let y = HpFloat::parse_decimal(&s, prec).unwrap();
            assert_eq!(x, y, "prec {prec}: {s}");
        }
    }

    #[test]
    fn sqrt_two_digits() {
        let r = HpFloat::from_i64(2, 256).sqrt();
        assert!((r.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
    }
}
