use std::fmt;

use rug::Rational;
use serde::{Deserialize, Serialize};

use super::hpfloat::HpFloat;
use super::NumericsError;

/// Which field a coefficient lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffKind {
    Rational,
    Float,
}

/// Field operations needed by [`UniPoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    const KIND: CoeffKind;
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }
}

impl Coeff for Rational {
    const KIND: CoeffKind = CoeffKind::Rational;
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn from_i64_like(&self, v: i64) -> Self {
        Rational::from(v)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
}

impl Coeff for HpFloat {
    const KIND: CoeffKind = CoeffKind::Float;
    fn zero_like(&self) -> Self {
        HpFloat::zero(self.prec())
    }
    fn from_i64_like(&self, v: i64) -> Self {
        HpFloat::from_i64(v, self.prec())
    }
    fn is_zero(&self) -> bool {
        HpFloat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Dense univariate polynomial; `coeffs[i]` multiplies `x^i`.
///
/// Trailing zero coefficients are never stored, so the zero polynomial is the
/// empty vector.
#[derive(Clone, PartialEq)]
pub struct UniPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> UniPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`
    pub fn linear_root(root: C) -> Self {
        let one = root.one_like();
        Self::new(vec![root.neg(), one])
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest index with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.coeffs.clone();
        for (o, s) in out.iter_mut().zip(&short.coeffs) {
            *o = o.add(s);
        }
        Self::new(out)
    }

    pub fn neg(&self) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(Coeff::neg).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// `self^e`. The zero polynomial stays zero for every `e` (it carries no
    /// coefficient to build a typed one from).
    pub fn pow(&self, mut e: u32) -> Self {
        let Some(first) = self.coeffs.first() else {
            return Self::zero();
        };
        let mut result = Self::constant(first.one_like());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `p(alpha * x + beta)`
    pub fn compose_affine(&self, alpha: &C, beta: &C) -> Self {
        let inner = Self::new(vec![beta.clone(), alpha.clone()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&inner).add(&Self::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul(&c.from_i64_like(i as i64)))
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &C) -> C {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Synthetic division by `(x - root)`; returns `(quotient, remainder)`.
    pub fn div_linear(&self, root: &C) -> (Self, C) {
        if self.coeffs.is_empty() {
            return (Self::zero(), root.zero_like());
        }
        let n = self.coeffs.len();
        let mut q = Vec::with_capacity(n - 1);
        let mut acc = self.coeffs[n - 1].clone();
        for c in self.coeffs[..n - 1].iter().rev() {
            q.push(acc.clone());
            acc = acc.mul(root).add(c);
        }
        q.reverse();
        (Self::new(q), acc)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> UniPoly<D> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

impl UniPoly<Rational> {
    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn to_hp(&self, prec: u32) -> UniPoly<HpFloat> {
        self.map(|c| HpFloat::from_rational(c, prec))
    }

    /// Evaluate exactly at a rational point and round once.
    pub fn eval_hp(&self, x: &HpFloat) -> HpFloat {
        self.to_hp(x.prec()).eval(x)
    }
}

impl UniPoly<HpFloat> {
    pub fn prec(&self) -> Option<u32> {
        self.coeffs.iter().map(HpFloat::prec).min()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        self.map(|c| c.with_prec(prec))
    }

    /// Largest coefficient magnitude times `radius^i`, a cheap bound on
    /// `sum |a_i| radius^i` used to size precision and tolerances.
    pub fn abs_sum_at(&self, radius: &HpFloat) -> HpFloat {
        let mut acc = radius.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * radius) + &c.abs();
        }
        acc
    }
}

impl<C: Coeff> fmt::Debug for UniPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

/// A polynomial tagged with its coefficient field, for code paths that only
/// learn the field at run time. Mixing fields is an error; convert first.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoly {
    Rational(UniPoly<Rational>),
    Float(UniPoly<HpFloat>),
}

/// A scalar tagged with its field.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyScalar {
    Rational(Rational),
    Float(HpFloat),
}

fn mismatch(op: &'static str) -> NumericsError {
    NumericsError::KindMismatch { op }
}

impl AnyPoly {
    pub fn kind(&self) -> CoeffKind {
        match self {
            AnyPoly::Rational(_) => CoeffKind::Rational,
            AnyPoly::Float(_) => CoeffKind::Float,
        }
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            AnyPoly::Rational(p) => p.degree(),
            AnyPoly::Float(p) => p.degree(),
        }
    }

    pub fn to_float(&self, prec: u32) -> UniPoly<HpFloat> {
        match self {
            AnyPoly::Rational(p) => p.to_hp(prec),
            AnyPoly::Float(p) => p.clone(),
        }
    }

    pub fn add(&self, other: &AnyPoly) -> Result<AnyPoly, NumericsError> {
        match (self, other) {
            (AnyPoly::Rational(a), AnyPoly::Rational(b)) => Ok(AnyPoly::Rational(a.add(b))),
            (AnyPoly::Float(a), AnyPoly::Float(b)) => Ok(AnyPoly::Float(a.add(b))),
            _ => Err(mismatch("add")),
        }
    }

    pub fn sub(&self, other: &AnyPoly) -> Result<AnyPoly, NumericsError> {
        match (self, other) {
            (AnyPoly::Rational(a), AnyPoly::Rational(b)) => Ok(AnyPoly::Rational(a.sub(b))),
            (AnyPoly::Float(a), AnyPoly::Float(b)) => Ok(AnyPoly::Float(a.sub(b))),
            _ => Err(mismatch("sub")),
        }
    }

    pub fn mul(&self, other: &AnyPoly) -> Result<AnyPoly, NumericsError> {
        match (self, other) {
            (AnyPoly::Rational(a), AnyPoly::Rational(b)) => Ok(AnyPoly::Rational(a.mul(b))),
            (AnyPoly::Float(a), AnyPoly::Float(b)) => Ok(AnyPoly::Float(a.mul(b))),
            _ => Err(mismatch("mul")),
        }
    }

    pub fn scale(&self, c: &AnyScalar) -> Result<AnyPoly, NumericsError> {
        match (self, c) {
            (AnyPoly::Rational(a), AnyScalar::Rational(c)) => Ok(AnyPoly::Rational(a.scale(c))),
            (AnyPoly::Float(a), AnyScalar::Float(c)) => Ok(AnyPoly::Float(a.scale(c))),
            _ => Err(mismatch("scale")),
        }
    }

    pub fn compose_affine(
        &self,
        alpha: &AnyScalar,
        beta: &AnyScalar,
    ) -> Result<AnyPoly, NumericsError> {
        match (self, alpha, beta) {
            (AnyPoly::Rational(p), AnyScalar::Rational(a), AnyScalar::Rational(b)) => {
                Ok(AnyPoly::Rational(p.compose_affine(a, b)))
            }
            (AnyPoly::Float(p), AnyScalar::Float(a), AnyScalar::Float(b)) => {
                Ok(AnyPoly::Float(p.compose_affine(a, b)))
            }
            _ => Err(mismatch("compose_affine")),
        }
    }

    pub fn derivative(&self) -> AnyPoly {
        match self {
            AnyPoly::Rational(p) => AnyPoly::Rational(p.derivative()),
            AnyPoly::Float(p) => AnyPoly::Float(p.derivative()),
        }
    }

    pub fn eval(&self, x: &AnyScalar) -> Result<AnyScalar, NumericsError> {
        match (self, x) {
            (AnyPoly::Rational(p), AnyScalar::Rational(x)) => Ok(AnyScalar::Rational(p.eval(x))),
            (AnyPoly::Float(p), AnyScalar::Float(x)) => Ok(AnyScalar::Float(p.eval(x))),
            _ => Err(mismatch("eval")),
        }
    }
}
