//! Upper Hamming layers: `sigma1 = L^2 + V`, where `L` interpolates
//! `f(x) = sqrt((x - ceil q) / (x - q))` at `ceil q, ..., n` and
//! `V(x) = prod_{j = ceil q}^{n} (j - x) / (q_hat (n - floor q)!)`.

use rug::{Integer, Rational};

use super::certpoly::CertPoly;
use super::{CertError, Regime};
use crate::model::KnapsackInstance;
use crate::numerics::interp::newton_interpolate;
use crate::numerics::rational::factorial;
use crate::numerics::{interpolation_precision, AnyPoly, HpFloat, UniPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct UpperMeta {
    pub l: UniPoly<HpFloat>,
    pub v: UniPoly<Rational>,
    pub interpolation_precision: u32,
}

/// `f(x) = sqrt((x - ceil) / (x - q))`, for `x` outside `[q, ceil)`.
pub fn target_f(x: &Rational, q: &Rational, ceil: &Integer, prec: u32) -> HpFloat {
    let ratio = Rational::from(x - ceil) / Rational::from(x - q);
    HpFloat::from_rational(&ratio, prec).sqrt()
}

/// `M` with `L = (x - ceil) M`: interpolant of `1 / sqrt((x - ceil)(x - q))`
/// at `ceil + 1, ..., n`. `None` when `ceil = n`.
pub fn interpolant_m(inst: &KnapsackInstance, prec: u32) -> Option<UniPoly<HpFloat>> {
    let ceil = inst.ceil_q();
    if ceil >= inst.n() {
        return None;
    }
    let nodes: Vec<Rational> = (ceil.to_u64().unwrap() + 1..=inst.n())
        .map(Rational::from)
        .collect();
    let values: Vec<HpFloat> = nodes
        .iter()
        .map(|x| {
            let prod = Rational::from(x - &ceil) * Rational::from(x - inst.q());
            HpFloat::from_rational(&prod, prec).sqrt().recip()
        })
        .collect();
    Some(newton_interpolate(&nodes, &values).expect("distinct nodes"))
}

pub fn build_v(inst: &KnapsackInstance) -> UniPoly<Rational> {
    let ceil = inst.ceil_q().to_u64().unwrap();
    let big_n = (Integer::from(inst.n()) - inst.floor_q()).to_u32().unwrap();
    let prefactor = (inst.q_hat() * Rational::from(factorial(big_n))).recip();
    (ceil..=inst.n())
        .fold(UniPoly::constant(prefactor), |acc, j| {
            // (j - x)
            acc.mul(&UniPoly::new(vec![Rational::from(j), Rational::from(-1)]))
        })
}

pub fn build_sigma1_upper(
    inst: &KnapsackInstance,
    prec: u32,
) -> Result<(CertPoly, UpperMeta), CertError> {
    if inst.is_integral() || *inst.q() <= 0 || *inst.q() >= inst.n() {
        return Err(CertError::Regime {
            inst: inst.to_string(),
            regime: Regime::UpperLayers,
        });
    }
    let ceil = inst.ceil_q();
    let c = ceil.to_u64().unwrap();
    let nodes_count = (inst.n() - c + 1) as usize;
    let work = interpolation_precision(prec, nodes_count);

    let l = if c == inst.n() {
        UniPoly::zero()
    } else {
        let nodes: Vec<Rational> = (c..=inst.n()).map(Rational::from).collect();
        let values: Vec<HpFloat> = nodes
            .iter()
            .map(|x| target_f(x, inst.q(), &ceil, work))
            .collect();
        newton_interpolate(&nodes, &values)?
    };
    let v = build_v(inst);
    let sigma1 = l.mul(&l).add(&v.to_hp(work));
    let meta = UpperMeta {
        l,
        v,
        interpolation_precision: work,
    };
    Ok((CertPoly::Dense(AnyPoly::Float(sigma1)), meta))
}
