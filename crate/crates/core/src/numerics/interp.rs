//! Newton divided-difference interpolation at rational nodes.

use rug::Rational;

use super::hpfloat::HpFloat;
use super::poly::UniPoly;
use super::NumericsError;

/// Newton-form coefficients `c_i = f[x_0, ..., x_i]`.
pub fn divided_differences(
    nodes: &[Rational],
    values: &[HpFloat],
) -> Result<Vec<HpFloat>, NumericsError> {
    if nodes.is_empty() {
        return Err(NumericsError::Empty);
    }
    if nodes.len() != values.len() {
        return Err(NumericsError::LengthMismatch {
            left: nodes.len(),
            right: values.len(),
        });
    }
    for i in 0..nodes.len() {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(NumericsError::DuplicateNodes);
            }
        }
    }
    let mut c = values.to_vec();
    for level in 1..nodes.len() {
        for i in (level..nodes.len()).rev() {
            let gap = Rational::from(&nodes[i] - &nodes[i - level]);
            let diff = &c[i] - &c[i - 1];
            c[i] = diff.mul_rational(&gap.recip());
        }
    }
    Ok(c)
}

/// The unique polynomial of degree `< nodes.len()` through `(nodes[i], values[i])`.
///
/// Works at the smallest precision among `values`.
pub fn newton_interpolate(
    nodes: &[Rational],
    values: &[HpFloat],
) -> Result<UniPoly<HpFloat>, NumericsError> {
    let c = divided_differences(nodes, values)?;
    let prec = values.iter().map(HpFloat::prec).min().unwrap_or(64);
    let mut p = UniPoly::constant(c[c.len() - 1].clone());
    for i in (0..c.len() - 1).rev() {
        let root = HpFloat::from_rational(&nodes[i], prec);
        p = p
            .mul(&UniPoly::linear_root(root))
            .add(&UniPoly::constant(c[i].clone()));
    }
    Ok(p)
}

/// Evaluates the Newton form directly, without expanding to monomials.
pub fn newton_eval(nodes: &[Rational], coeffs: &[HpFloat], x: &HpFloat) -> HpFloat {
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for i in (0..coeffs.len() - 1).rev() {
        let shift = x - HpFloat::from_rational(&nodes[i], x.prec());
        acc = &acc * &shift + &coeffs[i];
    }
    acc
}
