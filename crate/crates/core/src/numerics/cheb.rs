//! Chebyshev polynomials of the first kind.

use rug::Rational;

use super::hpfloat::HpFloat;
use super::poly::UniPoly;

/// `T_d` with exact integer coefficients, from `T_{k+1} = 2x T_k - T_{k-1}`.
pub fn cheb_t(d: u32) -> UniPoly<Rational> {
    let mut prev = UniPoly::from_i64s(&[1]);
    if d == 0 {
        return prev;
    }
    let mut cur = UniPoly::from_i64s(&[0, 1]);
    let two_x = UniPoly::from_i64s(&[0, 2]);
    for _ in 1..d {
        let next = two_x.mul(&cur).sub(&prev);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Smallest root of `T_d(x / big_n - 1)`, i.e. `big_n * (1 - cos(pi / (2d)))`.
///
/// Computed as `2 big_n sin^2(pi / (4d))` to avoid the cancellation in
/// `1 - cos`.
pub fn smallest_root_shifted_cheb(d: u32, big_n: u64, prec: u32) -> HpFloat {
    assert!(d >= 1 && big_n >= 1, "d and N must be positive");
    let work = prec + 32;
    let angle = HpFloat::pi(work) / HpFloat::from_i64(4 * i64::from(d), work);
    let s = angle.sin();
    let r0 = (&s * &s).mul_i64(2 * big_n as i64);
    r0.with_prec(prec)
}

/// `T_d(y)` via the trigonometric / hyperbolic closed form.
///
/// Accurate to a few ulps times `d^2` at the precision of `y`, which is the
/// conditioning of `T_d` itself on `[-1, 1]`.
pub fn cheb_eval(d: u32, y: &HpFloat) -> HpFloat {
    let prec = y.prec();
    let work = prec + 16 + (32 - d.leading_zeros());
    let yw = y.with_prec(work);
    let one = HpFloat::one(work);
    let dd = HpFloat::from_i64(i64::from(d), work);
    let v = if yw.abs() <= one {
        (&dd * &yw.acos()).cos()
    } else if yw > one {
        (&dd * &yw.acosh()).cosh()
    } else {
        let mag = (&dd * &(-&yw).acosh()).cosh();
        if d % 2 == 1 {
            -mag
        } else {
            mag
        }
    };
    v.with_prec(prec)
}

/// `T_d(y)` in double precision via the three-term recurrence.
pub fn cheb_eval_f64(d: u32, y: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, y);
    for _ in 1..d {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_forms() {
        assert_eq!(cheb_t(0), UniPoly::from_i64s(&[1]));
        assert_eq!(cheb_t(1), UniPoly::from_i64s(&[0, 1]));
        assert_eq!(cheb_t(2), UniPoly::from_i64s(&[-1, 0, 2]));
        // oracle: unrolled by hand from the recurrence
        assert_eq!(cheb_t(5), UniPoly::from_i64s(&[0, 5, 0, -20, 0, 16]));
    }

    #[test]
    fn leading_coefficient_power_of_two() {
        for d in 1..30u32 {
            let t = cheb_t(d);
            assert_eq!(t.degree(), Some(d as usize));
            assert_eq!(*t.leading().unwrap(), rug::Integer::from(1) << (d - 1));
        }
    }

    #[test]
    fn cos_identity() {
        let prec = 256;
        let tol = HpFloat::pow2(-(prec as i32) / 2, prec);
        for d in [0u32, 1, 3, 7, 20] {
            let t = cheb_t(d).to_hp(prec);
            for k in 0..=16 {
                let theta = HpFloat::pi(prec).mul_rational(&Rational::from((k, 16)));
                let lhs = t.eval(&theta.cos());
                let rhs = (&theta.mul_i64(i64::from(d))).cos();
                assert!((&lhs - &rhs).abs() <= tol, "d={d} k={k}");
                let closed = cheb_eval(d, &theta.cos());
                assert!((&closed - &rhs).abs() <= tol, "closed d={d} k={k}");
            }
        }
    }

    #[test]
    fn closed_form_matches_polynomial_outside_unit_interval() {
        let prec = 256;
        for d in [1u32, 4, 9] {
            let t = cheb_t(d).to_hp(prec);
            for y in [-3.5f64, -1.25, 1.5, 2.0] {
                let y = HpFloat::from_f64(y, prec);
                let a = t.eval(&y);
                let b = cheb_eval(d, &y);
                let rel = ((&a - &b).abs() / a.abs()).to_f64();
                assert!(rel < 1e-60, "d={d} rel={rel}");
            }
        }
    }

    #[test]
    fn smallest_root_examples() {
        let r = smallest_root_shifted_cheb(1, 7, 256);
        assert!((r.to_f64() - 7.0).abs() < 1e-30);
        let r = smallest_root_shifted_cheb(2, 1, 256);
        assert!((r.to_f64() - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn smallest_root_is_a_root_and_matches_bisection() {
        let prec = 256;
        let tol = HpFloat::pow2(-(prec as i32) / 2, prec);
        for d in 1..12u32 {
            for big_n in [1u64, 3, 10] {
                let r0 = smallest_root_shifted_cheb(d, big_n, prec);
                let t = cheb_t(d).to_hp(prec);
                let inv_n = HpFloat::one(prec) / HpFloat::from_i64(big_n as i64, prec);
                let shifted = t.compose_affine(&inv_n, &HpFloat::from_i64(-1, prec));
                assert!(shifted.eval(&r0).abs() <= tol, "d={d} N={big_n}");
                // independent root-finder: bisection on [0, r_guess] where T changes sign
                let mut lo = HpFloat::zero(prec);
                let mut hi = HpFloat::from_f64(
                    big_n as f64 * (1.0 - (std::f64::consts::PI / (2.0 * d as f64)).cos()) * 1.5
                        + 1e-9,
                    prec,
                );
                let slo = shifted.eval(&lo).signum_i32();
                for _ in 0..200 {
                    let mid = (&lo + &hi).mul_rational(&Rational::from((1, 2)));
                    if shifted.eval(&mid).signum_i32() == slo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                assert!((&lo - &r0).abs().to_f64() < 1e-40, "d={d} N={big_n}");
            }
        }
    }

    #[test]
    fn f64_recurrence_agrees() {
        for d in 0..15u32 {
            let y = -1.3;
            let a = cheb_eval_f64(d, y);
            let b = cheb_eval(d, &HpFloat::from_f64(y, 128)).to_f64();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
