//! Exact rational helpers on top of `rug::Rational` (always in lowest terms,
//! positive denominator).

use rug::{Integer, Rational};

pub fn floor(q: &Rational) -> Integer {
    q.floor_ref().into()
}

pub fn ceil(q: &Rational) -> Integer {
    q.ceil_ref().into()
}

pub fn is_integral(q: &Rational) -> bool {
    *q.denom() == 1
}

pub fn from_i64(v: i64) -> Rational {
    Rational::from(v)
}

pub fn factorial(k: u32) -> Integer {
    Integer::from(Integer::factorial(k))
}

/// Closest rational to `x` whose denominator does not exceed `max_den`.
///
/// Continued-fraction convergents plus the best semiconvergent, as in the
/// classical `limit_denominator` routine.
pub fn limit_denominator(x: &Rational, max_den: &Integer) -> Rational {
    if x.denom() <= max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        Integer::from(0),
        Integer::from(1),
        Integer::from(1),
        Integer::from(0),
    );
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let (a, rem) = <(Integer, Integer)>::from(n.div_rem_floor_ref(&d));
        let q2 = Integer::from(&q0 + &a * &q1);
        if &q2 > max_den {
            break;
        }
        let p2 = Integer::from(&p0 + &a * &p1);
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        n = std::mem::replace(&mut d, rem);
        if d == 0 {
            break;
        }
    }
    let k = Integer::from(max_den - &q0) / &q1;
    let bound1 = Rational::from((Integer::from(&p0 + &k * &p1), Integer::from(&q0 + &k * &q1)));
    let bound2 = Rational::from((p1, q1));
    let e1 = Rational::from(&bound1 - x).abs();
    let e2 = Rational::from(&bound2 - x).abs();
    if e2 <= e1 {
        bound2
    } else {
        bound1
    }
}
