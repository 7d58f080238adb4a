//! Lower Hamming layers: `sigma1 = tau^2` with
//! `tau(x) = (1/8) T_d((x - ceil(q) + r0) / N - 1)^m`, `N = n - floor(q)`.

use rug::{Integer, Rational};

use super::certpoly::{CertPoly, ChebPower};
use super::{BuildOptions, CertError};
use crate::model::KnapsackInstance;
use crate::numerics::{smallest_root_shifted_cheb, AnyPoly, HpFloat};

#[derive(Clone, Debug, PartialEq)]
pub struct LowerMeta {
    pub d: u32,
    pub m: u32,
    pub big_n: u64,
    pub r0: HpFloat,
    pub tau: CertPoly,
}

/// `(N, d, m)` with `d = ceil(3 sqrt N)` and `m = ceil(log2(64 / q_hat) / 2)`,
/// both computed in exact integer arithmetic.
pub fn chebyshev_parameters(inst: &KnapsackInstance) -> (u64, u32, u32) {
    let big_n = (Integer::from(inst.n()) - inst.floor_q())
        .to_u64()
        .expect("N fits in u64");
    // smallest d with d^2 >= 9N
    let mut d = (9.0 * big_n as f64).sqrt().floor() as u64;
    while d * d < 9 * big_n {
        d += 1;
    }
    while d > 0 && (d - 1) * (d - 1) >= 9 * big_n {
        d -= 1;
    }
    // smallest m with 4^m q_hat >= 64
    let q_hat = inst.q_hat();
    let mut m = 0u32;
    let mut acc = q_hat;
    while acc < 64 {
        acc <<= 2;
        m += 1;
    }
    (big_n, d as u32, m)
}

pub fn build_sigma1_lower(
    inst: &KnapsackInstance,
    opts: &BuildOptions,
) -> Result<(CertPoly, LowerMeta), CertError> {
    if inst.is_integral() || *inst.q() <= 0 || *inst.q() >= inst.n() {
        return Err(CertError::Regime {
            inst: inst.to_string(),
            regime: super::Regime::LowerLayers,
        });
    }
    let (big_n, d, m) = chebyshev_parameters(inst);
    let prec = opts.precision_bits;

    let shape = |work: u32| {
        let r0 = smallest_root_shifted_cheb(d, big_n, work);
        let n_hp = HpFloat::from_i64(big_n as i64, work);
        let alpha = HpFloat::one(work) / &n_hp;
        let beta = (&r0 - HpFloat::from_integer(&inst.ceil_q(), work)) / &n_hp - HpFloat::one(work);
        (r0, alpha, beta)
    };

    let (r0, alpha, beta) = shape(prec + 64);
    let tau_c = ChebPower {
        d,
        power: m,
        scale: Rational::from((1, 8)),
        alpha,
        beta,
    };
    let degree = 2 * tau_c.degree();

    if degree <= opts.dense_limit {
        let dense_prec = prec + 2 * tau_c.cancellation_bits(inst.n());
        let (r0, alpha, beta) = shape(dense_prec);
        let tau_c = ChebPower {
            alpha,
            beta,
            ..tau_c
        };
        let tau = tau_c.expand(dense_prec);
        let sigma1 = tau.mul(&tau);
        let meta = LowerMeta {
            d,
            m,
            big_n,
            r0,
            tau: CertPoly::Dense(AnyPoly::Float(tau)),
        };
        return Ok((CertPoly::Dense(AnyPoly::Float(sigma1)), meta));
    }

    let sigma1 = ChebPower {
        power: 2 * m,
        scale: Rational::from((1, 64)),
        ..tau_c.clone()
    };
    let meta = LowerMeta {
        d,
        m,
        big_n,
        r0,
        tau: CertPoly::ChebPower(tau_c),
    };
    Ok((CertPoly::ChebPower(sigma1), meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u64, q: &str) -> KnapsackInstance {
        KnapsackInstance::parse(n, q).unwrap()
    }

    #[test]
    fn parameter_examples() {
        assert_eq!(chebyshev_parameters(&inst(100, "1/2")), (100, 30, 4));
        assert_eq!(chebyshev_parameters(&inst(100, "1+2^-20")).2, 13);
        // oracle: independent float formulas away from integer boundaries
        for (n, q) in [(1000u64, "3/10"), (10000, "2^-30"), (37, "5/3")] {
            let i = inst(n, q);
            let (big_n, d, m) = chebyshev_parameters(&i);
            let qh = i.q_hat().to_f64();
            assert_eq!(d as f64, (3.0 * (big_n as f64).sqrt()).ceil());
            assert_eq!(m as f64, (0.5 * (64.0 / qh).log2()).ceil());
        }
        // exact boundary: 9N a perfect square, 64/q_hat a power of 4
        assert_eq!(chebyshev_parameters(&inst(16, "1/4")).1, 12);
        assert_eq!(chebyshev_parameters(&inst(16, "1/4")).2, 4);
    }

    #[test]
    fn degree_law_and_root_at_ceil() {
        for (n, q) in [(100u64, "1/2"), (100, "1+2^-20"), (30, "7/3")] {
            let i = inst(n, q);
            let (s, meta) = build_sigma1_lower(&i, &BuildOptions::default()).unwrap();
            assert_eq!(s.degree(), Some((2 * meta.d * meta.m) as usize));
            let v = s.eval(&Rational::from(i.ceil_q()), 256);
            assert!(v.abs().to_f64() < 1e-38, "{v:?}");
        }
    }

    #[test]
    fn sigma1_is_tau_squared() {
        let i = inst(40, "3/2");
        let (s, meta) = build_sigma1_lower(&i, &BuildOptions::default()).unwrap();
        let (CertPoly::Dense(AnyPoly::Float(s)), CertPoly::Dense(AnyPoly::Float(t))) = (&s, &meta.tau)
        else {
            panic!("expected dense forms");
        };
        assert_eq!(*s, t.mul(t));
        let opts = BuildOptions {
            dense_limit: 0,
            ..BuildOptions::default()
        };
        let (st, mt) = build_sigma1_lower(&i, &opts).unwrap();
        for k in 0..=40 {
            let x = Rational::from(k);
            let tau = mt.tau.eval(&x, 256);
            let sig = st.eval(&x, 256);
            let rel = ((&tau * &tau - &sig).abs() / (sig.abs() + HpFloat::pow2(-200, 256))).to_f64();
            assert!(rel < 1e-60, "k={k} rel={rel}");
        }
    }

    #[test]
    fn dense_and_structured_agree() {
        let i = inst(100, "1/10");
        let dense = build_sigma1_lower(&i, &BuildOptions::default()).unwrap().0;
        let opts = BuildOptions {
            dense_limit: 0,
            ..BuildOptions::default()
        };
        let closed = build_sigma1_lower(&i, &opts).unwrap().0;
        assert!(matches!(closed, CertPoly::ChebPower(_)));
        for k in 0..=100 {
            let x = Rational::from(k);
            let a = dense.eval(&x, 256);
            let b = closed.eval(&x, 256);
            let err = (&a - &b).abs().to_f64();
            assert!(err <= 1e-50 * (1.0 + b.abs().to_f64()), "k={k}");
        }
    }
}
