//! Certificates rewritten into other forms: the refutation of `|x| <= ceil(q) - 1`,
//! the normalized witness polynomial used by the degree lower bound, and the
//! factored upper-layer `sigma0`.

use rug::{Integer, Rational};

use super::akr::{akr_polynomial, AkrIdentity};
use super::certpoly::CertPoly;
use super::verify::{check_root_structure, LemmaChecks, VerifyOptions};
use super::{CertError, Certificate, Regime};
use crate::numerics::rational::limit_denominator;
use crate::numerics::{HpFloat, UniPoly};
use crate::oracle::{lift_nonneg, Lifting};

/// `-1 = h(x) + g(x)(|x| - q)` on the hypercube.
#[derive(Clone, Debug)]
pub struct Refutation {
    pub h: CertPoly,
    pub g: CertPoly,
    /// `1 / (ceil q - q)`, the factor amplifying certificate residuals.
    pub conditioning: f64,
    pub max_residual: f64,
    pub checks: LemmaChecks,
}

pub fn to_refutation(cert: &Certificate, opts: &VerifyOptions) -> Refutation {
    let gap = Rational::from(Rational::from(cert.ceil_q()) - cert.q());
    let inv = gap.clone().recip();
    let h = CertPoly::Affine {
        inner: Box::new(cert.sigma0.clone()),
        shift: Integer::ZERO,
        mul: inv.clone(),
        add: Rational::new(),
        div: None,
    };
    let g = CertPoly::Affine {
        inner: Box::new(cert.sigma1.clone()),
        shift: Integer::ZERO,
        mul: inv.clone(),
        add: -inv.clone(),
        div: None,
    };
    let prec = cert.eval_precision();
    let tol = HpFloat::from_f64(opts.tol, prec);
    let mut identity = true;
    let mut h_nonneg = true;
    let mut max_res = 0.0f64;
    for k in 0..=cert.inst.n() {
        let x = Rational::from(k);
        let hv = h.eval(&x, prec);
        let gv = g.eval(&x, prec);
        let dq = HpFloat::from_rational(&Rational::from(&x - cert.q()), prec);
        let scale = (hv.abs() + (&gv * &dq).abs()).add_i64(1);
        let res = (&hv + &gv * &dq).add_i64(1).abs();
        identity &= res <= &tol * &scale;
        h_nonneg &= hv >= -(&tol * &scale);
        max_res = max_res.max((res / scale).to_f64());
    }
    let mut checks = LemmaChecks::new();
    checks.insert("refutation_identity".into(), identity);
    checks.insert("h_nonneg_on_grid".into(), h_nonneg);
    Refutation {
        h,
        g,
        conditioning: inv.to_f64(),
        max_residual: max_res,
        checks,
    }
}

/// `P(x) = sigma1(x + floor q) / sigma1(floor q)`.
#[derive(Clone, Debug)]
pub struct CrWitness {
    pub p: CertPoly,
    pub p_at_zero: HpFloat,
    pub max_value: f64,
    pub min_value: f64,
    pub checks: LemmaChecks,
}

pub fn extract_cr_witness(cert: &Certificate, opts: &VerifyOptions) -> Result<CrWitness, CertError> {
    let prec = cert.eval_precision();
    let floor = cert.floor_q();
    let base = cert.sigma1.eval(&Rational::from(&floor), prec);
    if base.signum_i32() <= 0 {
        return Err(CertError::Invalid(format!(
            "sigma1(floor q) = {} is not positive",
            base.to_f64()
        )));
    }
    let p = CertPoly::Affine {
        inner: Box::new(cert.sigma1.clone()),
        shift: floor.clone(),
        mul: Rational::from(1),
        add: Rational::new(),
        div: Some(base),
    };
    let p0 = p.eval(&Rational::new(), prec);
    let q_hat = HpFloat::from_rational(&cert.inst.q_hat(), prec);
    let tol = HpFloat::from_f64(opts.tol, prec);
    let span = (Integer::from(cert.inst.n()) - &floor).to_u64().unwrap_or(0);
    let mut in_range = true;
    let mut max_v = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    for j in 1..=span {
        let v = p.eval(&Rational::from(j), prec);
        in_range &= v >= -tol.clone() && v <= &q_hat + &tol;
        max_v = max_v.max(v.to_f64());
        min_v = min_v.min(v.to_f64());
    }
    let mut checks = LemmaChecks::new();
    checks.insert("p_at_zero_is_one".into(), p0 == HpFloat::one(prec));
    checks.insert("p_in_zero_qhat".into(), in_range);
    checks.insert("degree_preserved".into(), p.degree() == cert.sigma1.degree());
    Ok(CrWitness {
        p,
        p_at_zero: p0,
        max_value: max_v,
        min_value: min_v,
        checks,
    })
}

/// `sigma0 = p (x - r) prod_{j = ceil q}^{n} (x - j)^{m_j}` with odd `m_j`,
/// equivalently `(-1)^{n - ceil q} p A_{n - floor q, n - r}(n - x) prod (x - j)^{m_j - 1}`.
#[derive(Clone, Debug)]
pub struct SosDecomposition {
    pub p: UniPoly<HpFloat>,
    pub r: HpFloat,
    pub r_rational: Rational,
    /// `(j, m_j)` for `j = ceil q, ..., n`.
    pub multiplicities: Vec<(u64, u32)>,
    pub akr: AkrIdentity,
    /// `(-1)^{n - ceil q}`, making `sign * p` positive on `[0, n]`.
    pub p_sign: i32,
    pub lifting: Option<Lifting>,
    pub lifting_error: Option<String>,
    pub factorization_residual: f64,
    pub checks: LemmaChecks,
}

pub fn materialize_upper_sos(
    cert: &Certificate,
    opts: &VerifyOptions,
) -> Result<SosDecomposition, CertError> {
    if cert.regime != Regime::UpperLayers {
        return Err(CertError::Invalid("factorization needs an upper-layer certificate".into()));
    }
    let CertPoly::Dense(s0) = &cert.sigma0 else {
        return Err(CertError::Invalid("upper-layer sigma0 must be dense".into()));
    };
    let prec = s0.to_float(cert.eval_precision()).prec().unwrap_or(cert.eval_precision());
    let sigma0 = s0.to_float(prec);
    let (_, r) = check_root_structure(cert, opts);
    let r = r.ok_or_else(|| CertError::Invalid("no root located in [floor q, ceil q)".into()))?;
    let r = r.with_prec(prec);

    let n = cert.inst.n();
    let c = cert.ceil_q().to_u64().expect("ceil q <= n");
    let root_tol = HpFloat::pow2(-(prec as i32) / 2, prec);
    let mut rest = sigma0.clone();
    let mut multiplicities = Vec::new();
    for j in c..=n {
        let jx = HpFloat::from_i64(j as i64, prec);
        let mut m = 0u32;
        loop {
            let (quot, rem) = rest.div_linear(&jx);
            let scale = rest.abs_sum_at(&jx).add_i64(1);
            if rem.abs() > &root_tol * &scale {
                break;
            }
            rest = quot;
            m += 1;
        }
        if m % 2 == 0 {
            return Err(CertError::Invalid(format!("root {j} has even multiplicity {m}")));
        }
        multiplicities.push((j, m));
    }
    let (p, _) = rest.div_linear(&r);

    // re-multiply and compare on the half-integer grid
    let mut residual = 0.0f64;
    for k in 0..=2 * n {
        let x = HpFloat::from_rational(&Rational::from((k, 2)), prec);
        let mut v = p.eval(&x) * (&x - &r);
        for &(j, m) in &multiplicities {
            v = v * (&x - HpFloat::from_i64(j as i64, prec)).powi(m);
        }
        let want = sigma0.eval(&x);
        let scale = sigma0.abs_sum_at(&x.abs()).add_i64(1);
        residual = residual.max(((v - want).abs() / scale).to_f64());
    }
    if residual > opts.tol {
        return Err(CertError::Factorization { residual });
    }

    let r_rational = limit_denominator(
        &r.to_rational().expect("finite root"),
        &(Integer::from(1) << 64),
    );
    let k = (Integer::from(n) - cert.floor_q()).to_u32().expect("n - floor q fits");
    let akr = akr_polynomial(k, &Rational::from(Rational::from(n) - &r_rational))?;

    let p_sign = if (n - c) % 2 == 0 { 1 } else { -1 };
    let signed = p.scale(&HpFloat::from_i64(p_sign as i64, prec));
    let mut positive = true;
    for k in 0..=4 * n {
        let x = HpFloat::from_rational(&Rational::from((k, 4)), prec);
        positive &= signed.eval(&x).signum_i32() > 0;
    }
    // sign of sigma0 just left of r, from the value at floor q
    let left = sigma0.eval(&HpFloat::from_integer(&cert.floor_q(), prec)).signum_i32();
    let lead_sign = p.eval(&HpFloat::from_integer(&cert.floor_q(), prec)).signum_i32();

    let budget = p.degree().unwrap_or(0);
    let (lifting, lifting_error) = match lift_nonneg(&signed, n, budget) {
        Ok(l) => (Some(l), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut checks = LemmaChecks::new();
    checks.insert("factorization_residual".into(), true);
    checks.insert("odd_multiplicities".into(), true);
    checks.insert("signed_p_positive".into(), positive);
    checks.insert("p_sign_matches_sigma0".into(), lead_sign == p_sign * left || left == 0);
    checks.insert("akr_identity_exact".into(), akr.equal);
    checks.insert("lifting_found".into(), lifting.is_some());
    Ok(SosDecomposition {
        p,
        r,
        r_rational,
        multiplicities,
        akr,
        p_sign,
        lifting,
        lifting_error,
        factorization_residual: residual,
        checks,
    })
}
