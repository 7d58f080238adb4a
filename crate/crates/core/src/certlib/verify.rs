//! Runtime checks of the certificate identity and of the structural lemmas
//! (constraint satisfaction, root structure, sign alternation).
//!
//! Every tolerance test at a point `x` is relative to the pointwise scale
//! `1 + |x - ceil q| + |x - q| |sigma1(x)| + |sigma0(x)|`, the natural size of
//! the terms in the identity at `x`.

use std::cell::Cell;
use std::collections::BTreeMap;

use rug::{Integer, Rational};
use serde_json::json;

use super::upper::{interpolant_m, target_f};
use super::{build_certificate, BuildOptions, CertError, CertMeta, Certificate, Regime};
use crate::model::KnapsackInstance;
use crate::numerics::sign::sign_profile_of_values;
use crate::numerics::{HpFloat, SignProfile};

pub type LemmaChecks = BTreeMap<String, bool>;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerifyOptions {
    pub tol: f64,
    pub grid_density: u32,
    pub max_escalations: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-12,
            grid_density: 8,
            max_escalations: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// `max_k |sigma0(k) + (k - q) sigma1(k) - (k - ceil q)| / scale_k`
    pub max_identity_residual: HpFloat,
    pub min_sigma1_on_grid: HpFloat,
    pub min_sigma0_on_grid: HpFloat,
    pub root_profile: SignProfile,
    pub lemma_checks: LemmaChecks,
    /// The root of `sigma0` below `ceil q` other than the layer roots.
    pub root_r: Option<HpFloat>,
    /// Some check passed or failed by less than a factor 10 of the tolerance.
    pub near_miss: bool,
    pub precision_bits: u32,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pass": self.pass,
            "precision_bits": self.precision_bits,
            "max_identity_residual": self.max_identity_residual.to_f64(),
            "min_sigma1_on_grid": self.min_sigma1_on_grid.to_string(),
            "min_sigma0_on_grid": self.min_sigma0_on_grid.to_string(),
            "root_profile": self.root_profile.render(),
            "sign_changes": self.root_profile.sign_changes,
            "root_r": self.root_r.as_ref().map(|r| r.to_string()),
            "near_miss": self.near_miss,
            "lemma_checks": self.lemma_checks,
        })
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.lemma_checks
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

struct Ctx<'a> {
    cert: &'a Certificate,
    prec: u32,
    tol: HpFloat,
    ceil: Integer,
    near: Cell<bool>,
}

impl<'a> Ctx<'a> {
    fn new(cert: &'a Certificate, tol: f64) -> Self {
        let prec = cert.eval_precision();
        Ctx {
            cert,
            prec,
            tol: HpFloat::from_f64(tol, prec),
            ceil: cert.ceil_q(),
            near: Cell::new(false),
        }
    }

    fn s1(&self, x: &Rational) -> HpFloat {
        self.cert.sigma1.eval(x, self.prec)
    }

    fn s0(&self, x: &Rational) -> HpFloat {
        self.cert.sigma0.eval(x, self.prec)
    }

    fn scale(&self, x: &Rational, s1: &HpFloat, s0: &HpFloat) -> HpFloat {
        let p = self.prec;
        let dc = HpFloat::from_rational(&Rational::from(x - &self.ceil), p).abs();
        let dq = HpFloat::from_rational(&Rational::from(x - self.cert.q()), p).abs();
        (dc + dq * s1.abs() + s0.abs()).add_i64(1)
    }

    fn scale_at(&self, x: &Rational) -> (HpFloat, HpFloat, HpFloat) {
        let s1 = self.s1(x);
        let s0 = self.s0(x);
        let sc = self.scale(x, &s1, &s0);
        (s1, s0, sc)
    }

    fn bound(&self, scale: &HpFloat) -> HpFloat {
        &self.tol * scale
    }

    fn flag_near(&self, cond: bool) {
        if cond {
            self.near.set(true);
        }
    }

    /// `|v| <= tol * scale`
    fn is_zero(&self, v: &HpFloat, scale: &HpFloat) -> bool {
        let b = self.bound(scale);
        let a = v.abs();
        self.flag_near(a.to_f64() * 10.0 > b.to_f64() && a <= b.mul_i64(10));
        a <= b
    }

    /// `v >= -tol * scale`
    fn nonneg(&self, v: &HpFloat, scale: &HpFloat) -> bool {
        let b = self.bound(scale);
        self.flag_near(v.signum_i32() < 0 && v.abs().mul_i64(10) > b && v.abs() <= b.mul_i64(10));
        *v >= -&b
    }

    /// `v > tol * scale`
    fn positive(&self, v: &HpFloat, scale: &HpFloat) -> bool {
        let b = self.bound(scale);
        self.flag_near(*v > -b.mul_i64(10) && *v <= b.mul_i64(10));
        *v > b
    }

    fn grid(&self, lo: &Rational, hi: &Rational, density: u32) -> Vec<Rational> {
        let steps = Rational::from(hi - lo) * density;
        let steps = steps.ceil().numer().to_u64().unwrap_or(0).max(1);
        (0..=steps)
            .map(|i| {
                let t = Rational::from((i, steps));
                Rational::from(lo + Rational::from(hi - lo) * t)
            })
            .collect()
    }

    /// Bisects a sign change of `sigma0` in `[lo, hi]` to width `2^{-prec/2}`.
    fn bisect_sigma0(&self, mut lo: Rational, mut hi: Rational) -> HpFloat {
        let sign_lo = self.s0(&lo).signum_i32();
        let width = Rational::from(1) >> (self.prec / 2);
        while Rational::from(&hi - &lo) > width {
            let mid = Rational::from(&lo + &hi) / 2;
            if self.s0(&mid).signum_i32() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        HpFloat::from_rational(&(Rational::from(&lo + &hi) / 2), self.prec)
    }

    /// Exactly one sign change of `sigma0` on a fine grid of `[lo, hi]`,
    /// starting positive; returns the bisected root.
    fn single_crossing(&self, lo: &Rational, hi: &Rational) -> Option<HpFloat> {
        let step = Rational::from(hi - lo) / 64;
        let pts: Vec<Rational> = (0..=64)
            .map(|i| Rational::from(lo + Rational::from(&step * i)))
            .collect();
        let signs: Vec<i32> = pts.iter().map(|x| self.s0(x).signum_i32()).collect();
        if signs[0] <= 0 {
            return None;
        }
        let mut crossing = None;
        let mut changes = 0;
        let mut last = signs[0];
        for (i, &s) in signs.iter().enumerate().skip(1) {
            if s != 0 && s != last {
                changes += 1;
                crossing = Some(i);
                last = s;
            }
        }
        if changes != 1 {
            return None;
        }
        let i = crossing?;
        Some(self.bisect_sigma0(pts[i - 1].clone(), pts[i].clone()))
    }

    /// `sigma0 < 0` on interior grid points of `(q, ceil q)`.
    fn negative_between_q_and_ceil(&self) -> bool {
        let q = self.cert.q();
        let c = Rational::from(&self.ceil);
        let pts = self.grid(q, &c, 64);
        pts[1..pts.len() - 1]
            .iter()
            .all(|x| self.s0(x).signum_i32() < 0)
    }
}

pub fn check_lower_constraints(cert: &Certificate, grid_density: u32) -> LemmaChecks {
    check_lower_with(&Ctx::new(cert, VerifyOptions::default().tol), grid_density)
}

fn check_lower_with(ctx: &Ctx<'_>, density: u32) -> LemmaChecks {
    let cert = ctx.cert;
    let p = ctx.prec;
    let fl = Rational::from(cert.floor_q());
    let c = Rational::from(&ctx.ceil);
    let c1 = Rational::from(&c + 1);
    let n = Rational::from(cert.inst.n());
    let inv_qhat = HpFloat::from_rational(&cert.inst.q_hat().recip(), p);
    let half = Rational::from((1, 2));

    let c1_ok = ctx
        .grid(&Rational::from(0), &fl, density)
        .iter()
        .all(|x| ctx.s1(x) > inv_qhat);
    let c2_ok = ctx.grid(&c, &c1, density).iter().all(|x| {
        let cap = HpFloat::from_rational(&(Rational::from(x - &c) * &half), p);
        ctx.s1(x) <= cap + ctx.tol.clone()
    });
    let c3_ok = if c1 <= n {
        let cap = HpFloat::from_rational(&half, p) + ctx.tol.clone();
        ctx.grid(&c1, &n, density).iter().all(|x| ctx.s1(x) <= cap)
    } else {
        true
    };
    let mut out = LemmaChecks::new();
    out.insert("constraint_1_large_below_floor".into(), c1_ok);
    out.insert("constraint_2_linear_cap_next_layer".into(), c2_ok);
    out.insert("constraint_3_half_cap_upper_layers".into(), c3_ok);
    out
}

pub fn check_root_structure(cert: &Certificate, opts: &VerifyOptions) -> (LemmaChecks, Option<HpFloat>) {
    root_structure_with(&Ctx::new(cert, opts.tol))
}

fn root_structure_with(ctx: &Ctx<'_>) -> (LemmaChecks, Option<HpFloat>) {
    match ctx.cert.regime {
        Regime::LowerLayers => lower_roots(ctx),
        Regime::UpperLayers => upper_roots(ctx),
    }
}

fn lower_roots(ctx: &Ctx<'_>) -> (LemmaChecks, Option<HpFloat>) {
    let cert = ctx.cert;
    let n = cert.inst.n();
    let fl = cert.floor_q();
    let c = ctx.ceil.clone();
    let mut out = LemmaChecks::new();

    let cr = Rational::from(&c);
    let (_, v, sc) = ctx.scale_at(&cr);
    out.insert("root_at_ceil".into(), ctx.is_zero(&v, &sc));

    let positive = (0..=n).filter(|k| *k <= fl || *k > c).all(|k| {
        let x = Rational::from(k);
        let (_, v, sc) = ctx.scale_at(&x);
        ctx.positive(&v, &sc)
    });
    out.insert("positive_off_roots".into(), positive);

    let r = ctx.single_crossing(&Rational::from(&fl), cert.q());
    let r_ok = r.as_ref().is_some_and(|r| {
        *r > HpFloat::from_integer(&fl, ctx.prec) && *r < HpFloat::from_rational(cert.q(), ctx.prec)
    });
    out.insert("single_root_between_floor_and_q".into(), r_ok);
    out.insert("negative_between_q_and_ceil".into(), ctx.negative_between_q_and_ceil());
    (out, r)
}

fn upper_roots(ctx: &Ctx<'_>) -> (LemmaChecks, Option<HpFloat>) {
    let cert = ctx.cert;
    let n = cert.inst.n();
    let q = cert.q();
    let fl = cert.floor_q();
    let c = ctx.ceil.clone();
    let c64 = c.to_u64().unwrap();
    let p = ctx.prec;
    let mut out = LemmaChecks::new();

    let roots = (c64..=n).all(|k| {
        let x = Rational::from(k);
        let (_, v, sc) = ctx.scale_at(&x);
        ctx.is_zero(&v, &sc)
    });
    out.insert("roots_at_upper_layers".into(), roots);

    let half = Rational::from((1, 2));
    let odd = (c64..=n).all(|j| {
        let jr = Rational::from(j);
        let left = if j == c64 {
            Rational::from(q + &jr) * &half
        } else {
            Rational::from(&jr - &half)
        };
        let right = Rational::from(&jr + &half);
        ctx.s0(&left).signum_i32() * ctx.s0(&right).signum_i32() < 0
    });
    out.insert("odd_multiplicity_sign_change".into(), odd);

    let below = (0..fl.to_u64().unwrap()).all(|k| {
        let x = Rational::from(k);
        let (_, v, sc) = ctx.scale_at(&x);
        ctx.positive(&v, &sc)
    });
    out.insert("positive_below_floor".into(), below);

    let flr = Rational::from(&fl);
    let (_, v_fl, sc_fl) = ctx.scale_at(&flr);
    let r = if ctx.is_zero(&v_fl, &sc_fl) {
        // root sits at floor(q); sigma0 must then be negative up to q
        let pts = ctx.grid(&flr, q, 64);
        let neg = pts[1..].iter().all(|x| ctx.s0(x).signum_i32() < 0);
        neg.then(|| HpFloat::from_integer(&fl, p))
    } else {
        ctx.single_crossing(&flr, q)
    };
    out.insert("single_root_in_floor_ceil".into(), r.is_some());
    out.insert("negative_between_q_and_ceil".into(), ctx.negative_between_q_and_ceil());

    let CertMeta::Upper(meta) = &cert.meta else {
        out.insert("meta_matches_regime".into(), false);
        return (out, r);
    };
    let ip = meta.interpolation_precision;

    // sgn(f - L)(k - 1/2) = (-1)^{k - ceil - 1} = -sgn V(k - 1/2)
    let alternation = (c64 + 1..=n).all(|k| {
        let x = Rational::from(k) - &half;
        let xf = HpFloat::from_rational(&x, ip);
        let f = target_f(&x, q, &c, ip);
        let diff = (f - meta.l.eval(&xf)).signum_i32();
        let expect = if (k - c64 - 1) % 2 == 0 { 1 } else { -1 };
        let v_sign = match meta.v.eval(&x).cmp0() {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        };
        diff == expect && v_sign == -expect
    });
    out.insert("sign_alternation".into(), alternation);

    // L <= 0 and increasing left of ceil, L > 0 on (ceil, n]
    let l_at = |x: &Rational| meta.l.eval(&HpFloat::from_rational(x, ip));
    let l_sign = if meta.l.is_zero() {
        true
    } else {
        let tol = HpFloat::from_f64(VerifyOptions::default().tol, ip).max(ctx.tol.with_prec(ip));
        let left: Vec<Rational> = (0..=2 * c64).map(|j| Rational::from((j as i64, 2))).collect();
        let left_vals: Vec<HpFloat> = left.iter().map(&l_at).collect();
        let nonpos = left_vals.iter().all(|v| *v <= tol.clone() * (v.abs().add_i64(1)));
        let increasing = left_vals.windows(2).all(|w| {
            w[1].clone() >= w[0].clone() - tol.clone() * (w[0].abs().add_i64(1))
        });
        let right_pos = (2 * c64 + 1..=2 * n)
            .map(|j| Rational::from((j as i64, 2)))
            .all(|x| l_at(&x).signum_i32() > 0);
        nonpos && increasing && right_pos
    };
    out.insert("l_sign_pattern".into(), l_sign);

    // M non-increasing on half-integers of (-inf, ceil + 1]
    let m_ok = match interpolant_m(&cert.inst, ip) {
        None => true,
        Some(m) => {
            let tol = ctx.tol.with_prec(ip);
            let xs: Vec<HpFloat> = (0..=2 * (c64 + 1))
                .map(|j| HpFloat::from_rational(&Rational::from((j as i64, 2)), ip))
                .collect();
            let vals: Vec<HpFloat> = xs.iter().map(|x| m.eval(x)).collect();
            vals.windows(2)
                .all(|w| w[1].clone() <= w[0].clone() + tol.clone() * (w[0].abs().add_i64(1)))
        }
    };
    out.insert("m_nonincreasing".into(), m_ok);
    (out, r)
}

pub fn verify_certificate(cert: &Certificate, opts: &VerifyOptions) -> VerifyReport {
    let ctx = Ctx::new(cert, opts.tol);
    let n = cert.inst.n();
    let q = cert.q();
    let p = ctx.prec;

    let mut s0_vals = Vec::with_capacity(n as usize + 1);
    let mut max_res = HpFloat::zero(p);
    let mut min1: Option<HpFloat> = None;
    let mut min0: Option<HpFloat> = None;
    let mut identity_ok = true;
    let mut s1_ok = true;
    let mut s0_ok = true;
    for k in 0..=n {
        let x = Rational::from(k);
        let (s1, s0, sc) = ctx.scale_at(&x);
        let lin = HpFloat::from_rational(&Rational::from(&x - &ctx.ceil), p);
        let dq = HpFloat::from_rational(&Rational::from(&x - q), p);
        let res = (&s0 + &dq * &s1 - lin).abs();
        identity_ok &= ctx.is_zero(&res, &sc);
        max_res = max_res.max(res / &sc);
        s1_ok &= ctx.nonneg(&s1, &sc);
        s0_ok &= ctx.nonneg(&s0, &sc);
        min1 = Some(match min1 {
            Some(m) => m.min(s1.clone()),
            None => s1.clone(),
        });
        min0 = Some(match min0 {
            Some(m) => m.min(s0.clone()),
            None => s0.clone(),
        });
        s0_vals.push(s0);
    }

    let mut checks = LemmaChecks::new();
    checks.insert("identity_on_grid".into(), identity_ok);
    checks.insert("sigma1_nonneg_on_grid".into(), s1_ok);
    checks.insert("sigma0_nonneg_on_grid".into(), s0_ok);
    if cert.regime == Regime::LowerLayers {
        checks.extend(check_lower_with(&ctx, opts.grid_density));
    }
    let (roots, r) = root_structure_with(&ctx);
    checks.extend(roots);

    let root_profile = sign_profile_of_values(&s0_vals, &ctx.tol);
    let pass = checks.values().all(|b| *b);
    VerifyReport {
        max_identity_residual: max_res,
        min_sigma1_on_grid: min1.unwrap_or_else(|| HpFloat::zero(p)),
        min_sigma0_on_grid: min0.unwrap_or_else(|| HpFloat::zero(p)),
        root_profile,
        lemma_checks: checks,
        root_r: r,
        near_miss: ctx.near.get(),
        precision_bits: p,
        pass,
    }
}

/// Builds and verifies, doubling the precision (at most
/// `verify.max_escalations` times) while a check fails or lands within a
/// factor 10 of the tolerance.
pub fn construct_verified(
    inst: &KnapsackInstance,
    build: &BuildOptions,
    verify: &VerifyOptions,
) -> Result<(Certificate, VerifyReport), CertError> {
    let mut opts = *build;
    let mut attempt = 0;
    loop {
        let cert = build_certificate(inst, &opts)?;
        let report = verify_certificate(&cert, verify);
        if (report.pass && !report.near_miss) || attempt >= verify.max_escalations {
            return Ok((cert, report));
        }
        attempt += 1;
        opts.precision_bits *= 2;
    }
}
