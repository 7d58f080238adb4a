//! Explicit certificates `|x| - ceil(q) = s0(x) + s1(x) (|x| - q)` with
//! `s_i(x) = sigma_i(|x|)`, built from univariate representatives.

mod akr;
mod certpoly;
mod json;
mod lower;
mod transforms;
mod upper;
mod verify;

use std::fmt;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

pub use akr::{akr_polynomial, binomial_poly, falling_factorial, AkrIdentity};
pub use certpoly::{complement_dense, complement_exact, CertPoly, ChebPower};
pub use json::{CertificateDoc, FORMAT_VERSION};
pub use lower::{build_sigma1_lower, chebyshev_parameters, LowerMeta};
pub use transforms::{
    extract_cr_witness, materialize_upper_sos, to_refutation, CrWitness, Refutation,
    SosDecomposition,
};
pub use upper::{build_sigma1_upper, interpolant_m, target_f, UpperMeta};
pub use verify::{
    check_lower_constraints, check_root_structure, construct_verified, verify_certificate,
    LemmaChecks, VerifyOptions, VerifyReport,
};

use crate::model::KnapsackInstance;
use crate::numerics::{AnyPoly, NumericsError, DEFAULT_PRECISION};

#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error("instance {inst} is outside the {regime} regime")]
    Regime { inst: String, regime: Regime },
    #[error("instance {0} has rank 0 (q integral or outside [0, n]); no certificate is built")]
    Trivial(String),
    #[error("A_{{k,r}} needs r in (k-1, k]; got k={k}, r={r}")]
    AkrRange { k: u32, r: String },
    #[error("invalid certificate: {0}")]
    Invalid(String),
    #[error("factorization residual {residual:e} exceeds tolerance; raise precision")]
    Factorization { residual: f64 },
    #[error("lifting failed: {0}")]
    Lifting(String),
    #[error("certificate document: {0}")]
    Document(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LowerLayers,
    UpperLayers,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LowerLayers => "lower-layers",
            Regime::UpperLayers => "upper-layers",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    #[default]
    Auto,
    Lower,
    Upper,
}

/// Paper regimes are `q < floor(n/2)` and `q > floor(n/2)`; the gap
/// `[floor(n/2), floor(n/2) + 1)` is routed to the upper construction.
pub fn auto_regime(inst: &KnapsackInstance) -> Result<Regime, CertError> {
    if inst.is_integral() || *inst.q() <= 0 || *inst.q() >= inst.n() {
        return Err(CertError::Trivial(inst.to_string()));
    }
    if inst.floor_q() < inst.n() / 2 {
        Ok(Regime::LowerLayers)
    } else {
        Ok(Regime::UpperLayers)
    }
}

pub fn select_regime(inst: &KnapsackInstance, choice: RegimeChoice) -> Result<Regime, CertError> {
    let auto = auto_regime(inst)?;
    Ok(match choice {
        RegimeChoice::Auto => auto,
        RegimeChoice::Lower => Regime::LowerLayers,
        RegimeChoice::Upper => Regime::UpperLayers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub precision_bits: u32,
    /// Closed-form polynomials up to this degree are expanded to monomial
    /// coefficients; larger ones stay structured.
    pub dense_limit: usize,
    pub regime: RegimeChoice,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            precision_bits: DEFAULT_PRECISION,
            dense_limit: 1200,
            regime: RegimeChoice::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertMeta {
    Lower(LowerMeta),
    Upper(UpperMeta),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub inst: KnapsackInstance,
    pub regime: Regime,
    pub options: BuildOptions,
    pub sigma1: CertPoly,
    pub sigma0: CertPoly,
    pub meta: CertMeta,
    pub reported_degree: u32,
}

/// Smallest `d` with `deg sigma0 <= 2d + 2` and `deg sigma1 <= 2d`.
pub fn reported_degree(deg_sigma0: Option<usize>, deg_sigma1: Option<usize>) -> u32 {
    let d0 = deg_sigma0.map_or(0, |g| g.saturating_sub(2).div_ceil(2));
    let d1 = deg_sigma1.map_or(0, |g| g.div_ceil(2));
    d0.max(d1) as u32
}

pub fn sigma0_from(sigma1: &CertPoly, inst: &KnapsackInstance, prec: u32) -> CertPoly {
    let ceil = inst.ceil_q();
    match sigma1 {
        CertPoly::Dense(AnyPoly::Rational(s)) => {
            CertPoly::Dense(AnyPoly::Rational(complement_exact(s, inst.q(), &ceil)))
        }
        CertPoly::Dense(AnyPoly::Float(s)) => {
            let p = s.prec().unwrap_or(prec);
            CertPoly::Dense(AnyPoly::Float(complement_dense(s, inst.q(), &ceil, p)))
        }
        other => CertPoly::Complement {
            sigma1: Box::new(other.clone()),
            q: inst.q().clone(),
            ceil,
        },
    }
}

pub fn build_certificate(
    inst: &KnapsackInstance,
    opts: &BuildOptions,
) -> Result<Certificate, CertError> {
    let regime = select_regime(inst, opts.regime)?;
    let (sigma1, meta) = match regime {
        Regime::LowerLayers => {
            let (s, m) = build_sigma1_lower(inst, opts)?;
            (s, CertMeta::Lower(m))
        }
        Regime::UpperLayers => {
            let (s, m) = build_sigma1_upper(inst, opts.precision_bits)?;
            (s, CertMeta::Upper(m))
        }
    };
    let sigma0 = sigma0_from(&sigma1, inst, opts.precision_bits);
    let reported = reported_degree(sigma0.degree(), sigma1.degree());
    Ok(Certificate {
        inst: inst.clone(),
        regime,
        options: *opts,
        sigma1,
        sigma0,
        meta,
        reported_degree: reported,
    })
}

impl Certificate {
    /// Rebuilds from `inst` and `options` and compares every stored value.
    pub fn matches_construction(&self) -> bool {
        match build_certificate(&self.inst, &self.options) {
            Ok(fresh) => fresh == *self,
            Err(_) => false,
        }
    }

    pub fn floor_q(&self) -> Integer {
        self.inst.floor_q()
    }

    pub fn ceil_q(&self) -> Integer {
        self.inst.ceil_q()
    }

    pub fn q(&self) -> &Rational {
        self.inst.q()
    }

    /// Precision used for evaluating the stored polynomials.
    pub fn eval_precision(&self) -> u32 {
        self.options.precision_bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u64, q: &str) -> KnapsackInstance {
        KnapsackInstance::parse(n, q).unwrap()
    }

    #[test]
    fn degree_convention() {
        assert_eq!(reported_degree(Some(2), Some(0)), 0);
        assert_eq!(reported_degree(Some(3), Some(2)), 1);
        assert_eq!(reported_degree(Some(41), Some(40)), 20);
        assert_eq!(reported_degree(Some(6), Some(1)), 2);
        assert_eq!(reported_degree(None, None), 0);
    }

    #[test]
    fn regime_routing() {
        assert_eq!(auto_regime(&inst(100, "1/2")).unwrap(), Regime::LowerLayers);
        assert_eq!(auto_regime(&inst(100, "49.5")).unwrap(), Regime::LowerLayers);
        assert_eq!(auto_regime(&inst(100, "50.5")).unwrap(), Regime::UpperLayers);
        assert_eq!(auto_regime(&inst(101, "50.5")).unwrap(), Regime::UpperLayers);
        assert_eq!(auto_regime(&inst(1, "1/2")).unwrap(), Regime::UpperLayers);
        assert!(matches!(auto_regime(&inst(4, "2")), Err(CertError::Trivial(_))));
        assert!(matches!(auto_regime(&inst(4, "9/2")), Err(CertError::Trivial(_))));
    }

    #[test]
    fn sigma0_examples() {
        let i = inst(5, "9/4");
        let zero = CertPoly::Dense(AnyPoly::Rational(crate::numerics::UniPoly::zero()));
        let one = CertPoly::Dense(AnyPoly::Rational(crate::numerics::UniPoly::from_i64s(&[1])));
        let s0 = sigma0_from(&zero, &i, 128);
        assert_eq!(
            s0,
            CertPoly::Dense(AnyPoly::Rational(crate::numerics::UniPoly::from_i64s(&[-3, 1])))
        );
        let s0 = sigma0_from(&one, &i, 128);
        let expect = crate::numerics::UniPoly::new(vec![Rational::from((-3, 4))]);
        assert_eq!(s0, CertPoly::Dense(AnyPoly::Rational(expect)));
    }
}
