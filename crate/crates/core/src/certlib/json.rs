//! Certificate documents. Dense polynomials are stored as decimal strings
//! that parse back to identical values at the stated precision; structured
//! polynomials store `null` coefficients and their closed-form parameters.

use serde::{Deserialize, Serialize};

use super::certpoly::{CertPoly, ChebPower};
use super::lower::LowerMeta;
use super::upper::UpperMeta;
use super::{BuildOptions, CertError, CertMeta, Certificate, Regime};
use crate::model::{parse_rational, KnapsackInstance};
use crate::numerics::{AnyPoly, HpFloat, UniPoly, DEFAULT_PRECISION};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub version: u32,
    pub n: u64,
    pub q: String,
    pub regime: String,
    pub options: BuildOptions,
    pub sigma1: PolyDoc,
    pub sigma0: PolyDoc,
    pub meta: MetaDoc,
    pub reported_degree: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDoc {
    /// `rational`, `float` or `structured`.
    pub kind: String,
    pub precision_bits: Option<u32>,
    pub coefficients: Option<Vec<String>>,
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum FormDoc {
    /// `scale * T_d(alpha x + beta)^power`
    ChebPower {
        d: u32,
        power: u32,
        scale: String,
        alpha: String,
        beta: String,
        precision_bits: u32,
    },
    /// `(x - ceil) - (x - q) * inner`
    Complement { inner: Box<PolyDoc> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum MetaDoc {
    LowerLayers {
        d: u32,
        m: u32,
        big_n: u64,
        r0: String,
        r0_precision_bits: u32,
        tau: PolyDoc,
    },
    UpperLayers {
        l: PolyDoc,
        v: PolyDoc,
        interpolation_precision: u32,
    },
}

fn float_prec(p: &UniPoly<HpFloat>) -> Option<u32> {
    p.coeffs().iter().map(HpFloat::prec).max()
}

fn encode_poly(p: &CertPoly) -> PolyDoc {
    match p {
        CertPoly::Dense(AnyPoly::Rational(r)) => PolyDoc {
            kind: "rational".into(),
            precision_bits: None,
            coefficients: Some(r.coeffs().iter().map(|c| c.to_string()).collect()),
            degree: r.degree(),
            form: None,
        },
        CertPoly::Dense(AnyPoly::Float(f)) => PolyDoc {
            kind: "float".into(),
            precision_bits: float_prec(f),
            coefficients: Some(f.coeffs().iter().map(HpFloat::to_decimal_string).collect()),
            degree: f.degree(),
            form: None,
        },
        CertPoly::ChebPower(c) => PolyDoc {
            kind: "structured".into(),
            precision_bits: None,
            coefficients: None,
            degree: Some(c.degree()),
            form: Some(FormDoc::ChebPower {
                d: c.d,
                power: c.power,
                scale: c.scale.to_string(),
                alpha: c.alpha.to_decimal_string(),
                beta: c.beta.to_decimal_string(),
                precision_bits: c.alpha.prec().max(c.beta.prec()),
            }),
        },
        CertPoly::Complement { sigma1, .. } => PolyDoc {
            kind: "structured".into(),
            precision_bits: None,
            coefficients: None,
            degree: p.degree(),
            form: Some(FormDoc::Complement {
                inner: Box::new(encode_poly(sigma1)),
            }),
        },
        CertPoly::Affine { .. } => unreachable!("certificates never store affine forms"),
    }
}

fn bad(msg: impl Into<String>) -> CertError {
    CertError::Document(msg.into())
}

fn decode_poly(doc: &PolyDoc, inst: &KnapsackInstance) -> Result<CertPoly, CertError> {
    match doc.kind.as_str() {
        "rational" => {
            let cs = doc.coefficients.as_ref().ok_or_else(|| bad("rational polynomial without coefficients"))?;
            let coeffs = cs
                .iter()
                .map(|s| parse_rational(s).map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CertPoly::Dense(AnyPoly::Rational(UniPoly::new(coeffs))))
        }
        "float" => {
            let cs = doc.coefficients.as_ref().ok_or_else(|| bad("float polynomial without coefficients"))?;
            let prec = match (doc.precision_bits, cs.is_empty()) {
                (Some(p), _) => p,
                (None, true) => DEFAULT_PRECISION,
                (None, false) => return Err(bad("float polynomial without precision_bits")),
            };
            let coeffs = cs
                .iter()
                .map(|s| HpFloat::parse_decimal(s, prec))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CertPoly::Dense(AnyPoly::Float(UniPoly::new(coeffs))))
        }
        "structured" => match doc.form.as_ref().ok_or_else(|| bad("structured polynomial without form"))? {
            FormDoc::ChebPower {
                d,
                power,
                scale,
                alpha,
                beta,
                precision_bits,
            } => Ok(CertPoly::ChebPower(ChebPower {
                d: *d,
                power: *power,
                scale: parse_rational(scale).map_err(|e| bad(e.to_string()))?,
                alpha: HpFloat::parse_decimal(alpha, *precision_bits)?,
                beta: HpFloat::parse_decimal(beta, *precision_bits)?,
            })),
            FormDoc::Complement { inner } => Ok(CertPoly::Complement {
                sigma1: Box::new(decode_poly(inner, inst)?),
                q: inst.q().clone(),
                ceil: inst.ceil_q(),
            }),
        },
        other => Err(bad(format!("unknown polynomial kind {other:?}"))),
    }
}

impl CertificateDoc {
    pub fn from_certificate(cert: &Certificate) -> Self {
        let meta = match &cert.meta {
            CertMeta::Lower(m) => MetaDoc::LowerLayers {
                d: m.d,
                m: m.m,
                big_n: m.big_n,
                r0: m.r0.to_decimal_string(),
                r0_precision_bits: m.r0.prec(),
                tau: encode_poly(&m.tau),
            },
            CertMeta::Upper(m) => MetaDoc::UpperLayers {
                l: encode_poly(&CertPoly::Dense(AnyPoly::Float(m.l.clone()))),
                v: encode_poly(&CertPoly::Dense(AnyPoly::Rational(m.v.clone()))),
                interpolation_precision: m.interpolation_precision,
            },
        };
        CertificateDoc {
            version: FORMAT_VERSION,
            n: cert.inst.n(),
            q: cert.inst.q_string(),
            regime: cert.regime.to_string(),
            options: cert.options,
            sigma1: encode_poly(&cert.sigma1),
            sigma0: encode_poly(&cert.sigma0),
            meta,
            reported_degree: cert.reported_degree,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn parse(text: &str) -> Result<Self, CertError> {
        let doc: CertificateDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", doc.version)));
        }
        Ok(doc)
    }

    /// Decodes every stored value; no consistency check beyond parsing.
    pub fn to_certificate(&self) -> Result<Certificate, CertError> {
        let inst = KnapsackInstance::parse(self.n, &self.q).map_err(|e| bad(e.to_string()))?;
        let regime = match self.regime.as_str() {
            "lower-layers" => Regime::LowerLayers,
            "upper-layers" => Regime::UpperLayers,
            other => return Err(bad(format!("unknown regime {other:?}"))),
        };
        let meta = match &self.meta {
            MetaDoc::LowerLayers {
                d,
                m,
                big_n,
                r0,
                r0_precision_bits,
                tau,
            } => CertMeta::Lower(LowerMeta {
                d: *d,
                m: *m,
                big_n: *big_n,
                r0: HpFloat::parse_decimal(r0, *r0_precision_bits)?,
                tau: decode_poly(tau, &inst)?,
            }),
            MetaDoc::UpperLayers {
                l,
                v,
                interpolation_precision,
            } => {
                let l = match decode_poly(l, &inst)? {
                    CertPoly::Dense(AnyPoly::Float(f)) => f,
                    CertPoly::Dense(AnyPoly::Rational(r)) if r.is_zero() => UniPoly::zero(),
                    _ => return Err(bad("L must be a float polynomial")),
                };
                let v = match decode_poly(v, &inst)? {
                    CertPoly::Dense(AnyPoly::Rational(r)) => r,
                    _ => return Err(bad("V must be a rational polynomial")),
                };
                CertMeta::Upper(UpperMeta {
                    l,
                    v,
                    interpolation_precision: *interpolation_precision,
                })
            }
        };
        let sigma1 = decode_poly(&self.sigma1, &inst)?;
        let sigma0 = decode_poly(&self.sigma0, &inst)?;
        Ok(Certificate {
            inst,
            regime,
            options: self.options,
            sigma1,
            sigma0,
            meta,
            reported_degree: self.reported_degree,
        })
    }
}

impl Certificate {
    pub fn to_json(&self) -> String {
        CertificateDoc::from_certificate(self).to_json_string()
    }

    /// Parses a document and checks that it is exactly what the construction
    /// produces for the stored instance and options.
    pub fn from_json_verified(text: &str) -> Result<Certificate, CertError> {
        let cert = CertificateDoc::parse(text)?.to_certificate()?;
        if !cert.matches_construction() {
            return Err(CertError::Invalid(
                "stored values differ from the construction for this instance".into(),
            ));
        }
        Ok(cert)
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_certificate;
    use super::*;

    fn roundtrip(n: u64, q: &str, opts: BuildOptions) {
        let inst = KnapsackInstance::parse(n, q).unwrap();
        let cert = build_certificate(&inst, &opts).unwrap();
        let text = cert.to_json();
        let back = CertificateDoc::parse(&text).unwrap().to_certificate().unwrap();
        assert_eq!(back, cert, "n={n} q={q}");
        assert!(Certificate::from_json_verified(&text).is_ok());
    }

    #[test]
    fn roundtrip_dense_and_structured() {
        roundtrip(100, "1/2", BuildOptions::default());
        roundtrip(12, "23/2", BuildOptions::default());
        roundtrip(4, "7/2", BuildOptions::default());
        roundtrip(
            40,
            "1/10",
            BuildOptions {
                dense_limit: 0,
                ..BuildOptions::default()
            },
        );
    }

    #[test]
    fn structured_arrays_are_null() {
        let inst = KnapsackInstance::parse(1000, "1/2").unwrap();
        let opts = BuildOptions {
            dense_limit: 0,
            ..BuildOptions::default()
        };
        let cert = build_certificate(&inst, &opts).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        assert!(v["sigma1"]["coefficients"].is_null());
        assert!(v["sigma0"]["coefficients"].is_null());
        assert_eq!(v["q"], "1/2");
    }

    #[test]
    fn tampering_is_detected() {
        let inst = KnapsackInstance::parse(6, "9/2").unwrap();
        let cert = build_certificate(&inst, &BuildOptions::default()).unwrap();
        let mut doc = CertificateDoc::from_certificate(&cert);
        let cs = doc.sigma1.coefficients.as_mut().unwrap();
        cs[0] = if cs[0].starts_with('-') { cs[0][1..].to_string() } else { format!("-{}", cs[0]) };
        let text = serde_json::to_string(&doc).unwrap();
        assert!(Certificate::from_json_verified(&text).is_err());
        assert!(Certificate::from_json_verified("{not json").is_err());
    }
}
