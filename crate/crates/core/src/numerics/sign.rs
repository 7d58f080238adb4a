//! Sign classification of a polynomial on the integer grid `{0, ..., n}`.

use serde::{Deserialize, Serialize};

use super::hpfloat::HpFloat;
use super::poly::UniPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignProfile {
    pub signs: Vec<Sign>,
    /// Sign changes between consecutive nonzero entries.
    pub sign_changes: usize,
}

impl SignProfile {
    pub fn from_signs(signs: Vec<Sign>) -> Self {
        let mut changes = 0;
        let mut last: Option<Sign> = None;
        for &s in &signs {
            if s == Sign::Zero {
                continue;
            }
            if matches!(last, Some(l) if l != s) {
                changes += 1;
            }
            last = Some(s);
        }
        SignProfile {
            signs,
            sign_changes: changes,
        }
    }

    pub fn render(&self) -> String {
        self.signs.iter().map(|s| s.symbol()).collect()
    }
}

/// Classifies `v` as zero when `|v| <= threshold`.
pub fn classify(v: &HpFloat, threshold: &HpFloat) -> Sign {
    if v.abs() <= *threshold {
        Sign::Zero
    } else if v.signum_i32() > 0 {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Classifies pre-computed grid values, with zero meaning
/// `|v_k| <= tol * (1 + max_j |v_j|)`.
pub fn sign_profile_of_values(values: &[HpFloat], tol: &HpFloat) -> SignProfile {
    let prec = tol.prec();
    let sup = values
        .iter()
        .fold(HpFloat::zero(prec), |m, v| m.max(v.abs()));
    let threshold = tol * &sup.add_i64(1);
    SignProfile::from_signs(values.iter().map(|v| classify(v, &threshold)).collect())
}

pub fn integer_sign_profile(p: &UniPoly<HpFloat>, n: u64, tol: &HpFloat) -> SignProfile {
    let prec = p.prec().unwrap_or(tol.prec());
    let values: Vec<HpFloat> = (0..=n)
        .map(|k| p.eval(&HpFloat::from_i64(k as i64, prec)))
        .collect();
    sign_profile_of_values(&values, tol)
}
