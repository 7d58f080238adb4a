//! Minimum-knapsack instances `MK(q)`: minimize `|x|` subject to `|x| >= q`
//! over `{0,1}^n`.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numerics::rational;

/// Accepted literal forms, quoted in error messages.
pub const Q_GRAMMAR: &str =
    "integer (-3), decimal (2.25), fraction (9/4), power of two (2^-20), or k+2^-e (1+2^-20)";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid rational literal {literal:?}; expected {}", Q_GRAMMAR)]
    Literal { literal: String },
    #[error("n must be at least 1")]
    ZeroN,
    #[error("invalid instance text {0:?}; expected `n=<int> q=<rational-literal>`")]
    InstanceText(String),
}

/// Parses an exact rational from the literal grammar in [`Q_GRAMMAR`].
pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let err = || ModelError::Literal {
        literal: s.to_string(),
    };
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(err());
    }
    if let Some(idx) = t.find("2^") {
        // "2^e", "2^-e", "k+2^-e", "k-2^-e"
        let (head, tail) = t.split_at(idx);
        let e: i64 = tail[2..].parse().map_err(|_| err())?;
        if e.unsigned_abs() > 1_000_000 {
            return Err(err());
        }
        let mut pow = Rational::from(1);
        if e >= 0 {
            pow <<= e as u32;
        } else {
            pow >>= (-e) as u32;
        }
        return match head {
            "" | "+" => Ok(pow),
            "-" => Ok(-pow),
            _ => {
                let (k, sign) = if let Some(k) = head.strip_suffix('+') {
                    (k, 1)
                } else if let Some(k) = head.strip_suffix('-') {
                    (k, -1)
                } else {
                    return Err(err());
                };
                let k = parse_plain(k).ok_or_else(err)?;
                Ok(if sign > 0 { k + pow } else { k - pow })
            }
        };
    }
    parse_plain(&t).ok_or_else(err)
}

fn parse_plain(t: &str) -> Option<Rational> {
    if let Some((num, den)) = t.split_once('/') {
        let num: Integer = parse_int(num)?;
        let den: Integer = parse_int(den)?;
        if den == 0 {
            return None;
        }
        return Some(Rational::from((num, den)));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: Integer = format!("{}{}", if digits.is_empty() { "0" } else { digits }, frac_part)
            .parse()
            .ok()?;
        let scale = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
        let r = Rational::from((whole, scale));
        return Some(if neg { -r } else { r });
    }
    parse_int(t).map(Rational::from)
}

fn parse_int(t: &str) -> Option<Integer> {
    let digits = t.trim_start_matches(['-', '+']);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || t.len() - digits.len() > 1 {
        return None;
    }
    t.trim_start_matches('+').parse().ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    n: u64,
    q: Rational,
}

impl KnapsackInstance {
    pub fn new(n: u64, q: Rational) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroN);
        }
        Ok(KnapsackInstance { n, q })
    }

    pub fn parse(n: u64, q: &str) -> Result<Self, ModelError> {
        Self::new(n, parse_rational(q)?)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn floor_q(&self) -> Integer {
        rational::floor(&self.q)
    }

    pub fn ceil_q(&self) -> Integer {
        rational::ceil(&self.q)
    }

    /// `⌊q⌋` as `i64`. Instances with astronomically large `q` are out of scope.
    pub fn floor_i64(&self) -> i64 {
        self.floor_q().to_i64().expect("floor(q) fits in i64")
    }

    pub fn ceil_i64(&self) -> i64 {
        self.ceil_q().to_i64().expect("ceil(q) fits in i64")
    }

    pub fn q_hat(&self) -> Rational {
        frac_decompose(&self.q).1
    }

    pub fn is_integral(&self) -> bool {
        rational::is_integral(&self.q)
    }

    /// `0 <= q <= n`.
    pub fn q_in_range(&self) -> bool {
        self.q >= 0 && self.q <= self.n
    }

    pub fn q_string(&self) -> String {
        self.q.to_string()
    }
}

impl fmt::Display for KnapsackInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} q={}", self.n, self.q)
    }
}

impl FromStr for KnapsackInstance {
    type Err = ModelError;

    /// Parses `n=<int> q=<rational-literal>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InstanceText(s.to_string());
        let (mut n, mut q) = (None, None);
        for tok in s.split_whitespace() {
            match tok.split_once('=') {
                Some(("n", v)) if n.is_none() => n = Some(v.parse::<u64>().map_err(|_| bad())?),
                Some(("q", v)) if q.is_none() => q = Some(parse_rational(v)?),
                _ => return Err(bad()),
            }
        }
        KnapsackInstance::new(n.ok_or_else(bad)?, q.ok_or_else(bad)?)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: u64,
    q: String,
}

impl Serialize for KnapsackInstance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InstanceRepr {
            n: self.n,
            q: self.q_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KnapsackInstance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = InstanceRepr::deserialize(d)?;
        KnapsackInstance::parse(r.n, &r.q).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptValue {
    Infeasible,
    Value(u64),
}

pub fn optimum(inst: &KnapsackInstance) -> OptValue {
    if inst.q < 0 {
        OptValue::Value(0)
    } else if inst.q > inst.n {
        OptValue::Infeasible
    } else {
        OptValue::Value(inst.ceil_q().to_u64().expect("ceil(q) <= n"))
    }
}

/// `q = floor + hat` with `hat` in `[0, 1)`.
pub fn frac_decompose(q: &Rational) -> (Integer, Rational) {
    let fl = rational::floor(q);
    let hat = Rational::from(q - &fl);
    (fl, hat)
}

/// `Some(0)` when the rank is trivially zero: `q` integral or outside `[0, n]`.
pub fn trivial_rank(inst: &KnapsackInstance) -> Option<u32> {
    if inst.is_integral() || !inst.q_in_range() {
        Some(0)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn inst(n: u64, q: &str) -> KnapsackInstance {
        KnapsackInstance::parse(n, q).unwrap()
    }

    #[test]
    fn optimum_cases() {
        assert_eq!(optimum(&inst(5, "9/4")), OptValue::Value(3));
        assert_eq!(optimum(&inst(5, "11/2")), OptValue::Infeasible);
        assert_eq!(optimum(&inst(5, "-1")), OptValue::Value(0));
        assert_eq!(optimum(&inst(5, "5")), OptValue::Value(5));
        assert_eq!(optimum(&inst(5, "0")), OptValue::Value(0));
    }

    #[test]
    fn frac_parts() {
        assert_eq!(frac_decompose(&r(9, 4)), (Integer::from(2), r(1, 4)));
        assert_eq!(frac_decompose(&r(3, 1)), (Integer::from(3), r(0, 1)));
        assert_eq!(frac_decompose(&r(-1, 2)), (Integer::from(-1), r(1, 2)));
    }

    #[test]
    fn trivial_rank_cases() {
        assert_eq!(trivial_rank(&inst(4, "2")), Some(0));
        assert_eq!(trivial_rank(&inst(4, "-3/10")), Some(0));
        assert_eq!(trivial_rank(&inst(4, "9/2")), Some(0));
        assert_eq!(trivial_rank(&inst(4, "1/2")), None);
    }

    #[test]
    fn literal_grammar() {
        assert_eq!(parse_rational("2.25").unwrap(), r(9, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), r(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), r(-3, 1));
        assert_eq!(parse_rational("6/4").unwrap(), r(3, 2));
        assert_eq!(parse_rational("2^-3").unwrap(), r(1, 8));
        assert_eq!(parse_rational("1+2^-20").unwrap(), r(1 + (1 << 20), 1 << 20));
        assert_eq!(parse_rational("3-2^-1").unwrap(), r(5, 2));
        assert_eq!(parse_rational("2^4").unwrap(), r(16, 1));
        let big = parse_rational("2^-100").unwrap();
        assert_eq!(*big.denom(), Integer::from(1) << 100);
        for bad in ["", "abc", "1/0", "1.", "1.2.3", "2^x", "1*2^-3", "--1", "1/2/3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn instance_text_roundtrip() {
        let i: KnapsackInstance = "n=6 q=1+2^-12".parse().unwrap();
        assert_eq!(i.n(), 6);
        assert_eq!(i.q_hat(), r(1, 4096));
        let again: KnapsackInstance = i.to_string().parse().unwrap();
        assert_eq!(i, again);
        assert!("n=0 q=1".parse::<KnapsackInstance>().is_err());
        assert!("q=1".parse::<KnapsackInstance>().is_err());
        assert!("n=3 q=1 z=2".parse::<KnapsackInstance>().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let i = inst(100, "1+2^-30");
        let s = serde_json::to_string(&i).unwrap();
        let back: KnapsackInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(i, back);
    }
}
