//! Canonical text form for exact rationals.
//!
//! The wire format is an optional leading minus, then `num/den` in lowest
//! terms with `den >= 1`; the `/1` is omitted for integers. `Display` on
//! [`Rational`] already produces exactly this form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer power that also accepts negative exponents (`r` must then be nonzero).
pub fn pow(r: &Rational, exp: i64) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    let mag = i32::try_from(exp.unsigned_abs()).expect("exponent too large");
    let p = num_traits::pow::Pow::pow(r, mag);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn parse(input: &str) -> Result<Rational> {
    let err = |position: usize, reason: &'static str| Error::ParseRational {
        input: input.to_string(),
        position,
        reason,
    };
    let s = input.trim();
    let offset = input.len() - input.trim_start().len();
    if s.is_empty() {
        return Err(err(offset, "empty input"));
    }
    let (negative, body, body_start) = match s.strip_prefix('-') {
        Some(rest) => (true, rest, offset + 1),
        None => (false, s, offset),
    };
    let (num_str, den_str) = match body.find('/') {
        Some(i) => (&body[..i], Some((&body[i + 1..], body_start + i + 1))),
        None => (body, None),
    };
    let digits = |text: &str, start: usize| -> Result<BigInt> {
        if text.is_empty() {
            return Err(err(start, "expected digits"));
        }
        if let Some(i) = text.find(|c: char| !c.is_ascii_digit()) {
            return Err(err(start + i, "unexpected character"));
        }
        Ok(text.parse::<BigInt>().expect("validated digits"))
    };
    let mut num = digits(num_str, body_start)?;
    if negative {
        num = -num;
    }
    let den = match den_str {
        Some((text, start)) => {
            let d = digits(text, start)?;
            if d.is_zero() {
                return Err(err(start, "zero denominator"));
            }
            d
        }
        None => BigInt::one(),
    };
    Ok(Rational::new(num, den))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// `#[serde(with = "rational::text")]` for a single rational field.
pub mod text {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "rational::text_vec")]` for a list of rationals.
pub mod text_vec {
    use super::Rational;
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rs.len()))?;
        for r in rs {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| super::parse(s).map_err(D::Error::custom))
            .collect()
    }
}
