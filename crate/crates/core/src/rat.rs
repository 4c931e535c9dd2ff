//! Exact rational numbers and their canonical `"num/den"` string form.
//!
//! Depths and jump values are rationals with small denominators (dividing the
//! ramification index), so a 64-bit ratio type is plenty. All serialized
//! rationals use the reduced form `"num/den"` with a positive denominator;
//! bare integers are accepted on input.

use num::rational::Ratio;
use num::Zero;
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

/// Exact rational number used for depths and jump values.
pub type Rat = Ratio<i64>;

/// Convenience constructor; panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(num, den)
}

/// Error parsing a `"num/den"` string.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatParseError {
    /// Not of the form `int` or `int/int`.
    #[error("malformed rational {0:?}, expected \"num\" or \"num/den\"")]
    Malformed(String),
    /// Denominator was zero.
    #[error("zero denominator in rational {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"3/2"`, `"-1/4"` or `"7"` into a reduced rational.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim()
                .parse::<i64>()
                .map_err(|_| RatParseError::Malformed(s.to_string()))?,
            d.trim()
                .parse::<i64>()
                .map_err(|_| RatParseError::Malformed(s.to_string()))?,
        ),
        None => (
            s.parse::<i64>()
                .map_err(|_| RatParseError::Malformed(s.to_string()))?,
            1,
        ),
    };
    if den == 0 {
        return Err(RatParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Ratio::new(num, den))
}

/// Canonical string form: reduced, explicit denominator, `"0/1"` for zero.
pub fn format_rat(r: Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serde serializer for [`Rat`] fields, emitting the canonical string form.
pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&format_rat(*r))
}

/// Serde deserializer accepting `"num/den"` or bare integer strings.
pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
    let s = String::deserialize(de)?;
    parse_rat(&s).map_err(serde::de::Error::custom)
}

/// Serde helpers for `Vec<Rat>` fields.
pub mod rat_vec {
    use super::*;

    /// Serializes each entry in canonical string form.
    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rat(*r))?;
        }
        seq.end()
    }

    /// Parses a sequence of rational strings.
    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
        let raw = Vec::<String>::deserialize(de)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// True when `r` is a nonnegative integer multiple of `1/e`.
pub fn denominator_divides(r: Rat, e: i64) -> bool {
    r >= Rat::zero() && (r * Rat::from_integer(e)).is_integer()
}
