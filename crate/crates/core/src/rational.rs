//! Exact rational scalars and their text form.
//!
//! Breakpoints, affine coefficients and step-density values are carried as
//! arbitrary precision rationals. Irrational quantities (roots of quadratics,
//! bisection results) enter as the exact binary value of the `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

pub fn half() -> Q {
    q(1, 2)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn min(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// A parsed scalar together with how it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScalar {
    pub value: Q,
    /// `true` when the input was a decimal literal rather than `p/q` or an integer.
    pub from_decimal: bool,
}

/// Parses `p/q`, integers and plain or scientific decimals exactly.
pub fn parse_scalar(text: &str) -> Result<ParsedScalar> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(ParsedScalar { value: Q::new(n, d), from_decimal: false });
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(ParsedScalar { value: Q::from_integer(n), from_decimal: false });
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let negative = mantissa.starts_with('-');
    let digits = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a number: `{s}`")));
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().unwrap() / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Q::from_integer(all);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if negative {
        value = -value;
    }
    Ok(ParsedScalar { value, from_decimal: true })
}

pub fn parse_q(text: &str) -> Result<Q> {
    parse_scalar(text).map(|p| p.value)
}

/// `p/q` form, or `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod serde_q {
    use super::{format_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let text = ScalarText::deserialize(d)?;
        text.into_q().map_err(serde::de::Error::custom)
    }

    /// Accepts either a string (`"3/8"`, `"0.25"`) or a JSON number.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum ScalarText {
        Text(String),
        Int(i64),
        Float(f64),
    }

    impl ScalarText {
        pub(crate) fn into_q(self) -> crate::error::Result<Q> {
            match self {
                ScalarText::Text(t) => parse_q(&t),
                ScalarText::Int(i) => Ok(super::qi(i)),
                ScalarText::Float(f) => parse_q(&format!("{f}")),
            }
        }
    }

    pub mod vec {
        use super::{format_q, ScalarText, Q};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let raw = Vec::<ScalarText>::deserialize(d)?;
            raw.into_iter().map(|t| t.into_q().map_err(serde::de::Error::custom)).collect()
        }
    }

    pub mod option {
        use super::{format_q, ScalarText, Q};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&format_q(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            Option::<ScalarText>::deserialize(d)?.map(|t| t.into_q().map_err(serde::de::Error::custom)).transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("3/8").unwrap(), q(3, 8));
        assert_eq!(parse_q("-11/5").unwrap(), q(-11, 5));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        let p = parse_scalar("0.25").unwrap();
        assert_eq!(p.value, q(1, 4));
        assert!(p.from_decimal);
        assert_eq!(parse_q("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_q("-.5").unwrap(), q(-1, 2));
        assert_eq!(parse_q("2.5E1").unwrap(), qi(25));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for x in [q(3, 8), qi(-2), q(11, 80)] {
            assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1f64;
        assert_eq!(to_f64(&from_f64(x)), x);
        assert_eq!(to_f64(&q(1, 3)), 1.0 / 3.0);
    }
}
