use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact decimal number: `mantissa × 10^-scale`.
///
/// `fractional` records whether the literal was written with a fraction or an
/// exponent, so `1` and `1.0` stay textually distinct while still comparing
/// equal under [`Number::value_eq`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Number {
    mantissa: BigInt,
    scale: i64,
    fractional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{0}`")]
pub struct NumberParseError(pub String);

/// Exponents past this magnitude are rejected rather than materialized.
const MAX_EXPONENT: i64 = 1_000_000;

/// Plain-decimal rendering is used up to this many fractional digits.
const MAX_PLAIN_SCALE: i64 = 30;

impl Number {
    pub fn from_i64(v: i64) -> Self {
        Self {
            mantissa: BigInt::from(v),
            scale: 0,
            fractional: false,
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Self {
            mantissa: BigInt::from(v),
            scale: 0,
            fractional: false,
        }
    }

    /// Shortest round-trip decimal of `v`; `None` for NaN and infinities.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let text = format!("{v:?}");
        let mut n: Number = text.parse().ok()?;
        n.fractional = true;
        Some(n)
    }

    pub fn is_integer_literal(&self) -> bool {
        !self.fractional
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn as_i64(&self) -> Option<i64> {
        let (m, s) = self.reduced();
        if s > 0 {
            return None;
        }
        let mut m = m;
        for _ in 0..(-s) {
            m *= 10;
            if m.bits() > 64 {
                return None;
            }
        }
        m.to_i64()
    }

    /// Mantissa with trailing zeros stripped; zero reduces to `(0, 0)`.
    fn reduced(&self) -> (BigInt, i64) {
        if self.mantissa.is_zero() {
            return (BigInt::zero(), 0);
        }
        let ten = BigInt::from(10);
        let mut m = self.mantissa.clone();
        let mut s = self.scale;
        while (&m % &ten).is_zero() {
            m /= &ten;
            s -= 1;
        }
        (m, s)
    }

    /// Exact rational equality, ignoring how the literal was written.
    pub fn value_eq(&self, other: &Number) -> bool {
        self.reduced() == other.reduced()
    }
}

impl From<i64> for Number {
    fn from(v: i64) -> Self {
        Number::from_i64(v)
    }
}

impl FromStr for Number {
    type Err = NumberParseError;

    /// Accepts exactly the JSON number grammar.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || NumberParseError(s.to_string());
        let bytes = s.as_bytes();
        let mut i = 0;
        let negative = bytes.first() == Some(&b'-');
        if negative {
            i += 1;
        }
        let int_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_digits = &s[int_start..i];
        if int_digits.is_empty() || (int_digits.len() > 1 && int_digits.starts_with('0')) {
            return Err(err());
        }
        let mut frac_digits = "";
        let mut fractional = false;
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            frac_digits = &s[start..i];
            if frac_digits.is_empty() {
                return Err(err());
            }
            fractional = true;
        }
        let mut exponent: i64 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            i += 1;
            let mut exp_negative = false;
            if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                exp_negative = bytes[i] == b'-';
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &s[start..i];
            if digits.is_empty() || digits.len() > 7 {
                return Err(err());
            }
            exponent = digits.parse::<i64>().map_err(|_| err())?;
            if exponent > MAX_EXPONENT {
                return Err(err());
            }
            if exp_negative {
                exponent = -exponent;
            }
            fractional = true;
        }
        if i != bytes.len() {
            return Err(err());
        }
        let digits = format!("{int_digits}{frac_digits}");
        let mut mantissa: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            mantissa = -mantissa;
        }
        Ok(Number {
            mantissa,
            scale: frac_digits.len() as i64 - exponent,
            fractional,
        })
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.fractional && self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        if self.scale <= 0 || self.scale > MAX_PLAIN_SCALE {
            if self.scale == 0 {
                return write!(f, "{}.0", self.mantissa);
            }
            return write!(f, "{}e{}", self.mantissa, -self.scale);
        }
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        let digits = self.mantissa.abs().to_string();
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int_part}.{frac_part}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Number {
        s.parse().unwrap()
    }

    #[test]
    fn literal_text_round_trips() {
        for s in [
            "0",
            "-3",
            "0.1",
            "1.0",
            "-0.0025",
            "123456789012345678901234567890",
            "1e3",
        ] {
            assert_eq!(n(s).to_string(), s);
        }
        // very small magnitudes switch to exponent form
        assert_eq!(n("2.5e-40").to_string(), "25e-41");
        assert!(n("25e-41").value_eq(&n("2.5e-40")));
    }

    #[test]
    fn integer_and_fraction_compare_by_value() {
        assert!(n("1").value_eq(&n("1.0")));
        assert!(n("1e2").value_eq(&n("100")));
        assert!(n("0.10").value_eq(&n("0.1")));
        assert!(!n("0.1").value_eq(&n("0.11")));
        assert_ne!(n("1"), n("1.0"));
        assert!(n("1").is_integer_literal());
        assert!(!n("1.0").is_integer_literal());
    }

    #[test]
    fn rejects_non_json_grammar() {
        for s in [
            "",
            "-",
            "01",
            "1.",
            ".5",
            "+1",
            "1e",
            "NaN",
            "1_000",
            "0x10",
            "1e99999999",
        ] {
            assert!(s.parse::<Number>().is_err(), "{s}");
        }
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(Number::from_f64(0.1).unwrap().to_string(), "0.1");
        assert_eq!(Number::from_f64(2.0).unwrap().to_string(), "2.0");
        assert!(Number::from_f64(f64::NAN).is_none());
        assert_eq!(n("0.25").to_f64(), 0.25);
        assert_eq!(n("1.5e1").as_i64(), Some(15));
        assert_eq!(n("1.5").as_i64(), None);
    }
}
