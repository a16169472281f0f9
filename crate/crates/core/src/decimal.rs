use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;

/// Exact decimal number: `mantissa * 10^(-scale)`.
///
/// Always normalized: a zero value is stored as `(0, 0)`, and a non-zero
/// mantissa never ends in a trailing zero unless `scale == 0`. Equality and
/// ordering are therefore numeric, and rendering never produces trailing
/// zeros. Counts, min/max values, and parsed answer payloads all flow
/// through this type so aggregation stays bit-reproducible (floats would
/// not be).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

/// Parsing rejects anything with more significant digits so that
/// cross-scale comparison (`mantissa * 10^delta`) can never overflow i128.
const MAX_DIGITS: usize = 18;

impl Decimal {
    pub const ZERO: Decimal = Decimal { mantissa: 0, scale: 0 };

    pub fn new(mantissa: i128, scale: u32) -> Self {
        let mut d = Decimal { mantissa, scale };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.scale = 0;
            return;
        }
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    /// Mantissa scaled to `scale` decimal places (used by ordering).
    fn scaled_mantissa(&self, scale: u32) -> i128 {
        debug_assert!(scale >= self.scale);
        self.mantissa * 10_i128.pow(scale - self.scale)
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal::new(v as i128, 0)
    }
}

impl From<u32> for Decimal {
    fn from(v: u32) -> Self {
        Decimal::new(v as i128, 0)
    }
}

impl From<usize> for Decimal {
    fn from(v: usize) -> Self {
        Decimal::new(v as i128, 0)
    }
}

impl FromStr for Decimal {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || CoreError::Decimal(format!("invalid decimal literal: {s:?}"));
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits: String = int_part.chars().chain(frac_part.chars()).collect();
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if digits.trim_start_matches('0').len() > MAX_DIGITS {
            return Err(CoreError::Decimal(format!(
                "decimal literal exceeds {MAX_DIGITS} significant digits: {s:?}"
            )));
        }
        let mut mantissa: i128 = 0;
        for c in digits.chars() {
            mantissa = mantissa * 10 + (c as u8 - b'0') as i128;
        }
        if neg {
            mantissa = -mantissa;
        }
        Ok(Decimal::new(mantissa, frac_part.len() as u32))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let neg = self.mantissa < 0;
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let (int_part, frac_part) = if digits.len() > scale {
            let split = digits.len() - scale;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", digits, width = scale))
        };
        write!(f, "{}{}.{}", if neg { "-" } else { "" }, int_part, frac_part)
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.scaled_mantissa(scale).cmp(&other.scaled_mantissa(scale))
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl serde::Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
