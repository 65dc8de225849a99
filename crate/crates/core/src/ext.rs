//! Extended real numbers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// A real number extended with `+inf` and `-inf`.
///
/// Function values of proper functions live in `R ∪ {+inf}`; envelope values
/// may additionally be `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossless view as an IEEE double.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtReal {
    /// NaN maps to `+inf`: the only NaN source in evaluation is `inf - inf`
    /// style overflow, which we treat as outside the domain.
    fn from(v: f64) -> Self {
        if v.is_nan() || v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;

    /// `+inf` absorbs finite values. `+inf + -inf` is `+inf`, matching the
    /// convention for proper functions where `-inf` never appears.
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from(a + b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(ExtReal::PosInf),
                "-inf" => Ok(ExtReal::NegInf),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}
