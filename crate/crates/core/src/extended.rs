use std::cmp::Ordering;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A nonnegative value on the extended real line.
///
/// Unbounded LP values are carried as [`ExtReal::Infinite`] rather than a
/// large sentinel. Serializes as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the unbounded case; only for printing and plotting.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Ratio `num / den` of nonnegative quantities, infinite when `den == 0 < num`.
    /// `0 / 0` is treated as 1: both candidates are optimal.
    pub fn ratio(num: f64, den: f64) -> Self {
        if den > 0.0 {
            ExtReal::Finite(num / den)
        } else if num > 0.0 {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(1.0)
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Ordering::Less,
            (ExtReal::Infinite, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::Infinite, ExtReal::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            _ => Some(self.total_cmp(other)),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" => Ok(ExtReal::Infinite),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(ExtReal::ratio(3.0, 1.5), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::ratio(1.0, 0.0), ExtReal::Infinite);
        assert_eq!(ExtReal::ratio(0.0, 0.0), ExtReal::Finite(1.0));
    }

    #[test]
    fn json_round_trip() {
        let vals = vec![ExtReal::Finite(1.5), ExtReal::Infinite];
        let s = serde_json::to_string(&vals).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vals);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300) < ExtReal::Infinite);
        assert_eq!(ExtReal::Finite(2.0).max(ExtReal::Infinite), ExtReal::Infinite);
    }
}
