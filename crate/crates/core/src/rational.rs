//! Exact rationals used for every ε and every Følner ratio.
//!
//! Rationals travel as `"p/q"` strings in files and reports; integers may be
//! written without a denominator.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Ratio = num_rational::Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("malformed rational {0:?}: expected \"p/q\" or an integer")]
    Malformed(String),
    #[error("rational {0:?} has a zero denominator")]
    ZeroDenominator(String),
    #[error("rational {0:?} must be strictly positive")]
    NotPositive(String),
}

/// Exact rational newtype with `"p/q"` serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub Ratio);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.numer() > 0
    }

    /// `count / size` as an exact ratio. `size` must be nonzero.
    pub fn ratio_of(count: usize, size: usize) -> Self {
        Rational::new(count as i64, size as i64)
    }

    /// The least integer strictly greater than `bound`, i.e. `floor(bound) + 1`.
    pub fn least_integer_above(&self) -> i64 {
        self.0.floor().to_integer() + 1
    }

    /// Parses a strictly positive rational (the contract for every ε).
    pub fn parse_positive(text: &str) -> Result<Self, RationalError> {
        let r: Rational = text.parse()?;
        if !r.is_positive() {
            return Err(RationalError::NotPositive(text.to_string()));
        }
        Ok(r)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<Ratio> for Rational {
    fn from(r: Ratio) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl std::str::FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        let num: i64 = num
            .parse()
            .map_err(|_| RationalError::Malformed(s.to_string()))?;
        let den: i64 = den
            .parse()
            .map_err(|_| RationalError::Malformed(s.to_string()))?;
        if den == 0 {
            return Err(RationalError::ZeroDenominator(s.to_string()));
        }
        Ok(Rational::new(num, den))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        let r: Rational = "10/1001".parse().unwrap();
        assert_eq!(r, Rational::new(10, 1001));
        assert_eq!("4/8".parse::<Rational>().unwrap().to_string(), "1/2");
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::from_integer(3));
    }

    #[test]
    fn rejects_zero_denominator_and_garbage() {
        assert_eq!(
            "3/0".parse::<Rational>(),
            Err(RationalError::ZeroDenominator("3/0".into()))
        );
        assert!(matches!(
            "x/2".parse::<Rational>(),
            Err(RationalError::Malformed(_))
        ));
        assert!(matches!(
            Rational::parse_positive("0/5"),
            Err(RationalError::NotPositive(_))
        ));
    }

    #[test]
    fn least_integer_above_is_strict() {
        // 2R/ε with R = 1, ε = 1/10 is exactly 20, so N = 21.
        assert_eq!(Rational::new(20, 1).least_integer_above(), 21);
        assert_eq!(Rational::new(41, 2).least_integer_above(), 21);
        assert_eq!(Rational::new(0, 1).least_integer_above(), 1);
    }

    #[test]
    fn serde_uses_p_over_q() {
        let r = Rational::new(2, 21);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"2/21\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
