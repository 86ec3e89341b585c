//! Exact nonnegative rationals for path probabilities.
//!
//! Path probabilities are products of `1/n_k` and must sum to exactly 1
//! over an enumeration, so they are kept as reduced `u64` fractions with
//! checked arithmetic. Overflow is reported, never wrapped: a failing
//! product means the enumeration is far beyond desk scale anyway.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::RationalError;

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        let g = gcd(num, den);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn checked_mul(self, other: Rational) -> Result<Rational, RationalError> {
        // Cross-reduce first so intermediate products stay small.
        let g1 = gcd(self.num, other.den);
        let g2 = gcd(other.num, self.den);
        let num = (self.num / g1)
            .checked_mul(other.num / g2)
            .ok_or(RationalError::Overflow)?;
        let den = (self.den / g2)
            .checked_mul(other.den / g1)
            .ok_or(RationalError::Overflow)?;
        Rational::new(num, den)
    }

    pub fn checked_add(self, other: Rational) -> Result<Rational, RationalError> {
        let g = gcd(self.den, other.den);
        let den = (self.den / g)
            .checked_mul(other.den)
            .ok_or(RationalError::Overflow)?;
        let a = self
            .num
            .checked_mul(other.den / g)
            .ok_or(RationalError::Overflow)?;
        let b = other
            .num
            .checked_mul(self.den / g)
            .ok_or(RationalError::Overflow)?;
        Rational::new(a.checked_add(b).ok_or(RationalError::Overflow)?, den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let (num, den) = text
            .split_once('/')
            .ok_or_else(|| serde::de::Error::custom("expected \"num/den\""))?;
        let num: u64 = num.trim().parse().map_err(serde::de::Error::custom)?;
        let den: u64 = den.trim().parse().map_err(serde::de::Error::custom)?;
        Rational::new(num, den).map_err(serde::de::Error::custom)
    }
}
