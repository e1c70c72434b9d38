//! Exact non-negative integers used for weights and capacities.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An item weight (equal to its value in Simple Knapsack) or a capacity.
///
/// Unbounded precision: capacities grow like `n * 3^n`, and the
/// construction relies on exact equalities between sums.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(BigUint);

impl Weight {
    pub fn zero() -> Self {
        Weight(BigUint::zero())
    }

    pub fn one() -> Self {
        Weight(BigUint::one())
    }

    pub fn from_biguint(v: BigUint) -> Self {
        Weight(v)
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Weight) -> Weight {
        if self >= other {
            Weight(&self.0 - &other.0)
        } else {
            Weight(&other.0 - &self.0)
        }
    }

    /// `self - other`, or `None` when it would go negative.
    pub fn checked_sub(&self, other: &Weight) -> Option<Weight> {
        (self >= other).then(|| Weight(&self.0 - &other.0))
    }

    /// Strict decimal parser: non-empty ASCII digits, no sign, no separators,
    /// no leading zeros (except the literal `0`).
    pub fn parse_decimal(s: &str) -> Result<Weight> {
        let bytes = s.as_bytes();
        let canonical = !bytes.is_empty()
            && bytes.iter().all(u8::is_ascii_digit)
            && (bytes.len() == 1 || bytes[0] != b'0');
        if !canonical {
            return Err(Error::BadDecimal(s.to_string()));
        }
        BigUint::parse_bytes(bytes, 10)
            .map(Weight)
            .ok_or_else(|| Error::BadDecimal(s.to_string()))
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Weight>>(items: I) -> Weight {
        let mut acc = BigUint::zero();
        for w in items {
            acc += &w.0;
        }
        Weight(acc)
    }
}

impl From<u64> for Weight {
    fn from(v: u64) -> Self {
        Weight(BigUint::from(v))
    }
}

impl From<BigUint> for Weight {
    fn from(v: BigUint) -> Self {
        Weight(v)
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Weight::parse_decimal(s)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add<&Weight> for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        self.0 += &rhs.0;
    }
}

/// Panics on underflow, like unsigned integer subtraction.
impl Sub<&Weight> for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight(&self.0 - &rhs.0)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Weight::parse_decimal(&s).map_err(serde::de::Error::custom)
    }
}
