//! Unbounded nonnegative integers with a 128-bit fast path.
//!
//! Trajectory values overflow 64 bits long before the starting values get
//! interesting, so every arithmetic step here is checked: values live in a
//! `u128` while they fit and are promoted to a heap-allocated big integer
//! the moment an operation would wrap. Nothing ever truncates silently.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Nonnegative integer of arbitrary magnitude.
///
/// Invariant: the `Big` variant only holds values that do not fit in `u128`,
/// so equality and ordering can be decided per variant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Nat {
    Small(u128),
    Big(BigUint),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    /// Wraps a big integer, demoting it to the inline variant when it fits.
    pub fn from_big(b: BigUint) -> Nat {
        match b.to_u128() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(b),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => b.clone(),
        }
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => u64::try_from(*v).ok(),
            Nat::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Nat::Small(1))
    }

    pub fn is_even(&self) -> bool {
        match self {
            Nat::Small(v) => v & 1 == 0,
            Nat::Big(b) => !b.bit(0),
        }
    }

    pub fn is_odd(&self) -> bool {
        !self.is_even()
    }

    /// Halves an even value exactly. Panics if the value is odd.
    pub fn half(&self) -> Nat {
        assert!(self.is_even(), "half() requires an even value");
        match self {
            Nat::Small(v) => Nat::Small(v >> 1),
            Nat::Big(b) => Nat::from_big(b >> 1u32),
        }
    }

    /// Computes 3n + 1 with promotion instead of overflow.
    pub fn triple_plus_one(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_mul(3).and_then(|m| m.checked_add(1)) {
                Some(r) => Nat::Small(r),
                None => Nat::Big(BigUint::from(*v) * 3u32 + 1u32),
            },
            Nat::Big(b) => Nat::Big(b * 3u32 + 1u32),
        }
    }

    /// Number of trailing zero bits (the exponent of the largest power of
    /// two dividing the value). Zero input yields zero.
    pub fn twos_valuation(&self) -> u64 {
        match self {
            Nat::Small(0) => 0,
            Nat::Small(v) => v.trailing_zeros() as u64,
            Nat::Big(b) => b.trailing_zeros().unwrap_or(0),
        }
    }

    /// The value with all factors of two removed.
    pub fn odd_part(&self) -> Nat {
        if self.is_zero() {
            return Nat::ZERO;
        }
        match self {
            Nat::Small(v) => Nat::Small(v >> v.trailing_zeros()),
            Nat::Big(b) => Nat::from_big(b >> b.trailing_zeros().unwrap_or(0)),
        }
    }

    pub fn checked_add(&self, other: &Nat) -> Nat {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => match a.checked_add(*b) {
                Some(r) => Nat::Small(r),
                None => Nat::Big(BigUint::from(*a) + BigUint::from(*b)),
            },
            _ => Nat::from_big(self.to_biguint() + other.to_biguint()),
        }
    }

    pub fn checked_mul(&self, other: &Nat) -> Nat {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => match a.checked_mul(*b) {
                Some(r) => Nat::Small(r),
                None => Nat::Big(BigUint::from(*a) * BigUint::from(*b)),
            },
            _ => Nat::from_big(self.to_biguint() * other.to_biguint()),
        }
    }

    /// Saturating subtraction; `a - b` is zero when `b > a`.
    pub fn saturating_sub(&self, other: &Nat) -> Nat {
        if self <= other {
            return Nat::ZERO;
        }
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a - b),
            _ => Nat::from_big(self.to_biguint() - other.to_biguint()),
        }
    }

    /// Exact division. Panics when the divisor does not divide the value.
    pub fn exact_div(&self, divisor: &Nat) -> Nat {
        assert!(!divisor.is_zero(), "division by zero");
        match (self, divisor) {
            (Nat::Small(a), Nat::Small(d)) => {
                assert_eq!(a % d, 0, "{a} is not divisible by {d}");
                Nat::Small(a / d)
            }
            _ => {
                let (q, r) = num_integer::Integer::div_rem(&self.to_biguint(), &divisor.to_biguint());
                assert!(r.is_zero(), "{self} is not divisible by {divisor}");
                Nat::from_big(q)
            }
        }
    }

    pub fn is_divisible_by(&self, divisor: &Nat) -> bool {
        assert!(!divisor.is_zero(), "division by zero");
        match (self, divisor) {
            (Nat::Small(a), Nat::Small(d)) => a % d == 0,
            _ => (self.to_biguint() % divisor.to_biguint()).is_zero(),
        }
    }

    /// `self mod m` for a small modulus.
    pub fn rem_u64(&self, m: u64) -> u64 {
        assert!(m != 0, "division by zero");
        match self {
            Nat::Small(v) => (v % m as u128) as u64,
            Nat::Big(b) => (b % BigUint::from(m)).to_u64().expect("remainder fits"),
        }
    }

    /// `base^exp` computed exactly.
    pub fn pow(base: u64, exp: u32) -> Nat {
        let mut acc = Nat::ONE;
        let b = Nat::from(base);
        for _ in 0..exp {
            acc = acc.checked_mul(&b);
        }
        acc
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v as u128)
    }
}

impl From<u128> for Nat {
    fn from(v: u128) -> Self {
        Nat::Small(v)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(v as u128)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        Nat::from_big(b)
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            // Big never fits u128, so it always exceeds Small.
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Error raised when parsing a decimal or radix string fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNatError(pub String);

impl fmt::Display for ParseNatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid unsigned integer: {}", self.0)
    }
}

impl std::error::Error for ParseNatError {}

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.to_string()));
        }
        match s.parse::<u128>() {
            Ok(v) => Ok(Nat::Small(v)),
            Err(_) => BigUint::parse_bytes(s.as_bytes(), 10)
                .map(Nat::from_big)
                .ok_or_else(|| ParseNatError(s.to_string())),
        }
    }
}

// JSON carries Nat as a decimal string so values beyond 2^53 survive
// round trips through consumers that read numbers as doubles.
impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn promotes_on_overflow_and_demotes_when_halved() {
        let near_max = Nat::Small(u128::MAX - 2);
        let promoted = near_max.triple_plus_one();
        assert!(matches!(promoted, Nat::Big(_)));
        assert!(promoted > near_max);

        let mut v = promoted;
        for _ in 0..4 {
            assert!(v.is_even() || v.is_odd());
            if v.is_even() {
                v = v.half();
            } else {
                v = v.triple_plus_one();
            }
        }
        // After enough halvings the value fits inline again.
        let big = Nat::Big(BigUint::from(u128::MAX) + 1u32);
        assert!(matches!(big.half(), Nat::Small(_)));
    }

    #[test]
    fn ordering_crosses_the_width_boundary() {
        let small = Nat::Small(u128::MAX);
        let big = Nat::from_big(BigUint::from(u128::MAX) + 1u32);
        assert!(small < big);
        assert!(big > small);
        assert_eq!(big.cmp(&big), Ordering::Equal);
    }

    #[test]
    fn exact_div_checks_divisibility() {
        assert_eq!(Nat::from(15u64).exact_div(&Nat::from(3u64)), Nat::from(5u64));
        let r = std::panic::catch_unwind(|| Nat::from(16u64).exact_div(&Nat::from(3u64)));
        assert!(r.is_err());
    }

    #[test]
    fn odd_part_strips_all_twos() {
        assert_eq!(Nat::from(160u64).odd_part(), Nat::from(5u64));
        assert_eq!(Nat::from(160u64).twos_valuation(), 5);
        assert_eq!(Nat::from(7u64).odd_part(), Nat::from(7u64));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "1", "9232", "340282366920938463463374607431768211457"] {
            let n: Nat = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("".parse::<Nat>().is_err());
        assert!("-3".parse::<Nat>().is_err());
        assert!("12x".parse::<Nat>().is_err());
    }

    #[test]
    fn serde_uses_decimal_strings() {
        let n = Nat::from(9232u64);
        let js = serde_json::to_string(&n).unwrap();
        assert_eq!(js, "\"9232\"");
        let back: Nat = serde_json::from_str(&js).unwrap();
        assert_eq!(back, n);
    }
}
