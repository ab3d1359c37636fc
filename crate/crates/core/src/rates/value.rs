use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

/// Default representation limit for explicit rate values, in bits.
pub const DEFAULT_CAP_BITS: u64 = 1 << 20;

/// Bit-length limit above which a value is replaced by [`RateValue::Astronomical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cap(pub u64);

impl Default for Cap {
    fn default() -> Self {
        Cap(DEFAULT_CAP_BITS)
    }
}

impl Cap {
    pub const UNBOUNDED: Cap = Cap(u64::MAX);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn check(self, n: BigUint) -> RateValue {
        if n.bits() > self.0 {
            RateValue::astronomical("", self)
        } else {
            RateValue::Finite(n)
        }
    }

    pub fn add(self, a: &RateValue, b: &RateValue) -> RateValue {
        match (a, b) {
            (RateValue::Finite(x), RateValue::Finite(y)) => self.check(x + y),
            _ => RateValue::astronomical("", self),
        }
    }

    pub fn mul(self, a: &RateValue, b: &RateValue) -> RateValue {
        match (a, b) {
            (RateValue::Finite(x), _) | (_, RateValue::Finite(x)) if x.is_zero() => RateValue::zero(),
            (RateValue::Finite(x), RateValue::Finite(y)) => {
                // The product has at least bits(x) + bits(y) − 1 bits.
                if x.bits() + y.bits() - 1 > self.0 {
                    RateValue::astronomical("", self)
                } else {
                    self.check(x * y)
                }
            }
            _ => RateValue::astronomical("", self),
        }
    }

    pub fn add_u(self, a: &RateValue, c: u64) -> RateValue {
        self.add(a, &RateValue::from(c))
    }

    pub fn mul_u(self, a: &RateValue, c: u64) -> RateValue {
        self.mul(a, &RateValue::from(c))
    }

    pub fn pow(self, a: &RateValue, e: u32) -> RateValue {
        match a {
            _ if e == 0 => RateValue::from(1u64),
            RateValue::Finite(x) if x.is_zero() || x.is_one() => a.clone(),
            RateValue::Finite(x) => {
                if (x.bits() - 1).saturating_mul(u64::from(e)) >= self.0 {
                    RateValue::astronomical("", self)
                } else {
                    self.check(x.pow(e))
                }
            }
            RateValue::Astronomical { .. } => RateValue::astronomical("", self),
        }
    }

    /// `x·(y + 1) − 1`, the shape `(a(k+1) − 1)` appearing in almost every rate.
    pub fn scaled_pred(self, a: &RateValue, k: &RateValue) -> RateValue {
        self.mul(a, &self.add_u(k, 1)).saturating_pred()
    }
}

/// A big natural rate value, or a marker that the value exceeded the bit cap.
///
/// `Astronomical` compares strictly greater than every finite value and equal
/// to every other `Astronomical`.
#[derive(Debug, Clone)]
pub enum RateValue {
    Finite(BigUint),
    Astronomical { expr: String, cap_bits: u64 },
}

impl RateValue {
    pub fn zero() -> Self {
        RateValue::Finite(BigUint::zero())
    }

    pub fn astronomical(expr: impl Into<String>, cap: Cap) -> Self {
        RateValue::Astronomical { expr: expr.into(), cap_bits: cap.0 }
    }

    pub fn is_astronomical(&self) -> bool {
        matches!(self, RateValue::Astronomical { .. })
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            RateValue::Finite(n) => Some(n),
            RateValue::Astronomical { .. } => None,
        }
    }

    /// Finite value as `u64`, if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        self.finite().and_then(|n| u64::try_from(n).ok())
    }

    /// Replaces the defining expression of an astronomical value.
    pub fn relabel(self, expr: impl FnOnce() -> String) -> Self {
        match self {
            RateValue::Astronomical { cap_bits, .. } => RateValue::Astronomical { expr: expr(), cap_bits },
            v => v,
        }
    }

    /// Short form for expression labels: decimal up to 256 bits, the bit
    /// length beyond that (printing a value near the cap costs more than computing it).
    pub fn label(&self) -> String {
        match self {
            RateValue::Finite(n) if n.bits() > 256 => format!("<{}-bit>", n.bits()),
            v => v.to_string(),
        }
    }

    pub fn saturating_pred(self) -> Self {
        match self {
            RateValue::Finite(n) if n.is_zero() => RateValue::Finite(n),
            RateValue::Finite(n) => RateValue::Finite(n - 1u32),
            v => v,
        }
    }

    /// Whether the natural `n` is at most this bound.
    pub fn bounds(&self, n: u64) -> bool {
        match self {
            RateValue::Finite(b) => BigUint::from(n) <= *b,
            RateValue::Astronomical { .. } => true,
        }
    }

    pub fn max_of(a: RateValue, b: RateValue) -> RateValue {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl From<u64> for RateValue {
    fn from(n: u64) -> Self {
        RateValue::Finite(BigUint::from(n))
    }
}

impl From<BigUint> for RateValue {
    fn from(n: BigUint) -> Self {
        RateValue::Finite(n)
    }
}

impl PartialEq for RateValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RateValue {}

impl PartialOrd for RateValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RateValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RateValue::Finite(a), RateValue::Finite(b)) => a.cmp(b),
            (RateValue::Finite(_), RateValue::Astronomical { .. }) => Ordering::Less,
            (RateValue::Astronomical { .. }, RateValue::Finite(_)) => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateValue::Finite(n) => write!(f, "{n}"),
            RateValue::Astronomical { expr, .. } => write!(f, "ASTRO:{expr}"),
        }
    }
}

impl Serialize for RateValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
