//! Exact integer ceilings of logarithms and exponentials.
//!
//! Values of `e` and `eⁿ` are bracketed by fixed-point integer intervals; the
//! precision is doubled until both ends of the interval round to the same
//! integer. The answers are therefore exact, never approximations.

use std::cmp::Ordering;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// `[lo, hi]` with `lo ≤ e·2^prec ≤ hi`, derived from the most precise
/// interval computed so far when that suffices.
fn e_interval(prec: u64) -> (BigUint, BigUint) {
    static CACHE: Mutex<Option<(u64, BigUint, BigUint)>> = Mutex::new(None);
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    match &*cache {
        Some((p, lo, hi)) if *p >= prec => {
            let d = p - prec;
            // Rounding lo down and hi up keeps the bracket valid.
            (lo >> d, (hi >> d) + 1u32)
        }
        _ => {
            let (lo, hi) = e_series(prec);
            *cache = Some((prec, lo.clone(), hi.clone()));
            (lo, hi)
        }
    }
}

fn e_series(prec: u64) -> (BigUint, BigUint) {
    let mut term = BigUint::one() << prec;
    let mut sum = term.clone();
    let mut k = 1u64;
    loop {
        term /= k;
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    // Each of the k floored terms lost less than 1; the omitted tail is below 2.
    let hi = &sum + BigUint::from(k + 2);
    (sum, hi)
}

/// `[lo, hi]` with `lo ≤ eⁿ·2^prec ≤ hi`.
fn exp_interval(n: u64, prec: u64) -> (BigUint, BigUint) {
    let one = BigUint::one() << prec;
    if n == 0 {
        return (one.clone(), one);
    }
    let (mut base_lo, mut base_hi) = e_interval(prec);
    let (mut acc_lo, mut acc_hi) = (one.clone(), one);
    let mut e = n;
    loop {
        if e & 1 == 1 {
            acc_lo = (&acc_lo * &base_lo) >> prec;
            acc_hi = ((&acc_hi * &base_hi) >> prec) + 1u32;
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base_lo = (&base_lo * &base_lo) >> prec;
        base_hi = ((&base_hi * &base_hi) >> prec) + 1u32;
    }
    (acc_lo, acc_hi)
}

fn ceil_shift(x: &BigUint, shift: u64) -> BigUint {
    let q = x >> shift;
    if (&q << shift) == *x {
        q
    } else {
        q + 1u32
    }
}

/// Number of bits in the integer part of `eⁿ`, rounded up.
pub fn exp_bits_upper(n: u64) -> u64 {
    // One spare bit absorbs the float rounding of n·log₂e.
    (n as f64 * std::f64::consts::LOG2_E).ceil() as u64 + 2
}

/// `⌈c·eⁿ⌉`.
pub fn ceil_scaled_exp(c: &BigUint, n: u64) -> BigUint {
    if c.is_zero() {
        return BigUint::zero();
    }
    if n == 0 {
        return c.clone();
    }
    let mut prec = exp_bits_upper(n) + c.bits() + 64 + 4 * (64 - n.leading_zeros() as u64);
    loop {
        let (lo, hi) = exp_interval(n, prec);
        let (a, b) = (ceil_shift(&(c * lo), prec), ceil_shift(&(c * hi), prec));
        if a == b {
            return a;
        }
        prec *= 2;
    }
}

/// `lo·2^exp ≤ v ≤ hi·2^exp`, with mantissas kept to a fixed number of bits.
struct Bracket {
    lo: BigUint,
    hi: BigUint,
    exp: i64,
}

impl Bracket {
    fn mul(&self, other: &Bracket, bits: u64) -> Bracket {
        let hi = &self.hi * &other.hi;
        let shift = hi.bits().saturating_sub(bits);
        Bracket { lo: (&self.lo * &other.lo) >> shift, hi: ceil_shift(&hi, shift), exp: self.exp + other.exp + shift as i64 }
    }

    /// `Some(order)` of `v` against `x` once the bracket decides it.
    fn cmp(&self, x: &BigUint) -> Option<Ordering> {
        let scale = |m: &BigUint| -> (BigUint, BigUint) {
            if self.exp >= 0 {
                (m << self.exp as u64, x.clone())
            } else {
                (m.clone(), x << (-self.exp) as u64)
            }
        };
        let (lo, xs) = scale(&self.lo);
        if lo > xs {
            return Some(Ordering::Greater);
        }
        let (hi, xs) = scale(&self.hi);
        (hi < xs).then_some(Ordering::Less)
    }
}

/// `eᵐ` bracketed with `bits`-bit mantissas.
fn exp_bracket(m: u64, bits: u64) -> Bracket {
    let (lo, hi) = e_interval(bits);
    let mut base = Bracket { lo, hi, exp: -(bits as i64) };
    let mut acc = Bracket { lo: BigUint::one(), hi: BigUint::one(), exp: 0 };
    let mut e = m;
    loop {
        if e & 1 == 1 {
            acc = acc.mul(&base, bits);
        }
        e >>= 1;
        if e == 0 {
            return acc;
        }
        base = base.mul(&base, bits);
    }
}

/// Compares `eᵐ` with `x`. Never returns `Equal` for `m ≥ 1` since `eᵐ` is irrational.
fn cmp_exp(m: u64, x: &BigUint) -> Ordering {
    if m == 0 {
        return BigUint::one().cmp(x);
    }
    // Relative precision only needs to separate eᵐ from x, which rarely takes
    // more than a few words; widen until the bracket decides.
    let mut bits = 128;
    loop {
        if let Some(order) = exp_bracket(m, bits).cmp(x) {
            return order;
        }
        bits *= 2;
    }
}

/// `⌈ln x⌉` for `x ≥ 1`; `0` for `x = 0` by convention.
pub fn ceil_ln(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        return 0;
    }
    // A float estimate from the leading 64 bits is off by far less than 1;
    // exact comparisons then settle the integer on either side.
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift).iter_u64_digits().next().unwrap_or(0) as f64;
    let estimate = top.ln() + shift as f64 * std::f64::consts::LN_2;
    let mut m = (estimate.ceil() as u64).saturating_sub(1);
    while m > 0 && cmp_exp(m, x) != Ordering::Less {
        m -= 1;
    }
    while cmp_exp(m, x) == Ordering::Less {
        m += 1;
    }
    m
}

/// `⌈a / b⌉` for `b > 0`.
pub fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_bigint::BigInt;

    // Independent oracle: eⁿ bracketed by a Taylor polynomial in exact
    // rationals, with the Lagrange remainder bound eⁿ·nᴺ⁺¹/(N+1)! < 3ⁿ·nᴺ⁺¹/(N+1)!.
    fn oracle_ceil_scaled_exp(c: u64, n: u64) -> BigUint {
        let nn = BigRational::from_integer(BigInt::from(n));
        let mut term = BigRational::one();
        let mut sum = BigRational::one();
        let mut j = 1u64;
        loop {
            term = term * &nn / BigRational::from_integer(BigInt::from(j));
            sum += &term;
            j += 1;
            let rem = &term * &nn / BigRational::from_integer(BigInt::from(j)) * BigRational::from_integer(BigInt::from(3u32).pow(n as u32));
            let cc = BigRational::from_integer(BigInt::from(c));
            let lo = (&sum * &cc).ceil();
            let hi = ((&sum + &rem) * &cc).ceil();
            if j > n && lo == hi {
                return lo.to_integer().to_biguint().unwrap();
            }
        }
    }

    #[test]
    fn scaled_exp_matches_rational_oracle() {
        for n in 0..30 {
            for c in [1u64, 2, 3, 7] {
                assert_eq!(ceil_scaled_exp(&BigUint::from(c), n), oracle_ceil_scaled_exp(c, n), "c={c} n={n}");
            }
        }
    }

    #[test]
    fn harmonic_divergence_rate_values() {
        // Frozen from a 400-digit mpmath evaluation.
        let two = BigUint::from(2u32);
        let expected = [2u64, 6, 15, 41, 110, 297, 807, 2194, 5962, 16207, 44053, 119749];
        for (n, v) in expected.iter().enumerate() {
            assert_eq!(ceil_scaled_exp(&two, n as u64), BigUint::from(*v));
        }
        assert_eq!(ceil_scaled_exp(&two, 27), BigUint::from(1_064_096_481_204u64));
        assert_eq!(
            ceil_scaled_exp(&two, 99).to_string(),
            "19778060638693893541120061934276074202810166"
        );
    }

    #[test]
    fn ceil_ln_small_values() {
        let cases = [(0u64, 0u64), (1, 0), (2, 1), (3, 2), (6, 2), (7, 2), (8, 3), (20, 3), (21, 4), (48, 4), (55, 5)];
        for (x, want) in cases {
            assert_eq!(ceil_ln(&BigUint::from(x)), want, "x={x}");
        }
    }

    #[test]
    fn ceil_ln_brackets_against_float_away_from_integers() {
        for x in 2u64..50_000 {
            let l = (x as f64).ln();
            if (l - l.round()).abs() < 1e-9 {
                continue;
            }
            assert_eq!(ceil_ln(&BigUint::from(x)), l.ceil() as u64, "x={x}");
        }
    }

    #[test]
    fn ceil_ln_of_huge_values() {
        // Frozen from a 60-digit mpmath evaluation of e·ln 2 and 10⁵·ln 3.
        for (e, want) in [(1u64 << 20, 726_818u64), (1 << 16, 45_427), (99_991, 69_309)] {
            let x = BigUint::one() << e;
            assert_eq!(ceil_ln(&x), want, "2^{e}");
            assert_eq!(ceil_ln(&(x + 1u32)), want, "2^{e} + 1");
        }
        assert_eq!(ceil_ln(&BigUint::from(3u32).pow(100_000)), 109_862);
    }

    #[test]
    fn ceil_ln_of_big_values_is_tight() {
        // ⌊e^m⌋ < e^m < ⌈e^m⌉, so the ceiling of the logarithm jumps between them
        for m in [10u64, 57, 200, 1000] {
            let up = ceil_scaled_exp(&BigUint::one(), m);
            assert_eq!(ceil_ln(&(up.clone() - 1u32)), m);
            assert_eq!(ceil_ln(&up), m + 1);
        }
    }
}
