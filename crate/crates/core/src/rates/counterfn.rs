//! Counterfunctions ℕ → ℕ as closed expression trees over big naturals.
//!
//! Literal grammar (whitespace is ignored):
//!
//! ```text
//! f := const:C | id | affine:A,B | pow:E | max(f,f,...) | comp(f,g)
//!    | table:[v0,v1,...] | mono(f) | ln:A,B | cexp:C
//! ```
//!
//! `comp(f,g)` is `n ↦ f(g(n))`, `ln:A,B` is `⌈ln(A·n + B)⌉` and `cexp:C` is
//! `⌈C·eⁿ⌉`. Two-argument functions (for rates of convergence of products) are
//! written `prod(f,g)`, `sum(f,g)` or `max2(f,g)` and act as `(m, k) ↦ f(m)·g(k)` etc.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::exact::{ceil_ln, ceil_scaled_exp, exp_bits_upper};
use super::value::{Cap, RateValue};

/// Arguments up to this size are monotonized by exhaustive maximum.
pub const MONOTONIZE_EXACT_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Counterfunction {
    Const(BigUint),
    Identity,
    /// `a·n + b`
    Affine(BigUint, BigUint),
    /// `nᵉ`
    Power(u32),
    Max(Vec<Counterfunction>),
    /// `outer ∘ inner`
    Compose(Box<Counterfunction>, Box<Counterfunction>),
    /// Finite list, extended by its last value.
    Table(Vec<BigUint>),
    /// `f^M(n) = max_{i ≤ n} f(i)`
    Monotonize(Box<Counterfunction>),
    /// `⌈ln(a·n + b)⌉`, 0 where the argument is 0.
    CeilLnOfLinear(BigUint, BigUint),
    /// `⌈c·eⁿ⌉`
    CeilScaledExp(BigUint),
}

/// Evaluation as a function on possibly-astronomical naturals.
pub trait NatFunction: Send + Sync {
    fn apply(&self, x: &RateValue, cap: Cap) -> RateValue;
}

impl NatFunction for Counterfunction {
    fn apply(&self, x: &RateValue, cap: Cap) -> RateValue {
        self.eval_capped(x, cap)
    }
}

/// Wraps a closure as a [`NatFunction`].
pub struct FnNat<F>(pub F);

impl<F> NatFunction for FnNat<F>
where
    F: Fn(&RateValue, Cap) -> RateValue + Send + Sync,
{
    fn apply(&self, x: &RateValue, cap: Cap) -> RateValue {
        (self.0)(x, cap)
    }
}

impl Counterfunction {
    pub fn constant(c: u64) -> Self {
        Counterfunction::Const(BigUint::from(c))
    }

    pub fn affine(a: u64, b: u64) -> Self {
        Counterfunction::Affine(BigUint::from(a), BigUint::from(b))
    }

    pub fn table(values: &[u64]) -> Self {
        Counterfunction::Table(values.iter().map(|v| BigUint::from(*v)).collect())
    }

    pub fn compose(outer: Counterfunction, inner: Counterfunction) -> Self {
        Counterfunction::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn max(children: Vec<Counterfunction>) -> Self {
        Counterfunction::Max(children)
    }

    pub fn monotonize(f: Counterfunction) -> Self {
        Counterfunction::Monotonize(Box::new(f))
    }

    /// Total evaluation without a representation cap.
    pub fn eval(&self, n: &BigUint) -> BigUint {
        match self.eval_capped(&RateValue::Finite(n.clone()), Cap::UNBOUNDED) {
            RateValue::Finite(v) => v,
            RateValue::Astronomical { .. } => unreachable!("unbounded cap"),
        }
    }

    pub fn eval_u64(&self, n: u64) -> BigUint {
        self.eval(&BigUint::from(n))
    }

    /// Whether the tree is nondecreasing by construction. Only unwrapped tables break this.
    pub fn is_monotone(&self) -> bool {
        match self {
            Counterfunction::Table(v) => v.windows(2).all(|w| w[0] <= w[1]),
            Counterfunction::Max(cs) => cs.iter().all(Counterfunction::is_monotone),
            Counterfunction::Compose(o, i) => o.is_monotone() && i.is_monotone(),
            _ => true,
        }
    }

    /// `f` itself when already monotone, `mono(f)` otherwise.
    pub fn monotonized(self) -> Self {
        if self.is_monotone() {
            self
        } else {
            Counterfunction::Monotonize(Box::new(self))
        }
    }

    /// Supremum over all of ℕ when the function is bounded and this is easy to see.
    pub fn bounded_sup(&self) -> Option<BigUint> {
        match self {
            Counterfunction::Const(c) => Some(c.clone()),
            Counterfunction::Table(v) => Some(v.iter().max().cloned().unwrap_or_default()),
            Counterfunction::Affine(a, b) if a.is_zero() => Some(b.clone()),
            Counterfunction::Power(0) => Some(BigUint::one()),
            Counterfunction::Max(cs) => cs.iter().map(|c| c.bounded_sup()).collect::<Option<Vec<_>>>().map(|v| v.into_iter().max().unwrap_or_default()),
            Counterfunction::Compose(o, i) => o.bounded_sup().or_else(|| {
                let s = i.bounded_sup()?;
                Some(Counterfunction::Monotonize(o.clone()).eval(&s))
            }),
            Counterfunction::Monotonize(c) => c.bounded_sup(),
            Counterfunction::CeilLnOfLinear(a, b) if a.is_zero() => Some(BigUint::from(ceil_ln(b))),
            Counterfunction::CeilScaledExp(c) if c.is_zero() => Some(BigUint::zero()),
            _ => None,
        }
    }

    /// Evaluation on a possibly astronomical argument; results above `cap` bits become astronomical.
    pub fn eval_capped(&self, x: &RateValue, cap: Cap) -> RateValue {
        let n = match x {
            RateValue::Finite(n) => n,
            RateValue::Astronomical { .. } => return self.eval_at_astronomical(cap),
        };
        match self {
            Counterfunction::Const(c) => cap.check(c.clone()),
            Counterfunction::Identity => cap.check(n.clone()),
            Counterfunction::Affine(a, b) => cap.add(&cap.mul(&a.clone().into(), x), &b.clone().into()),
            Counterfunction::Power(e) => cap.pow(x, *e),
            Counterfunction::Max(cs) => cs.iter().map(|c| c.eval_capped(x, cap)).max().unwrap_or_else(RateValue::zero),
            Counterfunction::Compose(o, i) => o.eval_capped(&i.eval_capped(x, cap), cap),
            Counterfunction::Table(v) => {
                let idx = n.to_usize().unwrap_or(usize::MAX);
                cap.check(v.get(idx).or_else(|| v.last()).cloned().unwrap_or_default())
            }
            Counterfunction::Monotonize(c) => monotonize_at(c, n, cap),
            Counterfunction::CeilLnOfLinear(a, b) => match cap.add(&cap.mul(&a.clone().into(), x), &b.clone().into()) {
                RateValue::Finite(arg) => RateValue::from(ceil_ln(&arg)),
                // ln of a value below 2^cap is below cap
                astro => astro,
            },
            Counterfunction::CeilScaledExp(c) => {
                if c.is_zero() {
                    return RateValue::zero();
                }
                match n.to_u64() {
                    Some(m) if exp_bits_upper(m).saturating_add(c.bits()) <= cap.bits() || cap == Cap::UNBOUNDED => {
                        cap.check(ceil_scaled_exp(c, m))
                    }
                    _ => RateValue::astronomical("", cap),
                }
            }
        }
    }

    fn eval_at_astronomical(&self, cap: Cap) -> RateValue {
        match self {
            Counterfunction::Monotonize(c) if c.is_monotone() => c.eval_at_astronomical(cap),
            Counterfunction::Compose(o, i) => o.eval_capped(&i.eval_at_astronomical(cap), cap),
            Counterfunction::Max(cs) => cs.iter().map(|c| c.eval_at_astronomical(cap)).max().unwrap_or_else(RateValue::zero),
            Counterfunction::Table(v) => cap.check(v.last().cloned().unwrap_or_default()),
            other => match other.bounded_sup() {
                Some(s) => cap.check(s),
                None => RateValue::astronomical("", cap),
            },
        }
    }

    /// Monotone upper envelope: tables replaced by their running maximum.
    fn envelope(&self) -> Counterfunction {
        match self {
            Counterfunction::Table(_) => Counterfunction::Monotonize(Box::new(self.clone())),
            Counterfunction::Max(cs) => Counterfunction::Max(cs.iter().map(Counterfunction::envelope).collect()),
            Counterfunction::Compose(o, i) => Counterfunction::compose(o.envelope(), i.envelope()),
            other => other.clone(),
        }
    }
}

fn monotonize_at(child: &Counterfunction, n: &BigUint, cap: Cap) -> RateValue {
    if child.is_monotone() {
        return child.eval_capped(&RateValue::Finite(n.clone()), cap);
    }
    if let Counterfunction::Table(v) = child {
        let upto = n.to_usize().unwrap_or(usize::MAX).min(v.len().saturating_sub(1));
        return cap.check(v.iter().take(upto + 1).max().cloned().unwrap_or_default());
    }
    match n.to_u64() {
        Some(m) if m <= MONOTONIZE_EXACT_LIMIT => (0..=m)
            .map(|i| child.eval_capped(&RateValue::from(i), cap))
            .max()
            .unwrap_or_else(RateValue::zero),
        // Beyond the exhaustive range the (monotone, dominating) envelope is used.
        _ => child.envelope().eval_capped(&RateValue::Finite(n.clone()), cap),
    }
}

impl fmt::Display for Counterfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, items: &[Counterfunction]| -> fmt::Result {
            for (i, c) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            Ok(())
        };
        match self {
            Counterfunction::Const(c) => write!(f, "const:{c}"),
            Counterfunction::Identity => write!(f, "id"),
            Counterfunction::Affine(a, b) => write!(f, "affine:{a},{b}"),
            Counterfunction::Power(e) => write!(f, "pow:{e}"),
            Counterfunction::Max(cs) => {
                write!(f, "max(")?;
                list(f, cs)?;
                write!(f, ")")
            }
            Counterfunction::Compose(o, i) => write!(f, "comp({o},{i})"),
            Counterfunction::Table(v) => {
                write!(f, "table:[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Counterfunction::Monotonize(c) => write!(f, "mono({c})"),
            Counterfunction::CeilLnOfLinear(a, b) => write!(f, "ln:{a},{b}"),
            Counterfunction::CeilScaledExp(c) => write!(f, "cexp:{c}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse counterfunction `{input}` at offset {offset}: {message}")]
pub struct ParseError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    bytes: Vec<u8>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let bytes = src.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        Self { src, bytes, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { input: self.src.to_string(), offset: self.pos, message: message.into() })
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.bytes[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn natural(&mut self) -> Result<BigUint, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a natural number");
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Ok(digits.parse().expect("ascii digits"))
    }

    fn args(&mut self) -> Result<Vec<Counterfunction>, ParseError> {
        self.expect("(")?;
        let mut out = vec![self.expr()?];
        while self.eat(",") {
            out.push(self.expr()?);
        }
        self.expect(")")?;
        Ok(out)
    }

    fn pair(&mut self) -> Result<(Counterfunction, Counterfunction), ParseError> {
        let mut args = self.args()?;
        if args.len() != 2 {
            return self.err(format!("expected 2 arguments, found {}", args.len()));
        }
        let g = args.pop().unwrap();
        Ok((args.pop().unwrap(), g))
    }

    fn expr(&mut self) -> Result<Counterfunction, ParseError> {
        if self.eat("const:") {
            Ok(Counterfunction::Const(self.natural()?))
        } else if self.eat("affine:") {
            let a = self.natural()?;
            self.expect(",")?;
            Ok(Counterfunction::Affine(a, self.natural()?))
        } else if self.eat("pow:") {
            let e = self.natural()?;
            match e.to_u32() {
                Some(e) if e >= 1 => Ok(Counterfunction::Power(e)),
                _ => self.err("exponent must be in 1..2^32"),
            }
        } else if self.eat("max") {
            Ok(Counterfunction::Max(self.args()?))
        } else if self.eat("comp") {
            let (o, i) = self.pair()?;
            Ok(Counterfunction::compose(o, i))
        } else if self.eat("table:") {
            self.expect("[")?;
            let mut v = vec![self.natural()?];
            while self.eat(",") {
                v.push(self.natural()?);
            }
            self.expect("]")?;
            Ok(Counterfunction::Table(v))
        } else if self.eat("mono") {
            let mut args = self.args()?;
            if args.len() != 1 {
                return self.err("mono takes one argument");
            }
            Ok(Counterfunction::monotonize(args.pop().unwrap()))
        } else if self.eat("ln:") {
            let a = self.natural()?;
            self.expect(",")?;
            Ok(Counterfunction::CeilLnOfLinear(a, self.natural()?))
        } else if self.eat("cexp:") {
            Ok(Counterfunction::CeilScaledExp(self.natural()?))
        } else if self.eat("id") {
            Ok(Counterfunction::Identity)
        } else {
            self.err("unknown counterfunction")
        }
    }

    fn finish<T>(&self, value: T) -> Result<T, ParseError> {
        if self.pos == self.bytes.len() {
            Ok(value)
        } else {
            self.err("trailing input")
        }
    }
}

impl FromStr for Counterfunction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let f = p.expr()?;
        p.finish(f)
    }
}

impl Serialize for Counterfunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Counterfunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Monotone functions ℕ × ℕ → ℕ built from two counterfunctions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BiCounterfunction {
    /// `(m, k) ↦ f(m)·g(k)`
    Product(Counterfunction, Counterfunction),
    /// `(m, k) ↦ f(m) + g(k)`
    Sum(Counterfunction, Counterfunction),
    /// `(m, k) ↦ max{f(m), g(k)}`
    Max(Counterfunction, Counterfunction),
}

impl BiCounterfunction {
    pub fn eval_capped(&self, m: &RateValue, k: &RateValue, cap: Cap) -> RateValue {
        match self {
            BiCounterfunction::Product(f, g) => cap.mul(&f.eval_capped(m, cap), &g.eval_capped(k, cap)),
            BiCounterfunction::Sum(f, g) => cap.add(&f.eval_capped(m, cap), &g.eval_capped(k, cap)),
            BiCounterfunction::Max(f, g) => RateValue::max_of(f.eval_capped(m, cap), g.eval_capped(k, cap)),
        }
    }

    pub fn eval(&self, m: u64, k: u64) -> BigUint {
        match self.eval_capped(&m.into(), &k.into(), Cap::UNBOUNDED) {
            RateValue::Finite(v) => v,
            RateValue::Astronomical { .. } => unreachable!("unbounded cap"),
        }
    }

    pub fn monotonized(self) -> Self {
        match self {
            BiCounterfunction::Product(f, g) => BiCounterfunction::Product(f.monotonized(), g.monotonized()),
            BiCounterfunction::Sum(f, g) => BiCounterfunction::Sum(f.monotonized(), g.monotonized()),
            BiCounterfunction::Max(f, g) => BiCounterfunction::Max(f.monotonized(), g.monotonized()),
        }
    }
}

impl fmt::Display for BiCounterfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiCounterfunction::Product(a, b) => write!(f, "prod({a},{b})"),
            BiCounterfunction::Sum(a, b) => write!(f, "sum({a},{b})"),
            BiCounterfunction::Max(a, b) => write!(f, "max2({a},{b})"),
        }
    }
}

impl FromStr for BiCounterfunction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let ctor: fn(Counterfunction, Counterfunction) -> BiCounterfunction = if p.eat("prod") {
            BiCounterfunction::Product
        } else if p.eat("sum") {
            BiCounterfunction::Sum
        } else if p.eat("max2") {
            BiCounterfunction::Max
        } else {
            return p.err("expected prod(..), sum(..) or max2(..)");
        };
        let (f, g) = p.pair()?;
        p.finish(ctor(f, g))
    }
}

impl Serialize for BiCounterfunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BiCounterfunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
