//! Synthetic instances of the Xu-type recursive inequality
//! `s_{n+1} ≤ (1 − a_n)(s_n + v_n) + a_n r_n`.

use num_bigint::BigUint;

use super::{CheckResult, HypothesisStatus, VerifyError};
use crate::geometry::Sampler;
use crate::rates::{zeta, zeta_star, BiCounterfunction, Cap, Counterfunction, RateValue};

#[derive(Debug, Clone, PartialEq)]
pub struct XuInstance {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
    /// Natural upper bound `S` on `(s_n)`.
    pub bound: u64,
}

/// Which quantitative form of the divergence hypothesis is used.
#[derive(Debug, Clone, Copy)]
pub enum XuVariant<'a> {
    /// `Σ a_n` diverges with rate σ; conclusion from `ζ(k, n)`.
    Divergence(&'a Counterfunction),
    /// `σ*(m, ·)` is a rate for `Π_{n ≥ m}(1 − a_n) → 0`; conclusion from `ζ*(k, n)`.
    Product(&'a BiCounterfunction),
}

impl XuInstance {
    /// Instance given by explicit sequences; the recurrence and the bounds are
    /// checked at every index (additive tolerance `tol`).
    pub fn new(s: Vec<f64>, a: Vec<f64>, v: Vec<f64>, r: Vec<f64>, bound: u64, tol: f64) -> Result<Self, VerifyError> {
        let len = s.len();
        if len < 2 || a.len() < len || v.len() < len || r.len() < len {
            return Err(VerifyError::InvalidInput("a, v and r must cover every index of s".into()));
        }
        for n in 0..len {
            if !(s[n] >= 0.0 && s[n] <= bound as f64 + tol) {
                return Err(VerifyError::InvalidInput(format!("s_{n} = {} outside [0, {bound}]", s[n])));
            }
            if !(a[n] > 0.0 && a[n] < 1.0) {
                return Err(VerifyError::InvalidInput(format!("a_{n} = {} outside (0, 1)", a[n])));
            }
            if n + 1 < len {
                let rhs = (1.0 - a[n]) * (s[n] + v[n]) + a[n] * r[n];
                if s[n + 1] > rhs + tol {
                    return Err(VerifyError::InvalidInput(format!("recurrence fails at n = {n}: {} > {rhs}", s[n + 1])));
                }
            }
        }
        Ok(Self { s, a, v, r, bound })
    }

    /// Generates `s` by running the recurrence with equality (clamped at 0)
    /// from `s₀` for `len` terms.
    pub fn from_recurrence(
        s0: f64,
        len: usize,
        bound: u64,
        a: impl Fn(u64) -> f64,
        v: impl Fn(u64) -> f64,
        r: impl Fn(u64) -> f64,
    ) -> Result<Self, VerifyError> {
        let idx = |f: &dyn Fn(u64) -> f64| (0..len as u64).map(f).collect::<Vec<f64>>();
        let (a, v, r) = (idx(&a), idx(&v), idx(&r));
        let mut s = vec![s0];
        for n in 0..len - 1 {
            let next = (1.0 - a[n]) * (s[n] + v[n]) + a[n] * r[n];
            s.push(next.max(0.0));
        }
        Self::new(s, a, v, r, bound, 0.0)
    }

    /// Random instance of length `q + 1` satisfying the hypotheses for `k` on
    /// `[0, q]`: `a_n ∈ [1/(n+2), 0.95]` (so the harmonic moduli
    /// `σ*(m, j) = (m+1)(j+1)` and `σ(m) = ⌈2eᵐ⌉` stay valid),
    /// `0 ≤ v_n ≤ 1/(3(k+1)(q+1))`, `0 ≤ r_n ≤ 1/(3(k+1))`, and `s_{n+1}` a
    /// random fraction of the right-hand side, clamped to `[0, S]`.
    pub fn random(rng: &mut Sampler, k: u64, q: u64, bound: u64) -> Result<Self, VerifyError> {
        if bound == 0 {
            return Err(VerifyError::InvalidInput("the bound S must be at least 1".into()));
        }
        let len = q as usize + 1;
        let v_max = 1.0 / (3.0 * (k + 1) as f64 * (q + 1) as f64);
        let r_max = 1.0 / (3.0 * (k + 1) as f64);
        let (mut a, mut v, mut r) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
        for n in 0..len {
            let lo = 1.0 / (n as f64 + 2.0);
            // the slowest admissible decay half of the time
            a.push(if rng.chance(0.5) { lo } else { rng.uniform(lo, 0.95) });
            v.push(rng.uniform(0.0, v_max));
            r.push(rng.uniform(0.0, r_max));
        }
        let mut s = vec![rng.uniform(0.0, bound as f64)];
        for n in 0..len - 1 {
            let rhs = (1.0 - a[n]) * (s[n] + v[n]) + a[n] * r[n];
            let factor = if rng.chance(0.7) { 1.0 } else { rng.unit() };
            s.push((rhs * factor).min(bound as f64));
        }
        Self::new(s, a, v, r, bound, 0.0)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Checks the hypotheses `v_i ≤ 1/(3(k+1)(q+1))`, `r_i ≤ 1/(3(k+1))` on
/// `[n, q]` and, when they hold, the conclusion `s_i ≤ 1/(k+1)` on `[ζ(k, n), q]`.
pub fn check_xu_lemma(instance: &XuInstance, variant: XuVariant<'_>, k: u64, n: u64, q: u64, tol: f64) -> Result<CheckResult, VerifyError> {
    let end = instance.len() as u64 - 1;
    if q > end || n > q {
        return Err(VerifyError::InsufficientData { needed: q.max(n), available: end });
    }
    let id = match variant {
        XuVariant::Divergence(_) => "xu_lemma_divergence",
        XuVariant::Product(_) => "xu_lemma_product",
    };
    let v_bound = 1.0 / (3.0 * (k + 1) as f64 * (q + 1) as f64);
    let r_bound = 1.0 / (3.0 * (k + 1) as f64);
    if let Some(i) = (n..=q).find(|i| instance.v[*i as usize] > v_bound + tol) {
        return Ok(CheckResult::unmet(id, format!("hypotheses unmet: v_{i} > 1/(3(k+1)(q+1))")).witness("i", i));
    }
    if let Some(i) = (n..=q).find(|i| instance.r[*i as usize] > r_bound + tol) {
        return Ok(CheckResult::unmet(id, format!("hypotheses unmet: r_{i} > 1/(3(k+1))")).witness("i", i));
    }
    let (kk, nn) = (RateValue::from(k), RateValue::from(n));
    let start = match variant {
        XuVariant::Divergence(sigma) => zeta(&kk, &nn, sigma, instance.bound, Cap::default()),
        XuVariant::Product(sigma_star) => zeta_star(&kk, &nn, sigma_star, instance.bound, Cap::default()),
    };
    let mut result = CheckResult::new(id, HypothesisStatus::Met)
        .witness("k", k)
        .witness("zeta", start.to_string())
        .horizon("n", n)
        .horizon("q", q);
    let Some(from) = start.finite().filter(|z| **z <= BigUint::from(q)).and_then(|_| start.to_u64()) else {
        return Ok(result.note("ζ exceeds q: conclusion is vacuous"));
    };
    let bound = 1.0 / (k + 1) as f64;
    if let Some(i) = (from..=q).find(|i| instance.s[*i as usize] > bound + tol) {
        result = result.witness("violation_i", i).witness("s_i", instance.s[i as usize]).fail();
    }
    Ok(result)
}
