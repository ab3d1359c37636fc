//! Parameter sequences `(λ_n)`, `(β_n)`, `(γ_n)` bundled with the quantitative
//! moduli the rate formulas consume, plus an auditor that tests every modulus
//! on a finite prefix.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rates::{BiCounterfunction, Cap, Counterfunction, RateValue};
use crate::scalar::Scalar;

/// Horizon up to which β products are audited in exact rational arithmetic.
pub const EXACT_PRODUCT_HORIZON: u64 = 10_000;
/// Range of `m` and `k` over which the product-rate modulus σ* is audited.
pub const PRODUCT_AUDIT_GRID: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("unknown schedule preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid sequence `{0}`")]
    InvalidSequence(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
}

/// A real sequence given in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    /// `(a·n + b) / (c·n + d)` with `c ≥ 0`, `d > 0`.
    Ratio { a: i64, b: i64, c: i64, d: i64 },
    /// A constant that is not known to be rational; audited in floating point.
    Real(f64),
}

impl Sequence {
    pub fn ratio(a: i64, b: i64, c: i64, d: i64) -> Result<Self, ScheduleError> {
        if c < 0 || d <= 0 {
            return Err(ScheduleError::InvalidSequence(format!("ratio:{a},{b},{c},{d} has a vanishing or negative denominator")));
        }
        Ok(Sequence::Ratio { a, b, c, d })
    }

    pub fn constant(p: i64, q: i64) -> Result<Self, ScheduleError> {
        Self::ratio(0, p, 0, q)
    }

    /// Exact value, when the sequence is rational.
    pub fn exact(&self, n: u64) -> Option<BigRational> {
        match *self {
            Sequence::Ratio { a, b, c, d } => {
                let n = BigInt::from(n);
                let num = BigInt::from(a) * &n + BigInt::from(b);
                let den = BigInt::from(c) * &n + BigInt::from(d);
                Some(BigRational::new(num, den))
            }
            Sequence::Real(_) => None,
        }
    }

    pub fn value<T: Scalar>(&self, n: u64) -> T {
        match *self {
            Sequence::Ratio { a, b, c, d } => {
                let n = n as f64;
                T::lit((a as f64 * n + b as f64) / (c as f64 * n + d as f64))
            }
            Sequence::Real(v) => T::lit(v),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Sequence::Ratio { .. })
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Ratio { a, b, c, d } => write!(f, "ratio:{a},{b},{c},{d}"),
            Sequence::Real(v) => write!(f, "real:{v:?}"),
        }
    }
}

impl FromStr for Sequence {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScheduleError::InvalidSequence(s.to_string());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("ratio:") {
            let parts: Vec<i64> = rest.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            match parts[..] {
                [a, b, c, d] => Sequence::ratio(a, b, c, d),
                _ => Err(bad()),
            }
        } else if let Some(rest) = s.strip_prefix("real:") {
            let v: f64 = rest.trim().parse().map_err(|_| bad())?;
            if v.is_finite() {
                Ok(Sequence::Real(v))
            } else {
                Err(bad())
            }
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Raw inputs of a [`ScheduleBundle`], before monotonization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub name: String,
    pub lambda: Sequence,
    pub beta: Sequence,
    pub gamma: Sequence,
    /// Rate of divergence of `Σ(1 − β_n)`.
    pub sigma: Counterfunction,
    /// `σ*(m, ·)` is a rate of convergence of `Π_{n ≥ m} β_n` to 0.
    pub sigma_star: BiCounterfunction,
    pub chi_beta: Counterfunction,
    pub chi_lambda: Counterfunction,
    pub chi_gamma: Counterfunction,
    /// Rate of convergence of `β_n → 1`.
    pub eta: Counterfunction,
    /// `Λ`: `λ_n ≥ 1/Λ` for `n ≥ N_Λ`.
    pub lambda_bound: u64,
    pub n_lambda: u64,
    /// `Γ`: `γ_n ≥ 1/Γ` for `n ≥ N_Γ`.
    pub gamma_bound: u64,
    pub n_gamma: u64,
    /// `G ≥ γ_n` for all `n`.
    pub g_bound: u64,
    /// `β_n ≥ 1/B(n)`.
    pub b: Counterfunction,
}

/// Parameter sequences together with all their moduli. Every counterfunction
/// is monotone (wrapped in `mono(..)` at construction when it was not).
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleBundle {
    spec: BundleSpec,
    b_monotonized: bool,
}

impl ScheduleBundle {
    pub fn new(spec: BundleSpec) -> Result<Self, ScheduleError> {
        if spec.lambda_bound == 0 || spec.gamma_bound == 0 {
            return Err(ScheduleError::InvalidModulus("Λ and Γ must be positive".into()));
        }
        let b_monotonized = !spec.b.is_monotone();
        let spec = BundleSpec {
            sigma: spec.sigma.monotonized(),
            sigma_star: spec.sigma_star.monotonized(),
            chi_beta: spec.chi_beta.monotonized(),
            chi_lambda: spec.chi_lambda.monotonized(),
            chi_gamma: spec.chi_gamma.monotonized(),
            eta: spec.eta.monotonized(),
            b: spec.b.monotonized(),
            ..spec
        };
        Ok(Self { spec, b_monotonized })
    }

    pub fn spec(&self) -> &BundleSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn lambda<T: Scalar>(&self, n: u64) -> T {
        self.spec.lambda.value(n)
    }

    pub fn beta<T: Scalar>(&self, n: u64) -> T {
        self.spec.beta.value(n)
    }

    pub fn gamma<T: Scalar>(&self, n: u64) -> T {
        self.spec.gamma.value(n)
    }

    pub fn gamma_sequence(&self) -> &Sequence {
        &self.spec.gamma
    }

    pub fn sigma(&self) -> &Counterfunction {
        &self.spec.sigma
    }

    pub fn sigma_star(&self) -> &BiCounterfunction {
        &self.spec.sigma_star
    }

    pub fn chi_beta(&self) -> &Counterfunction {
        &self.spec.chi_beta
    }

    pub fn chi_lambda(&self) -> &Counterfunction {
        &self.spec.chi_lambda
    }

    pub fn chi_gamma(&self) -> &Counterfunction {
        &self.spec.chi_gamma
    }

    pub fn eta(&self) -> &Counterfunction {
        &self.spec.eta
    }

    pub fn b(&self) -> &Counterfunction {
        &self.spec.b
    }

    pub fn lambda_bound(&self) -> u64 {
        self.spec.lambda_bound
    }

    pub fn n_lambda(&self) -> u64 {
        self.spec.n_lambda
    }

    pub fn gamma_bound(&self) -> u64 {
        self.spec.gamma_bound
    }

    pub fn n_gamma(&self) -> u64 {
        self.spec.n_gamma
    }

    pub fn g_bound(&self) -> u64 {
        self.spec.g_bound
    }

    /// Whether `B` had to be wrapped in `mono(..)`.
    pub fn b_monotonized(&self) -> bool {
        self.b_monotonized
    }

    /// Same bundle with one modulus replaced; used to build deliberately wrong bundles.
    pub fn with_spec(&self, edit: impl FnOnce(&mut BundleSpec)) -> Result<Self, ScheduleError> {
        let mut spec = self.spec.clone();
        edit(&mut spec);
        Self::new(spec)
    }
}

fn cf(s: &str) -> Counterfunction {
    s.parse().expect("preset literal")
}

/// `β_n = (n+1)/(n+2)`, `λ_n = 1/2` and `γ_n = 1 + 1/(n+1)` with their moduli.
fn harmonic() -> BundleSpec {
    BundleSpec {
        name: "harmonic".into(),
        lambda: Sequence::Ratio { a: 0, b: 1, c: 0, d: 2 },
        beta: Sequence::Ratio { a: 1, b: 1, c: 1, d: 2 },
        gamma: Sequence::Ratio { a: 1, b: 2, c: 1, d: 1 },
        // Σ_{i ≤ m} 1/(i+2) ≥ ln((m+3)/2)
        sigma: cf("cexp:2"),
        // Π_{n=m}^{N} (n+1)/(n+2) = (m+1)/(N+2)
        sigma_star: "prod(affine:1,1,affine:1,1)".parse().expect("preset literal"),
        chi_beta: Counterfunction::Identity,
        chi_lambda: Counterfunction::constant(0),
        chi_gamma: Counterfunction::Identity,
        eta: Counterfunction::Identity,
        lambda_bound: 2,
        n_lambda: 0,
        gamma_bound: 1,
        n_gamma: 0,
        g_bound: 2,
        b: Counterfunction::constant(2),
    }
}

/// Harmonic β and λ with constant `γ_n = 1`.
fn constant_gamma_harmonic_beta() -> BundleSpec {
    BundleSpec {
        name: "constant-gamma-harmonic-beta".into(),
        gamma: Sequence::Ratio { a: 0, b: 1, c: 0, d: 1 },
        chi_gamma: Counterfunction::constant(0),
        g_bound: 1,
        ..harmonic()
    }
}

pub const PRESET_NAMES: [&str; 2] = ["harmonic", "constant-gamma-harmonic-beta"];

pub fn preset(name: &str) -> Result<ScheduleBundle, ScheduleError> {
    let spec = match name {
        "harmonic" => harmonic(),
        "constant-gamma-harmonic-beta" => constant_gamma_harmonic_beta(),
        other => return Err(ScheduleError::UnknownPreset(other.to_string())),
    };
    ScheduleBundle::new(spec)
}

/// Cauchy modulus of `Σ d(T_{n+1} u_n, T_n u_n)` for families satisfying
/// Condition (C1): `max{N_Γ, χ_γ(2KΓ(k+1) − 1)}`.
pub fn chi_t(bundle: &ScheduleBundle, k_bound: &BigUint, k: &RateValue, cap: Cap) -> RateValue {
    let factor = RateValue::Finite(BigUint::from(2u32) * k_bound * bundle.gamma_bound());
    let arg = cap.scaled_pred(&factor, k);
    RateValue::max_of(RateValue::from(bundle.n_gamma()), bundle.chi_gamma().eval_capped(&arg, cap))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition_id: String,
    pub horizon: u64,
    pub pass: bool,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub bundle: String,
    pub horizon: u64,
    pub pass: bool,
    pub conditions: Vec<ConditionResult>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn condition(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition_id == id)
    }
}

struct Condition {
    id: &'static str,
    horizon: u64,
    violation: Option<Violation>,
}

impl Condition {
    fn new(id: &'static str, horizon: u64) -> Self {
        Self { id, horizon, violation: None }
    }

    fn fail(&mut self, n: u64, k: Option<u64>, m: Option<u64>, detail: String) {
        if self.violation.is_none() {
            self.violation = Some(Violation { n, k, m, detail });
        }
    }

    fn failed(&self) -> bool {
        self.violation.is_some()
    }

    fn finish(self) -> ConditionResult {
        ConditionResult {
            condition_id: self.id.to_string(),
            horizon: self.horizon,
            pass: self.violation.is_none(),
            first_violation: self.violation,
        }
    }
}

fn eval_u64(f: &Counterfunction, n: u64) -> Option<u64> {
    f.eval_capped(&RateValue::from(n), Cap(64)).to_u64()
}

fn rational(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `x ≤ y`, exactly when both sides are rational, else with additive `tol`.
fn leq(x: (&Option<BigRational>, f64), y: (&Option<BigRational>, f64), tol: f64) -> bool {
    match (x.0, y.0) {
        (Some(a), Some(b)) => a <= b,
        _ => x.1 <= y.1 + tol,
    }
}

struct Tabulated {
    exact: Vec<Option<BigRational>>,
    float: Vec<f64>,
}

impl Tabulated {
    fn new(seq: &Sequence, horizon: u64) -> Self {
        Self {
            exact: (0..=horizon).map(|n| seq.exact(n)).collect(),
            float: (0..=horizon).map(|n| seq.value::<f64>(n)).collect(),
        }
    }

    fn at(&self, n: u64) -> (&Option<BigRational>, f64) {
        (&self.exact[n as usize], self.float[n as usize])
    }

    /// `Σ_{i ≥ n} |a_i − a_{i+1}|` over the tabulated prefix, summed from the end.
    fn variation_tails(&self) -> Vec<f64> {
        let len = self.float.len();
        let mut tails = vec![0.0; len];
        for i in (0..len - 1).rev() {
            tails[i] = tails[i + 1] + (self.float[i] - self.float[i + 1]).abs();
        }
        tails
    }
}

/// Checks every modulus of `bundle` on the index range `[0, horizon]`.
pub fn audit_schedule(bundle: &ScheduleBundle, horizon: u64, tol: f64) -> AuditReport {
    let horizon = horizon.max(1);
    let s = &bundle.spec;
    let lambda = Tabulated::new(&s.lambda, horizon);
    let beta = Tabulated::new(&s.beta, horizon);
    let gamma = Tabulated::new(&s.gamma, horizon);
    let mut conditions = Vec::new();
    let zero = Some(BigRational::zero());
    let one = Some(BigRational::one());

    let mut ranges = Condition::new("ranges", horizon);
    for n in 0..=horizon {
        let (l, b, g) = (lambda.at(n), beta.at(n), gamma.at(n));
        let in_unit = |x: (&Option<BigRational>, f64)| leq((&zero, 0.0), x, tol) && leq(x, (&one, 1.0), tol);
        if !in_unit(l) || !in_unit(b) {
            ranges.fail(n, None, None, format!("λ_n = {}, β_n = {} must lie in [0, 1]", l.1, b.1));
        }
        let positive = match g.0 {
            Some(q) => q.is_positive(),
            None => g.1 > 0.0,
        };
        if !positive {
            ranges.fail(n, None, None, format!("γ_n = {} must be positive", g.1));
        }
    }
    conditions.push(ranges.finish());

    // (C1_q): Σ_{i ≤ σ(n)} (1 − β_i) ≥ n
    let mut c1 = Condition::new("C1_q", horizon);
    let mut prefix = Vec::with_capacity(horizon as usize + 1);
    let (mut acc, mut comp) = (0.0f64, 0.0f64);
    for n in 0..=horizon {
        // Kahan summation
        let y = (1.0 - beta.float[n as usize]) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        prefix.push(acc);
    }
    for n in 0..=horizon {
        let Some(idx) = eval_u64(&s.sigma, n).filter(|i| *i <= horizon) else { break };
        if prefix[idx as usize] < n as f64 - tol {
            c1.fail(n, None, None, format!("Σ_(i≤{idx}) (1−β_i) = {} < {n}", prefix[idx as usize]));
            break;
        }
    }
    conditions.push(c1.finish());

    conditions.push(audit_products(&s.sigma_star, &s.beta, &beta, horizon, tol));

    for (id, chi, seq) in [("C2_q", &s.chi_beta, &beta), ("C3_q", &s.chi_lambda, &lambda), ("C7_q", &s.chi_gamma, &gamma)] {
        let tails = seq.variation_tails();
        let mut cond = Condition::new(id, horizon);
        for k in 0..=horizon {
            let Some(start) = eval_u64(chi, k).filter(|i| *i <= horizon) else { break };
            let bound = 1.0 / (k + 1) as f64;
            if tails[start as usize] > bound + tol {
                cond.fail(start, Some(k), None, format!("variation from n = {start} is {} > 1/{}", tails[start as usize], k + 1));
                break;
            }
        }
        conditions.push(cond.finish());
    }

    // (C4_q): 1 − β_n ≤ 1/(k+1) for n ≥ η(k)
    let mut c4 = Condition::new("C4_q", horizon);
    let gaps: Vec<(Option<BigRational>, f64)> =
        (0..=horizon).map(|n| (beta.exact[n as usize].as_ref().map(|b| BigRational::one() - b), 1.0 - beta.float[n as usize])).collect();
    let mut suffix_max = vec![0usize; gaps.len()];
    let last = gaps.len() - 1;
    suffix_max[last] = last;
    for i in (0..last).rev() {
        let j = suffix_max[i + 1];
        suffix_max[i] = if leq((&gaps[j].0, gaps[j].1), (&gaps[i].0, gaps[i].1), 0.0) { i } else { j };
    }
    'eta: for k in 0..=horizon {
        let Some(start) = eval_u64(&s.eta, k).filter(|i| *i <= horizon) else { break };
        let bound = (Some(rational(1, k + 1)), 1.0 / (k + 1) as f64);
        let worst = suffix_max[start as usize];
        if !leq((&gaps[worst].0, gaps[worst].1), (&bound.0, bound.1), tol) {
            for n in start..=horizon {
                let g = &gaps[n as usize];
                if !leq((&g.0, g.1), (&bound.0, bound.1), tol) {
                    c4.fail(n, Some(k), None, format!("1 − β_{n} = {} > 1/{}", g.1, k + 1));
                    break 'eta;
                }
            }
        }
    }
    conditions.push(c4.finish());

    let mut c5 = Condition::new("C5_q", horizon);
    let lower = (Some(rational(1, s.lambda_bound)), 1.0 / s.lambda_bound as f64);
    for n in s.n_lambda..=horizon {
        if !leq((&lower.0, lower.1), lambda.at(n), tol) {
            c5.fail(n, None, None, format!("λ_{n} = {} < 1/{}", lambda.float[n as usize], s.lambda_bound));
            break;
        }
    }
    conditions.push(c5.finish());

    let mut c8 = Condition::new("C8_q", horizon);
    let lower = (Some(rational(1, s.gamma_bound)), 1.0 / s.gamma_bound as f64);
    for n in s.n_gamma..=horizon {
        if !leq((&lower.0, lower.1), gamma.at(n), tol) {
            c8.fail(n, None, None, format!("γ_{n} = {} < 1/{}", gamma.float[n as usize], s.gamma_bound));
            break;
        }
    }
    conditions.push(c8.finish());

    let mut g_cond = Condition::new("G_bound", horizon);
    let upper = (Some(rational(s.g_bound, 1)), s.g_bound as f64);
    for n in 0..=horizon {
        if !leq(gamma.at(n), (&upper.0, upper.1), tol) {
            g_cond.fail(n, None, None, format!("γ_{n} = {} > G = {}", gamma.float[n as usize], s.g_bound));
            break;
        }
    }
    conditions.push(g_cond.finish());

    // (C9_q): β_n ≥ 1/B(n)
    let mut c9 = Condition::new("C9_q", horizon);
    for n in 0..=horizon {
        let bn = s.b.eval_u64(n);
        let ok = !bn.is_zero() && {
            let inv = (Some(BigRational::new(BigInt::one(), BigInt::from(bn.clone()))), 1.0 / bn.to_f64().unwrap_or(f64::INFINITY));
            leq((&inv.0, inv.1), beta.at(n), tol)
        };
        if !ok {
            c9.fail(n, None, None, format!("β_{n} = {} < 1/B({n}) = 1/{bn}", beta.float[n as usize]));
            break;
        }
    }
    conditions.push(c9.finish());

    let mut notes = vec![format!(
        "β products audited exactly up to n = {}",
        if s.beta.is_exact() { EXACT_PRODUCT_HORIZON.min(horizon) } else { 0 }
    )];
    if bundle.b_monotonized {
        notes.push("B was not monotone and has been replaced by its running maximum".into());
    }
    let pass = conditions.iter().all(|c| c.pass);
    AuditReport { bundle: s.name.clone(), horizon, pass, conditions, notes }
}

// (C1_q*): Π_{n=m}^{N} β_n ≤ 1/(k+1) at N = max(σ*(m, k), m), for m, k on a grid.
fn audit_products(sigma_star: &BiCounterfunction, seq: &Sequence, beta: &Tabulated, horizon: u64, tol: f64) -> ConditionResult {
    let mut cond = Condition::new("C1_q*", horizon);
    for m in 0..=PRODUCT_AUDIT_GRID.min(horizon) {
        let mut targets: Vec<(u64, u64)> = (0..=PRODUCT_AUDIT_GRID)
            .filter_map(|k| {
                let n = sigma_star.eval_capped(&m.into(), &k.into(), Cap(64)).to_u64()?.max(m);
                (n <= horizon).then_some((n, k))
            })
            .collect();
        targets.sort_unstable();
        let mut exact = seq.is_exact().then(BigRational::one);
        let mut float = 1.0f64;
        let mut next = 0;
        for n in m..=horizon {
            if next == targets.len() {
                break;
            }
            float *= beta.float[n as usize];
            if n > EXACT_PRODUCT_HORIZON {
                exact = None;
            }
            if let (Some(p), Some(b)) = (exact.as_mut(), beta.exact[n as usize].as_ref()) {
                *p *= b;
            }
            while next < targets.len() && targets[next].0 == n {
                let k = targets[next].1;
                let ok = match &exact {
                    Some(p) => *p <= rational(1, k + 1),
                    None => float <= 1.0 / (k + 1) as f64 + tol,
                };
                if !ok {
                    cond.fail(n, Some(k), Some(m), format!("Π_(i={m}..{n}) β_i = {float} > 1/{}", k + 1));
                }
                next += 1;
            }
        }
        if cond.failed() {
            break;
        }
    }
    cond.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_preset_values() {
        let h = preset("harmonic").unwrap();
        assert_eq!(h.spec().beta.exact(3).unwrap(), rational(4, 5));
        assert_eq!(h.beta::<f64>(3), 0.8);
        assert_eq!(h.sigma_star().eval(23, 5), BigUint::from(144u32));
        assert_eq!(h.sigma().eval_u64(1), BigUint::from(6u32));
        assert_eq!(h.lambda::<f64>(7), 0.5);
        assert_eq!(h.gamma::<f64>(0), 2.0);
        assert!(!h.b_monotonized());
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert_eq!(preset("nope").unwrap_err(), ScheduleError::UnknownPreset("nope".into()));
    }

    // Product telescoping oracle: Π_{n=m}^{N}(n+1)/(n+2) = (m+1)/(N+2), so the
    // least N with product ≤ 1/(k+1) is (m+1)(k+1) − 2 and σ* is valid.
    #[test]
    fn harmonic_product_rate_matches_telescoping() {
        let h = preset("harmonic").unwrap();
        for m in 0..30u64 {
            for k in 0..30u64 {
                let least = ((m + 1) * (k + 1)).saturating_sub(2).max(m);
                let n = h.sigma_star().eval(m, k).to_u64().unwrap();
                assert!(n >= least);
                assert!(rational(m + 1, n + 2) <= rational(1, k + 1));
            }
        }
    }

    #[test]
    fn chi_t_examples() {
        let h = preset("harmonic").unwrap();
        let one = BigUint::one();
        assert_eq!(chi_t(&h, &one, &0.into(), Cap::default()), RateValue::from(1));
        assert_eq!(chi_t(&h, &one, &4.into(), Cap::default()), RateValue::from(9));
        let c = preset("constant-gamma-harmonic-beta").unwrap();
        for k in 0..10u64 {
            assert_eq!(chi_t(&c, &BigUint::from(3u32), &k.into(), Cap::default()), RateValue::zero());
        }
    }

    #[test]
    fn presets_pass_audit() {
        for name in PRESET_NAMES {
            let report = audit_schedule(&preset(name).unwrap(), 20_000, 1e-9);
            assert!(report.pass, "{name}: {report:#?}");
        }
    }

    #[test]
    fn wrong_eta_is_caught_with_witness() {
        let bad = preset("harmonic").unwrap().with_spec(|s| s.eta = Counterfunction::constant(0)).unwrap();
        let report = audit_schedule(&bad, 1_000, 1e-9);
        assert!(!report.pass);
        let c4 = report.condition("C4_q").unwrap();
        let v = c4.first_violation.as_ref().unwrap();
        // k = 1 holds with equality (1 − β_0 = 1/2); k = 2 fails at n = 0.
        assert_eq!((v.n, v.k), (0, Some(2)));
    }

    #[test]
    fn constant_beta_one_fails_divergence() {
        let bad = preset("harmonic")
            .unwrap()
            .with_spec(|s| {
                s.beta = Sequence::constant(1, 1).unwrap();
                s.sigma = Counterfunction::Identity;
            })
            .unwrap();
        let report = audit_schedule(&bad, 100, 1e-9);
        let c1 = report.condition("C1_q").unwrap();
        assert_eq!(c1.first_violation.as_ref().unwrap().n, 1);
        assert!(!report.condition("C1_q*").unwrap().pass);
    }

    #[test]
    fn other_wrong_moduli_are_caught() {
        let h = preset("harmonic").unwrap();
        let cases: Vec<(&str, Box<dyn Fn(&mut BundleSpec)>)> = vec![
            ("C2_q", Box::new(|s| s.chi_beta = Counterfunction::constant(0))),
            ("C7_q", Box::new(|s| s.chi_gamma = Counterfunction::constant(0))),
            ("C5_q", Box::new(|s| s.lambda_bound = 1)),
            ("C8_q", Box::new(|s| s.gamma = Sequence::ratio(0, 1, 0, 3).unwrap())),
            ("G_bound", Box::new(|s| s.g_bound = 1)),
            ("C9_q", Box::new(|s| s.b = Counterfunction::constant(1))),
            ("C1_q", Box::new(|s| s.sigma = Counterfunction::Identity)),
            ("C1_q*", Box::new(|s| s.sigma_star = "prod(id,const:1)".parse().unwrap())),
        ];
        for (id, edit) in cases {
            let report = audit_schedule(&h.with_spec(|s| edit(s)).unwrap(), 2_000, 1e-9);
            assert!(!report.condition(id).unwrap().pass, "{id} should fail");
        }
    }

    #[test]
    fn non_monotone_b_is_monotonized_and_noted() {
        let h = preset("harmonic").unwrap().with_spec(|s| s.b = Counterfunction::table(&[3, 2, 2])).unwrap();
        assert!(h.b_monotonized());
        assert_eq!(h.b().eval_u64(1), BigUint::from(3u32));
        let report = audit_schedule(&h, 100, 1e-9);
        assert!(report.notes.iter().any(|n| n.contains("B was not monotone")));
    }

    #[test]
    fn real_sequences_fall_back_to_floats() {
        let h = preset("harmonic").unwrap().with_spec(|s| s.lambda = Sequence::Real(0.5)).unwrap();
        assert!(audit_schedule(&h, 1_000, 1e-9).pass);
    }

    #[test]
    fn sequence_literals_round_trip() {
        for s in ["ratio:1,1,1,2", "ratio:0,1,0,2", "real:0.25"] {
            assert_eq!(s.parse::<Sequence>().unwrap().to_string(), s);
        }
        assert!("ratio:1,1,1,0".parse::<Sequence>().is_err());
        assert!("ratio:1,1".parse::<Sequence>().is_err());
        assert!("foo".parse::<Sequence>().is_err());
    }

    #[test]
    fn zero_lambda_bound_is_rejected() {
        assert!(preset("harmonic").unwrap().with_spec(|s| s.lambda_bound = 0).is_err());
    }
}
