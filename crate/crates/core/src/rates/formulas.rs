//! The rate formulas themselves: asymptotic regularity rates, the bounds from
//! the approximate-fixed-point lemmas, and the metastability rates.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::counterfn::{BiCounterfunction, Counterfunction, FnNat, NatFunction};
use super::value::{Cap, RateValue};
use crate::schedules::{chi_t, ScheduleBundle};

/// Iteration count above which [`iterate`] gives up and reports an astronomical value
/// (unless a fixed point was reached earlier).
pub const ITERATE_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("invalid bound: {0}")]
    InvalidBound(String),
    #[error("unknown rate `{0}` (expected one of chi, Sigma, Sigma_tilde, Sigma_star, Sigma_tilde_star, Psi, Psi_star)")]
    UnknownRate(String),
}

/// Scenario-level constants: `M = max{d(x₀,p), d(u,p)}`, a natural `K ≥ M`, and
/// the bound `S` used for instances of the Xu-type lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBounds {
    pub k: u64,
    pub m: f64,
    pub s: u64,
}

impl ScenarioBounds {
    /// Smallest admissible `K`, i.e. `max{1, ⌈M⌉}`, and `S = 1`.
    pub fn from_radius(m: f64) -> Result<Self, RateError> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(RateError::InvalidBound(format!("M = {m} must be a finite nonnegative real")));
        }
        Self::new(m.ceil().max(1.0) as u64, m, 1)
    }

    pub fn new(k: u64, m: f64, s: u64) -> Result<Self, RateError> {
        if k == 0 || (k as f64) < m.ceil() {
            return Err(RateError::InvalidBound(format!("K = {k} must be positive and at least ⌈M⌉ = {}", m.ceil())));
        }
        if s == 0 {
            return Err(RateError::InvalidBound("S must be positive".into()));
        }
        Ok(Self { k, m, s })
    }
}

/// How the Cauchy modulus `χ_T` of `Σ d(T_{n+1} u_n, T_n u_n)` is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiT {
    /// The family does not depend on `n`, so every term vanishes.
    Zero,
    /// Derived from the modulus `χ_γ` of `(γ_n)` for families satisfying Condition (C1).
    FromGamma,
    Custom(Counterfunction),
}

/// The single-argument rates that can be tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Chi,
    Sigma,
    SigmaTilde,
    SigmaStar,
    SigmaTildeStar,
    Psi,
    PsiStar,
}

impl RateKind {
    pub const ALL: [RateKind; 7] = [
        RateKind::Chi,
        RateKind::Sigma,
        RateKind::SigmaTilde,
        RateKind::SigmaStar,
        RateKind::SigmaTildeStar,
        RateKind::Psi,
        RateKind::PsiStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateKind::Chi => "chi",
            RateKind::Sigma => "Sigma",
            RateKind::SigmaTilde => "Sigma_tilde",
            RateKind::SigmaStar => "Sigma_star",
            RateKind::SigmaTildeStar => "Sigma_tilde_star",
            RateKind::Psi => "Psi",
            RateKind::PsiStar => "Psi_star",
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateKind {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RateKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| RateError::UnknownRate(s.to_string()))
    }
}

/// `r(k) = K²(k + 1)`
pub fn r_of_k(k: u64, k_bound: u64) -> BigUint {
    r_fn(k_bound).eval_u64(k)
}

/// `ω₁(k) = 24K(k + 1)²`
pub fn omega1(k: u64, k_bound: u64) -> BigUint {
    omega1_fn(k_bound).eval_u64(k)
}

/// `ω₂(k) = 4K²(k + 1)²`
pub fn omega2(k: u64, k_bound: u64) -> BigUint {
    omega2_fn(k_bound).eval_u64(k)
}

fn k2(k_bound: u64) -> BigUint {
    BigUint::from(k_bound) * k_bound
}

fn r_fn(k_bound: u64) -> Counterfunction {
    let k2 = k2(k_bound);
    Counterfunction::Affine(k2.clone(), k2)
}

fn squared_successor() -> Counterfunction {
    Counterfunction::compose(Counterfunction::Power(2), Counterfunction::affine(1, 1))
}

fn omega1_fn(k_bound: u64) -> Counterfunction {
    Counterfunction::compose(Counterfunction::Affine(BigUint::from(24u32) * k_bound, BigUint::default()), squared_successor())
}

fn omega2_fn(k_bound: u64) -> Counterfunction {
    Counterfunction::compose(Counterfunction::Affine(BigUint::from(4u32) * k2(k_bound), BigUint::default()), squared_successor())
}

/// `f̂(k) = max{ω₁(k), f(ω₁(k))}`
pub fn hat(f: &Counterfunction, k_bound: u64) -> Counterfunction {
    let w1 = omega1_fn(k_bound);
    Counterfunction::max(vec![w1.clone(), Counterfunction::compose(f.clone(), w1)])
}

fn hat_nat<'a>(f: &'a dyn NatFunction, k_bound: u64) -> impl NatFunction + 'a {
    let w1 = omega1_fn(k_bound);
    FnNat(move |x: &RateValue, cap: Cap| {
        let w = w1.eval_capped(x, cap);
        let fw = f.apply(&w, cap);
        RateValue::max_of(w, fw)
    })
}

/// `f^{(m)}(start)`. Stops early at a fixed point; astronomical once a value
/// exceeds the cap, or when `m` exceeds [`ITERATE_STEP_LIMIT`] without a fixed point.
pub fn iterate(f: &dyn NatFunction, m: &RateValue, start: RateValue, cap: Cap) -> RateValue {
    let steps = m.to_u64().filter(|m| *m <= ITERATE_STEP_LIMIT);
    let mut x = start;
    let mut i = 0u64;
    loop {
        if Some(i) == steps {
            return x;
        }
        if i == ITERATE_STEP_LIMIT {
            return RateValue::astronomical(format!("iterate^({})", m.label()), cap);
        }
        let y = f.apply(&x, cap);
        if y == x {
            return x;
        }
        x = y;
        i += 1;
    }
}

fn bound_n_star_nat(k: &RateValue, f: &dyn NatFunction, k_bound: u64, cap: Cap) -> RateValue {
    let steps = r_fn(k_bound).eval_capped(&omega2_fn(k_bound).eval_capped(k, cap), cap);
    let inner = iterate(&hat_nat(f, k_bound), &steps, RateValue::zero(), cap);
    omega1_fn(k_bound).eval_capped(&inner, cap)
}

/// `ω₁(f̂^{(r(ω₂(k)))}(0))`, the bound on the index of an approximate fixed
/// point close to the projection of the anchor.
pub fn bound_n_star(k: u64, f: &Counterfunction, k_bound: u64, cap: Cap) -> RateValue {
    let f = f.clone().monotonized();
    bound_n_star_nat(&k.into(), &f, k_bound, cap).relabel(|| format!("omega1(hat({f})^(r(omega2({k}))))(0)"))
}

/// `ζ(k, n) = σ(n + ⌈ln(3S(k + 1))⌉) + 1`
pub fn zeta(k: &RateValue, n: &RateValue, sigma: &Counterfunction, s: u64, cap: Cap) -> RateValue {
    let three_s = BigUint::from(3u32) * s;
    let log = Counterfunction::CeilLnOfLinear(three_s.clone(), three_s).eval_capped(k, cap);
    cap.add_u(&sigma.eval_capped(&cap.add(n, &log), cap), 1)
}

/// `ζ*(k, n) = σ*(n, 3S(k + 1) − 1) + 1`
pub fn zeta_star(k: &RateValue, n: &RateValue, sigma_star: &BiCounterfunction, s: u64, cap: Cap) -> RateValue {
    let j = cap.scaled_pred(&RateValue::from(3 * s), k);
    cap.add_u(&sigma_star.eval_capped(n, &j, cap), 1)
}

/// `max{φ((1 + 2ΓG)(k + 1) − 1), N_Γ}`
pub fn psi_from_phi(phi: &dyn NatFunction, k: &RateValue, gamma_bound: u64, g_bound: u64, n_gamma: u64, cap: Cap) -> RateValue {
    let factor = RateValue::Finite(BigUint::from(gamma_bound) * g_bound * 2u32 + 1u32);
    RateValue::max_of(phi.apply(&cap.scaled_pred(&factor, k), cap), n_gamma.into())
}

/// A schedule bundle, a bound `K`, a `χ_T` and a bit cap: everything the
/// single-argument rates and the metastability rates depend on.
#[derive(Debug, Clone)]
pub struct RateContext {
    bundle: ScheduleBundle,
    k_bound: u64,
    chi_t: ChiT,
    cap: Cap,
}

impl RateContext {
    pub fn new(bundle: ScheduleBundle, k_bound: u64, chi_t: ChiT, cap: Cap) -> Result<Self, RateError> {
        if k_bound == 0 {
            return Err(RateError::InvalidBound("K must be positive".into()));
        }
        let chi_t = match chi_t {
            ChiT::Custom(f) => ChiT::Custom(f.monotonized()),
            other => other,
        };
        Ok(Self { bundle, k_bound, chi_t, cap })
    }

    pub fn bundle(&self) -> &ScheduleBundle {
        &self.bundle
    }

    pub fn k_bound(&self) -> u64 {
        self.k_bound
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    pub fn with_cap(&self, cap: Cap) -> Self {
        Self { cap, ..self.clone() }
    }

    /// `a·K·(k + 1) − 1`
    fn k_scaled(&self, a: u64, k: &RateValue) -> RateValue {
        self.cap.scaled_pred(&RateValue::Finite(BigUint::from(a) * self.k_bound), k)
    }

    pub fn chi_t_at(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        match &self.chi_t {
            ChiT::Zero => RateValue::zero(),
            ChiT::FromGamma => chi_t(&self.bundle, &BigUint::from(self.k_bound), &k, self.cap),
            ChiT::Custom(f) => f.eval_capped(&k, self.cap),
        }
    }

    /// `χ(k) = max{χ_T(2(k+1) − 1), χ_λ(8K(k+1) − 1), χ_β(8K(k+1) − 1)}`
    pub fn chi(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        let cap = self.cap;
        let t = self.chi_t_at(cap.scaled_pred(&2.into(), &k));
        let j = self.k_scaled(8, &k);
        let l = self.bundle.chi_lambda().eval_capped(&j, cap);
        let b = self.bundle.chi_beta().eval_capped(&j, cap);
        RateValue::max_of(RateValue::max_of(t, l), b).relabel(|| format!("chi({})", k.label()))
    }

    fn chi_3k2(&self, k: &RateValue) -> RateValue {
        self.chi(self.cap.add_u(&self.cap.mul_u(k, 3), 2))
    }

    /// `Σ(k) = σ(χ(3k+2) + 2 + ⌈ln(6K(k+1))⌉) + 1`
    pub fn sigma(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        let cap = self.cap;
        let six_k = BigUint::from(6u32) * self.k_bound;
        let log = Counterfunction::CeilLnOfLinear(six_k.clone(), six_k).eval_capped(&k, cap);
        let arg = cap.add(&cap.add_u(&self.chi_3k2(&k), 2), &log);
        cap.add_u(&self.bundle.sigma().eval_capped(&arg, cap), 1).relabel(|| format!("Sigma({})", k.label()))
    }

    /// `Σ*(k) = σ*(χ(3k+2), 6K(k+1) − 1) + 1`
    pub fn sigma_star(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        let cap = self.cap;
        let value = self.bundle.sigma_star().eval_capped(&self.chi_3k2(&k), &self.k_scaled(6, &k), cap);
        cap.add_u(&value, 1).relabel(|| format!("Sigma_star({})", k.label()))
    }

    /// `max{N_Λ, base(2Λ(k+1) − 1), η(4KΛ(k+1) − 1)}`
    fn tilde(&self, k: &RateValue, base: impl Fn(RateValue) -> RateValue) -> RateValue {
        let cap = self.cap;
        let lam = self.bundle.lambda_bound();
        let b = base(cap.scaled_pred(&RateValue::from(2 * lam), k));
        let e = self.bundle.eta().eval_capped(&self.k_scaled(4 * lam, k), cap);
        RateValue::max_of(RateValue::max_of(self.bundle.n_lambda().into(), b), e)
    }

    /// `Σ̃(k) = max{N_Λ, Σ(2Λ(k+1) − 1), η(4KΛ(k+1) − 1)}`
    pub fn sigma_tilde(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        self.tilde(&k, |j| self.sigma(j)).relabel(|| format!("Sigma_tilde({})", k.label()))
    }

    /// `Σ̃*(k) = max{N_Λ, Σ*(2Λ(k+1) − 1), η(4KΛ(k+1) − 1)}`
    pub fn sigma_tilde_star(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        self.tilde(&k, |j| self.sigma_star(j)).relabel(|| format!("Sigma_tilde_star({})", k.label()))
    }

    fn psi_of(&self, phi: &dyn NatFunction, k: &RateValue) -> RateValue {
        let b = &self.bundle;
        psi_from_phi(phi, k, b.gamma_bound(), b.g_bound(), b.n_gamma(), self.cap)
    }

    /// `Ψ(k) = max{Σ̃((1 + 2ΓG)(k+1) − 1), N_Γ}`
    pub fn psi(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        self.psi_of(&FnNat(|j: &RateValue, _| self.sigma_tilde(j.clone())), &k).relabel(|| format!("Psi({})", k.label()))
    }

    /// `Ψ*(k) = max{Σ̃*((1 + 2ΓG)(k+1) − 1), N_Γ}`
    pub fn psi_star(&self, k: impl Into<RateValue>) -> RateValue {
        let k = k.into();
        self.psi_of(&FnNat(|j: &RateValue, _| self.sigma_tilde_star(j.clone())), &k).relabel(|| format!("Psi_star({})", k.label()))
    }

    pub fn eval(&self, kind: RateKind, k: impl Into<RateValue>) -> RateValue {
        match kind {
            RateKind::Chi => self.chi(k),
            RateKind::Sigma => self.sigma(k),
            RateKind::SigmaTilde => self.sigma_tilde(k),
            RateKind::SigmaStar => self.sigma_star(k),
            RateKind::SigmaTildeStar => self.sigma_tilde_star(k),
            RateKind::Psi => self.psi(k),
            RateKind::PsiStar => self.psi_star(k),
        }
    }

    /// `ω₃(k, f) = Φ(ω₁(ĝ^{(r(ω₂(k)))}(0)))` with `g = f ∘ Φ`; `Φ` must be monotone.
    pub fn omega3(&self, k: impl Into<RateValue>, f: &dyn NatFunction, phi: &dyn NatFunction) -> RateValue {
        let k = k.into();
        let g = FnNat(|x: &RateValue, cap: Cap| f.apply(&phi.apply(x, cap), cap));
        phi.apply(&bound_n_star_nat(&k, &g, self.k_bound, self.cap), self.cap).relabel(|| format!("omega3({})", k.label()))
    }

    /// Rate of metastability when `Σ(1 − β_n)` diverges with rate `σ`; `Φ`
    /// defaults to [`RateContext::psi`].
    pub fn mu(&self, k: impl Into<RateValue>, f: &Counterfunction, phi: Option<&Counterfunction>) -> RateValue {
        let k = k.into();
        self.mu_impl(&k, f, phi, false).relabel(|| format!("mu({}, {f})", k.label()))
    }

    /// Rate of metastability when `Π β_n → 0` with rate `σ*`; `Φ` defaults to
    /// [`RateContext::psi_star`].
    pub fn mu_star(&self, k: impl Into<RateValue>, f: &Counterfunction, phi: Option<&Counterfunction>) -> RateValue {
        let k = k.into();
        self.mu_impl(&k, f, phi, true).relabel(|| format!("mu_star({}, {f})", k.label()))
    }

    fn mu_impl(&self, k: &RateValue, f: &Counterfunction, phi: Option<&Counterfunction>, product: bool) -> RateValue {
        let cap = self.cap;
        let b = &self.bundle;
        let f = f.clone().monotonized();
        let k2 = self.k_bound * self.k_bound;
        // k̃ = 4(k+1)² − 1
        let kt = cap.mul_u(&cap.pow(&cap.add_u(k, 1), 2), 4).saturating_pred();
        let e = b.eta().eval_capped(&cap.scaled_pred(&RateValue::from(24 * k2), &kt), cap);
        // Both variants use S = 4K², giving the logarithm ⌈ln(12K²(i+1))⌉ resp. σ*(m, 12K²(i+1) − 1).
        let s = 4 * k2;
        let zeta_at = |i: &RateValue, m: &RateValue| {
            if product {
                zeta_star(i, m, b.sigma_star(), s, cap)
            } else {
                zeta(i, m, b.sigma(), s, cap)
            }
        };
        let f_bar = |i: &RateValue| f.eval_capped(&zeta_at(&kt, &RateValue::max_of(i.clone(), e.clone())), cap);
        let coef = cap.mul(&cap.add_u(&kt, 1), &RateValue::from(12 * self.k_bound));
        let f_tilde = FnNat(|i: &RateValue, cap: Cap| {
            let fb = f_bar(i);
            let bound = b.b().eval_capped(&fb, cap);
            cap.mul(&cap.mul(&coef, &cap.add_u(&fb, 1)), &bound).saturating_pred()
        });
        let j = cap.mul_u(&cap.add_u(&kt, 1), 12).saturating_pred();
        let w3 = match phi {
            Some(phi) => self.omega3(j, &f_tilde, &phi.clone().monotonized()),
            None if product => self.omega3(j, &f_tilde, &FnNat(|x: &RateValue, _| self.psi_star(x.clone()))),
            None => self.omega3(j, &f_tilde, &FnNat(|x: &RateValue, _| self.psi(x.clone()))),
        };
        zeta_at(&kt, &RateValue::max_of(w3, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::preset;

    fn big(s: &str) -> RateValue {
        RateValue::Finite(s.parse().unwrap())
    }

    fn harmonic() -> RateContext {
        RateContext::new(preset("harmonic").unwrap(), 1, ChiT::Zero, Cap::default()).unwrap()
    }

    fn constant_gamma() -> RateContext {
        RateContext::new(preset("constant-gamma-harmonic-beta").unwrap(), 1, ChiT::Zero, Cap::default()).unwrap()
    }

    fn n(v: u64) -> RateValue {
        v.into()
    }

    #[test]
    fn elementary_bounds() {
        assert_eq!(r_of_k(0, 1), BigUint::from(1u32));
        assert_eq!(r_of_k(4, 1), BigUint::from(5u32));
        assert_eq!(r_of_k(2, 3), BigUint::from(27u32));
        assert_eq!(omega1(0, 1), BigUint::from(24u32));
        assert_eq!(omega2(0, 1), BigUint::from(4u32));
        assert_eq!(omega1(2, 2), BigUint::from(432u32));
    }

    #[test]
    fn hat_examples() {
        assert_eq!(hat(&Counterfunction::constant(0), 1).eval_u64(0), BigUint::from(24u32));
        let id_hat = hat(&Counterfunction::Identity, 1);
        for i in 0..50 {
            assert_eq!(id_hat.eval_u64(i), omega1(i, 1));
        }
        assert_eq!(hat(&Counterfunction::affine(2, 0), 1).eval_u64(0), BigUint::from(48u32));
    }

    #[test]
    fn iterate_examples() {
        let w1 = omega1_fn(1);
        assert_eq!(iterate(&w1, &n(2), n(0), Cap::default()), n(15000));
        assert_eq!(iterate(&w1, &n(0), n(17), Cap::default()), n(17));
        assert!(iterate(&w1, &n(9217), n(0), Cap::default()).is_astronomical());
        // fixed points end the iteration early, even for huge counts
        let c = Counterfunction::constant(5);
        assert_eq!(iterate(&c, &RateValue::astronomical("m", Cap::default()), n(0), Cap::default()), n(5));
        assert!(iterate(&Counterfunction::affine(1, 1), &n(ITERATE_STEP_LIMIT + 1), n(0), Cap::default()).is_astronomical());
    }

    // Values checked against a standalone big-integer script.
    const BOUND_N_STAR_0: &str =
        "3319647752585578524837999379124733768217032982476176933734065668474286580569168864015000";

    #[test]
    fn bound_n_star_examples() {
        let zero = Counterfunction::constant(0);
        let v = bound_n_star(0, &zero, 1, Cap::default());
        assert_eq!(v, big(BOUND_N_STAR_0));
        assert_eq!(bound_n_star(0, &zero, 1, Cap(1 << 26)), big(BOUND_N_STAR_0));
        assert!(bound_n_star(0, &zero, 1, Cap(200)).is_astronomical());
        // f̂⁰(0) = 0 gives ω₁(0) = 24K
        assert_eq!(omega1_fn(3).eval_capped(&iterate(&hat(&zero, 3), &n(0), n(0), Cap::default()), Cap::default()), n(72));
    }

    #[test]
    fn zeta_examples() {
        let h = preset("harmonic").unwrap();
        assert_eq!(zeta_star(&n(0), &n(0), h.sigma_star(), 4, Cap::default()), n(13));
        assert_eq!(zeta(&n(0), &n(0), &Counterfunction::Identity, 1, Cap::default()), n(3));
        for k in 0..=10 {
            for m in 0..=10 {
                let v = zeta_star(&n(k), &n(m), h.sigma_star(), 4, Cap::default());
                assert!(v <= zeta_star(&n(k + 1), &n(m), h.sigma_star(), 4, Cap::default()));
                assert!(v <= zeta_star(&n(k), &n(m + 1), h.sigma_star(), 4, Cap::default()));
            }
        }
    }

    #[test]
    fn chi_examples() {
        let ctx = harmonic();
        assert_eq!(ctx.chi(0), n(7));
        assert_eq!(ctx.chi(2), n(23));
        let b = preset("harmonic").unwrap().with_spec(|s| s.chi_lambda = Counterfunction::Identity).unwrap();
        let ctx = RateContext::new(b, 1, ChiT::Zero, Cap::default()).unwrap();
        assert_eq!(ctx.chi(0), n(7));
        let from_gamma = RateContext::new(preset("harmonic").unwrap(), 1, ChiT::FromGamma, Cap::default()).unwrap();
        // χ_T(1) = χ_γ(2·1·1·2 − 1) = 3
        assert_eq!(from_gamma.chi_t_at(1), n(3));
        assert_eq!(from_gamma.chi(0), n(7));
    }

    #[test]
    fn sigma_golden_values() {
        let ctx = harmonic();
        assert_eq!(ctx.sigma_star(0), n(145));
        assert_eq!(ctx.sigma_tilde_star(0), n(2305));
        assert_eq!(ctx.sigma_star(5), n(5185));
        // ⌈2e²⁷⌉ + 1 and Σ(1) from a high-precision oracle
        assert_eq!(ctx.sigma(0), n(1_064_096_481_205));
        assert_eq!(ctx.sigma(1), big("76620160014331536986073"));
    }

    #[test]
    fn psi_examples() {
        let id = Counterfunction::Identity;
        assert_eq!(psi_from_phi(&id, &n(0), 1, 1, 0, Cap::default()), n(2));
        assert_eq!(psi_from_phi(&Counterfunction::constant(0), &n(9), 1, 1, 4, Cap::default()), n(4));
        assert_eq!(psi_from_phi(&id, &n(0), 1, 2, 7, Cap::default()), n(7));

        let ctx = constant_gamma();
        assert_eq!(ctx.psi_star(0), n(20737));
        for k in 0..=5u64 {
            assert!(ctx.psi_star(k) >= ctx.sigma_tilde_star(3 * k + 2));
        }
        let b = preset("constant-gamma-harmonic-beta").unwrap().with_spec(|s| s.n_gamma = 1_000_000).unwrap();
        let ctx = RateContext::new(b, 1, ChiT::Zero, Cap::default()).unwrap();
        assert_eq!(ctx.psi_star(0), n(1_000_000));
        // with G = 2 the same chain reaches further: σ*(479, 119) + 1
        assert_eq!(harmonic().psi_star(0), n(57601));
    }

    #[test]
    fn dominance_chain() {
        let ctx = harmonic();
        for k in 0..=10u64 {
            let s = ctx.sigma_star(k);
            let t = ctx.sigma_tilde_star(k);
            assert!(s <= t && t <= ctx.psi_star(k), "k = {k}");
        }
    }

    #[test]
    fn omega3_examples() {
        let ctx = harmonic();
        let zero = Counterfunction::constant(0);
        let id = Counterfunction::Identity;
        assert_eq!(ctx.omega3(47, &id, &zero), n(0));
        assert_eq!(ctx.omega3(5, &zero, &Counterfunction::constant(3)), n(3));
        assert_eq!(ctx.omega3(0, &id, &id), big(BOUND_N_STAR_0));
        assert_eq!(ctx.with_cap(Cap(1 << 26)).omega3(0, &id, &id), big(BOUND_N_STAR_0));
    }

    #[test]
    fn mu_examples() {
        let ctx = harmonic();
        let zero = Counterfunction::constant(0);
        assert_eq!(ctx.mu_star(0, &zero, Some(&zero)), n(4609));
        // σ(95 + ⌈ln 48⌉) + 1 = ⌈2e⁹⁹⌉ + 1
        assert_eq!(ctx.mu(0, &zero, Some(&zero)), big("19778060638693893541120061934276074202810167"));
        let astro = ctx.mu_star(0, &zero, None);
        assert!(astro.is_astronomical());
        assert!(astro.to_string().starts_with("ASTRO:mu_star(0"));
    }

    #[test]
    fn mu_is_monotone_in_k() {
        let ctx = harmonic();
        let zero = Counterfunction::constant(0);
        let stars: Vec<_> = (0..=3u64).map(|k| ctx.mu_star(k, &zero, Some(&zero))).collect();
        let plains: Vec<_> = (0..=3u64).map(|k| ctx.mu(k, &zero, Some(&zero))).collect();
        assert!(stars.windows(2).all(|w| w[0] <= w[1]));
        assert!(plains.windows(2).all(|w| w[0] <= w[1]));
        // k̃ = 4(k+1)² − 1, so μ*(k) = 96(k+1)²·48(k+1)² + 1
        for (k, v) in stars.iter().enumerate() {
            let q = ((k + 1) * (k + 1)) as u64;
            assert_eq!(*v, n(96 * q * 48 * q + 1));
        }
    }

    #[test]
    fn monotonized_inputs_change_nothing() {
        let plain = harmonic();
        let wrapped = preset("harmonic")
            .unwrap()
            .with_spec(|s| {
                for f in [&mut s.sigma, &mut s.chi_beta, &mut s.chi_lambda, &mut s.chi_gamma, &mut s.eta, &mut s.b] {
                    *f = Counterfunction::monotonize(f.clone());
                }
            })
            .unwrap();
        let wrapped = RateContext::new(wrapped, 1, ChiT::Zero, Cap::default()).unwrap();
        for k in 0..=20u64 {
            for kind in [RateKind::Chi, RateKind::SigmaStar, RateKind::SigmaTildeStar, RateKind::PsiStar] {
                assert_eq!(plain.eval(kind, k), wrapped.eval(kind, k));
            }
        }
        let zero = Counterfunction::constant(0);
        assert_eq!(plain.mu_star(0, &zero, Some(&zero)), wrapped.mu_star(0, &Counterfunction::monotonize(zero.clone()), Some(&zero)));
    }

    #[test]
    fn astronomical_inputs_propagate() {
        let ctx = harmonic();
        let a = RateValue::astronomical("x", ctx.cap());
        assert!(ctx.sigma_star(a.clone()).is_astronomical());
        assert!(ctx.chi(a).is_astronomical());
    }

    #[test]
    fn scenario_bounds_validation() {
        let b = ScenarioBounds::from_radius(2.3).unwrap();
        assert_eq!((b.k, b.s), (3, 1));
        assert_eq!(ScenarioBounds::from_radius(0.0).unwrap().k, 1);
        assert!(ScenarioBounds::new(2, 2.3, 1).is_err());
        assert!(ScenarioBounds::new(3, 2.3, 0).is_err());
        assert!(ScenarioBounds::from_radius(f64::NAN).is_err());
        assert!(RateContext::new(preset("harmonic").unwrap(), 0, ChiT::Zero, Cap::default()).is_err());
    }

    #[test]
    fn rate_kind_names_round_trip() {
        for kind in RateKind::ALL {
            assert_eq!(kind.name().parse::<RateKind>().unwrap(), kind);
        }
        assert!("sigma".parse::<RateKind>().is_err());
    }
}
