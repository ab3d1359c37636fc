//! Checks of the recursive inequalities and the approximate-fixed-point lemmas.

use num_traits::ToPrimitive;
use serde_json::json;

use super::{json_point, CheckResult, HypothesisStatus, VerifyError};
use crate::engine::Trajectory;
use crate::geometry::{GeodesicSpace, Point, SpaceModel};
use crate::mappings::MappingFamily;
use crate::rates::{omega1, omega2, RateValue};
use crate::scalar::Scalar;
use crate::schedules::ScheduleBundle;

/// Number of equispaced points used for the `∀t ∈ [0, 1]` quantifiers.
pub const DEFAULT_T_GRID: usize = 101;

/// `points` equispaced values `0, …, 1` (at least the two endpoints).
pub fn unit_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

fn d<T: Scalar>(space: &SpaceModel<T>, a: &Point<T>, b: &Point<T>) -> Result<f64, VerifyError> {
    Ok(space.dist(a, b)?.to_f64_lossy())
}

#[derive(Default)]
struct Worst {
    value: f64,
    n: Option<u64>,
}

impl Worst {
    fn observe(&mut self, violation: f64, n: u64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.n.is_none() || v > self.value {
            self.value = v;
            self.n = Some(n);
        }
    }
}

/// Along the trajectory, with `w_n = 2d(u_n, x)d(T_n x, x) + d²(T_n x, x)`:
/// (i) `d(x_{n+1}, x) ≤ d(u_n, x) + d(x, T_n x)`;
/// (ii) `d²(u_n, x) ≤ β_n d²(x_n, x) + 2β_n(1−β_n)⟨xu, xx_n⟩ + (1−β_n)² d²(x, u)`;
/// (iii) `d²(x_{n+1}, x) ≤ β_n(d²(x_n, x) + B(n) w_n) + (1−β_n)(2β_n⟨xu, xx_n⟩) + (1−β_n) d²(x, u)`.
pub fn check_recursive_inequalities<T: Scalar>(
    traj: &Trajectory<T>,
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    bundle: &ScheduleBundle,
    x: &Point<T>,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    space.validate(x)?;
    let u = &traj.anchor;
    let d_xu = d(space, x, u)?;
    let mut worst = [Worst::default(), Worst::default(), Worst::default()];
    for pair in traj.records.windows(2) {
        let (rec, next) = (&pair[0], &pair[1]);
        let n = rec.n;
        let beta: f64 = bundle.beta(n);
        let b_n = bundle.b().eval_u64(n).to_f64().unwrap_or(f64::INFINITY);
        let tx = family.apply(space, n, x)?;
        let (d_un, d_xn, d_next, d_tx) = (d(space, &rec.u, x)?, d(space, &rec.x, x)?, d(space, &next.x, x)?, d(space, &tx, x)?);
        let ql = space.quasilin(x, u, x, &rec.x)?.to_f64_lossy();
        let w = 2.0 * d_un * d_tx + d_tx * d_tx;
        worst[0].observe(d_next - (d_un + d_tx), n);
        let rhs2 = beta * d_xn * d_xn + 2.0 * beta * (1.0 - beta) * ql + (1.0 - beta).powi(2) * d_xu * d_xu;
        worst[1].observe(d_un * d_un - rhs2, n);
        let rhs3 = beta * (d_xn * d_xn + b_n * w) + (1.0 - beta) * (2.0 * beta * ql) + (1.0 - beta) * d_xu * d_xu;
        worst[2].observe(d_next * d_next - rhs3, n);
    }
    let mut result = CheckResult::new("recursive_inequalities", HypothesisStatus::NotApplicable)
        .witness("x", json_point(x))
        .horizon("end", traj.records.len().saturating_sub(1) as u64);
    for (name, w) in ["i", "ii", "iii"].iter().zip(&worst) {
        result = result.witness(&format!("max_violation_{name}"), w.value).witness(&format!("worst_n_{name}"), w.n);
        if w.value > tol {
            result = result.fail();
        }
    }
    Ok(result)
}

fn indices<T: Scalar>(family: &MappingFamily<T>, n_max: u64) -> u64 {
    if family.depends_on_n() {
        n_max
    } else {
        0
    }
}

/// If `v₁, v₂ ∈ B_p(K)` satisfy `d(v_i, T_n v_i) < 1/ω₁(k)` for all `n ≤ n_max`,
/// then `d(w_t, T_n w_t) < 1/(k+1)` for `w_t = comb(v₁, v₂, t)` on the grid.
#[allow(clippy::too_many_arguments)]
pub fn check_convex_afp<T: Scalar>(
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    v1: &Point<T>,
    v2: &Point<T>,
    p: &Point<T>,
    k_bound: u64,
    k: u64,
    n_max: u64,
    t_grid: &[f64],
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    const ID: &str = "convex_afp";
    let premise = 1.0 / omega1(k, k_bound).to_f64().unwrap_or(f64::INFINITY);
    for v in [v1, v2] {
        if d(space, v, p)? > k_bound as f64 + 1e-9 {
            return Ok(CheckResult::unmet(ID, "hypotheses unmet: point outside B_p(K)").witness("v", json_point(v)));
        }
        for n in 0..=indices(family, n_max) {
            let gap = d(space, v, &family.apply(space, n, v)?)?;
            if !(gap < premise) {
                return Ok(CheckResult::unmet(ID, "hypotheses unmet: d(v, T_n v) ≥ 1/ω₁(k)")
                    .witness("v", json_point(v))
                    .witness("n", n)
                    .witness("gap", gap));
            }
        }
    }
    let bound = 1.0 / (k + 1) as f64;
    let mut worst = (f64::NEG_INFINITY, json!(null));
    for &t in t_grid {
        let w = space.comb(v1, v2, T::lit(t))?;
        for n in 0..=indices(family, n_max) {
            let gap = d(space, &w, &family.apply(space, n, &w)?)?;
            if gap > worst.0 {
                worst = (gap, json!({ "t": t, "n": n }));
            }
        }
    }
    let mut result = CheckResult::new(ID, HypothesisStatus::Met)
        .witness("k", k)
        .witness("max_gap", worst.0)
        .witness("worst", worst.1)
        .horizon("n_max", n_max)
        .horizon("t_grid", t_grid.len() as u64);
    if !(worst.0 < bound + tol) {
        result = result.fail();
    }
    Ok(result)
}

/// If `x, y ∈ B_p(K)` and `d²(x, u) ≤ d²(w_t, u) + 1/ω₂(k)` on the grid, with
/// `w_t = comb(x, y, t)`, then `⟨xu, xy⟩ ≤ 1/(k+1)`.
#[allow(clippy::too_many_arguments)]
pub fn check_variational<T: Scalar>(
    space: &SpaceModel<T>,
    x: &Point<T>,
    y: &Point<T>,
    u: &Point<T>,
    p: &Point<T>,
    k_bound: u64,
    k: u64,
    t_grid: &[f64],
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    const ID: &str = "variational";
    for v in [x, y] {
        if d(space, v, p)? > k_bound as f64 + 1e-9 {
            return Ok(CheckResult::unmet(ID, "hypotheses unmet: point outside B_p(K)").witness("v", json_point(v)));
        }
    }
    let slack = 1.0 / omega2(k, k_bound).to_f64().unwrap_or(f64::INFINITY);
    let d_xu = d(space, x, u)?;
    for &t in t_grid {
        let w = space.comb(x, y, T::lit(t))?;
        let d_wu = d(space, &w, u)?;
        if d_xu * d_xu > d_wu * d_wu + slack {
            return Ok(CheckResult::unmet(ID, "hypotheses unmet: d²(x,u) > d²(w_t,u) + 1/ω₂(k)").witness("t", t));
        }
    }
    let ql = space.quasilin(x, u, x, y)?.to_f64_lossy();
    let mut result = CheckResult::new(ID, HypothesisStatus::Met)
        .witness("k", k)
        .witness("quasilinearization", ql)
        .horizon("t_grid", t_grid.len() as u64);
    if ql > 1.0 / (k + 1) as f64 + tol {
        result = result.fail();
    }
    Ok(result)
}

/// Along the trajectory, `χ_T(k)` is a Cauchy modulus for
/// `Σ d(T_{n+1} u_n, T_n u_n)`: every tail sum from `χ_T(k)` is at most `1/(k+1)`.
pub fn check_chi_t<T: Scalar>(
    traj: &Trajectory<T>,
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    chi_t: &dyn Fn(u64) -> RateValue,
    k_max: u64,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let terms = if family.depends_on_n() {
        traj.records
            .iter()
            .map(|r| d(space, &family.apply(space, r.n + 1, &r.u)?, &family.apply(space, r.n, &r.u)?))
            .collect::<Result<Vec<f64>, VerifyError>>()?
    } else {
        vec![0.0; traj.records.len()]
    };
    let mut tails = vec![0.0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        tails[i] = tails[i + 1] + terms[i];
    }
    let mut result = CheckResult::new("chi_t", HypothesisStatus::NotApplicable)
        .horizon("k_max", k_max)
        .horizon("end", terms.len().saturating_sub(1) as u64);
    let mut checked = 0u64;
    for k in 0..=k_max {
        let Some(start) = chi_t(k).to_u64().filter(|s| (*s as usize) < terms.len()) else { continue };
        checked += 1;
        if tails[start as usize] > 1.0 / (k + 1) as f64 + tol {
            return Ok(result.witness("k", k).witness("start", start).witness("tail", tails[start as usize]).fail());
        }
    }
    result = result.witness("checked_k", checked);
    Ok(result)
}
