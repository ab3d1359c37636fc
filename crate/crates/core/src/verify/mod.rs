//! Empirical checks of the quantitative statements against trajectories and
//! synthetic instances. Every check returns a [`CheckResult`] carrying enough
//! context (witnesses, horizons) to re-run the failing instance.

mod lemmas;
mod xu;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::engine::Trajectory;
use crate::geometry::{GeodesicSpace, GeometryError, SpaceModel};
use crate::mappings::{MappingError, MappingFamily};
use crate::rates::{Cap, Counterfunction, RateValue};
use crate::scalar::Scalar;

pub use lemmas::{check_chi_t, check_convex_afp, check_recursive_inequalities, check_variational, unit_grid, DEFAULT_T_GRID};
pub use xu::{check_xu_lemma, XuInstance, XuVariant};

/// Additive tolerance used for float conclusions unless stated otherwise.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("insufficient data: need index {needed}, trajectory ends at {available}")]
    InsufficientData { needed: u64, available: u64 },
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Met,
    /// The premises fail on the tested instance; the conclusion was not tested.
    Unmet,
    /// The check has no premises beyond its inputs.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_hash: Option<String>,
    pub pass: bool,
    pub hypothesis_status: HypothesisStatus,
    pub witnesses: Map<String, Value>,
    pub horizons: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn new(check_id: impl Into<String>, hypothesis_status: HypothesisStatus) -> Self {
        Self {
            check_id: check_id.into(),
            scenario_hash: None,
            pass: true,
            hypothesis_status,
            witnesses: Map::new(),
            horizons: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_scenario(mut self, hash: impl Into<String>) -> Self {
        self.scenario_hash = Some(hash.into());
        self
    }

    pub fn witness(mut self, key: &str, value: impl Serialize) -> Self {
        self.witnesses.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn horizon(mut self, key: &str, value: u64) -> Self {
        self.horizons.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }

    /// Passing result whose premises do not hold.
    pub fn unmet(check_id: impl Into<String>, why: impl Into<String>) -> Self {
        Self::new(check_id, HypothesisStatus::Unmet).note(why)
    }
}

/// `min(rate, cap)`, the first index a rate check inspects.
fn start_index(rate: &RateValue, cap: u64) -> u64 {
    rate.to_u64().map_or(cap, |r| r.min(cap))
}

/// Checks a rate of convergence to 0 for the nonnegative sequence `values`:
/// `values[n] ≤ 1/(k+1) + tol` on `[min(rate, cap), end]`, and that the
/// first index where the bound is reached does not exceed the rate.
fn check_rate_on(id: &str, values: &[f64], rate: &RateValue, k: u64, cap: u64, tol: f64) -> Result<CheckResult, VerifyError> {
    let end = values.len().saturating_sub(1) as u64;
    let start = start_index(rate, cap);
    if values.is_empty() || start > end {
        return Err(VerifyError::InsufficientData { needed: start, available: end });
    }
    let bound = 1.0 / (k + 1) as f64;
    let ok = |v: f64| v <= bound + tol;
    let first_hit = values.iter().position(|v| ok(*v)).map(|i| i as u64);
    // least n such that the bound holds on all of [n, end]
    let empirical = values.iter().rposition(|v| !ok(*v)).map_or(0, |i| i as u64 + 1);
    let violation = (start..=end).find(|n| !ok(values[*n as usize]));
    let mut result = CheckResult::new(id, HypothesisStatus::NotApplicable)
        .witness("k", k)
        .witness("rate", rate.to_string())
        .witness("first_hit", first_hit)
        .witness("empirical_rate", empirical)
        .horizon("start", start)
        .horizon("end", end)
        .horizon("cap", cap);
    if rate.is_astronomical() {
        result = result.note("rate is astronomical: bound comparison holds vacuously");
    }
    if let Some(n) = violation {
        result = result.witness("violation_n", n).witness("violation_value", values[n as usize]).fail();
    }
    match first_hit {
        Some(n) if !rate.bounds(n) => result = result.fail(),
        None => result = result.note("bound never reached on the trajectory").fail(),
        _ => {}
    }
    Ok(result)
}

/// Asymptotic regularity: `d(x_n, x_{n+1}) ≤ 1/(k+1)` from the rate on.
pub fn check_ar<T: Scalar>(traj: &Trajectory<T>, rate: &RateValue, k: u64, cap: u64, tol: f64) -> Result<CheckResult, VerifyError> {
    let values: Vec<f64> = traj.records.iter().map(|r| r.d_step).collect();
    check_rate_on("ar", &values, rate, k, cap, tol)
}

/// `(T_n)`-asymptotic regularity: `d(x_n, T_n x_n) ≤ 1/(k+1)` from the rate on.
pub fn check_family_ar<T: Scalar>(traj: &Trajectory<T>, rate: &RateValue, k: u64, cap: u64, tol: f64) -> Result<CheckResult, VerifyError> {
    let values: Vec<f64> = traj.records.iter().map(|r| r.d_tn).collect();
    check_rate_on("family_ar", &values, rate, k, cap, tol)
}

/// `T_m`-asymptotic regularity: `d(x_n, T_m x_n) ≤ 1/(k+1)` from the rate on.
#[allow(clippy::too_many_arguments)]
pub fn check_tm_ar<T: Scalar>(
    traj: &Trajectory<T>,
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    m: u64,
    rate: &RateValue,
    k: u64,
    cap: u64,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let values = traj
        .records
        .iter()
        .map(|r| Ok(space.dist(&r.x, &family.apply(space, m, &r.x)?)?.to_f64_lossy()))
        .collect::<Result<Vec<f64>, VerifyError>>()?;
    Ok(check_rate_on("tm_ar", &values, rate, k, cap, tol)?.witness("m", m))
}

/// `∃n ≤ cap ∀i, j ∈ [n, f(n)] (d(x_i, x_j) ≤ 1/(k+1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetastabilityQuery {
    pub k: u64,
    pub f: Counterfunction,
    pub cap: u64,
}

impl MetastabilityQuery {
    pub fn new(k: u64, f: Counterfunction, cap: u64) -> Result<Self, VerifyError> {
        if cap == 0 {
            return Err(VerifyError::InvalidInput("search cap must be at least 1".into()));
        }
        Ok(Self { k, f: f.monotonized(), cap })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetastableSearch {
    pub found: Option<u64>,
    /// Some candidate window ran past the end of the trajectory and was skipped.
    pub truncated: bool,
}

/// Least `n ≤ cap` whose window `[n, f(n)] = {n, …, f(n)}` has diameter at
/// most `1/(k+1) + tol`; windows with `f(n) < n` are vacuously fine. Windows
/// reaching past the trajectory are skipped and flagged.
pub fn search_metastable<T: Scalar>(
    traj: &Trajectory<T>,
    space: &SpaceModel<T>,
    query: &MetastabilityQuery,
    tol: f64,
) -> Result<MetastableSearch, VerifyError> {
    let len = traj.records.len() as u64;
    let bound = 1.0 / (query.k + 1) as f64 + tol;
    // prefix[i] = Σ_{j<i} d(x_j, x_{j+1}); path length bounds every distance in a window
    let mut prefix = vec![0.0f64];
    for r in &traj.records {
        prefix.push(prefix.last().unwrap() + r.d_step);
    }
    let mut truncated = false;
    for n in 0..=query.cap {
        let end = match query.f.eval_capped(&RateValue::from(n), Cap(64)).to_u64() {
            Some(e) if e < n => return Ok(MetastableSearch { found: Some(n), truncated }),
            Some(e) if e < len => e,
            _ => {
                truncated = true;
                continue;
            }
        };
        if n >= len {
            truncated = true;
            continue;
        }
        if prefix[end as usize] - prefix[n as usize] <= bound || window_diameter_within(traj, space, n, end, bound)? {
            return Ok(MetastableSearch { found: Some(n), truncated });
        }
    }
    Ok(MetastableSearch { found: None, truncated })
}

fn window_diameter_within<T: Scalar>(traj: &Trajectory<T>, space: &SpaceModel<T>, from: u64, to: u64, bound: f64) -> Result<bool, VerifyError> {
    let pts = &traj.records[from as usize..=to as usize];
    // Nearby pairs are cheap and most likely to violate; test widest gaps first.
    for gap in (1..pts.len()).rev() {
        for i in 0..pts.len() - gap {
            if space.dist(&pts[i].x, &pts[i + gap].x)?.to_f64_lossy() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Searches the least metastable index and compares it with a rate of metastability.
pub fn check_mu<T: Scalar>(
    traj: &Trajectory<T>,
    space: &SpaceModel<T>,
    query: &MetastabilityQuery,
    mu: &RateValue,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let search = search_metastable(traj, space, query, tol)?;
    let mut result = CheckResult::new("metastability", HypothesisStatus::NotApplicable)
        .witness("k", query.k)
        .witness("f", query.f.to_string())
        .witness("searched_n", search.found)
        .witness("mu", mu.to_string())
        .witness("truncated", search.truncated)
        .horizon("cap", query.cap)
        .horizon("trajectory_end", traj.records.len().saturating_sub(1) as u64);
    if mu.is_astronomical() {
        return Ok(result.note("bound not informative at desk scale"));
    }
    match search.found {
        Some(n) if !mu.bounds(n) => result = result.fail(),
        Some(_) => {}
        // The bound promises a witness n ≤ μ; not finding one in a fully
        // evaluated range that contains [0, μ] refutes it.
        None if !search.truncated && mu.to_u64().is_some_and(|m| m <= query.cap) => {
            result = result.note("no metastable index up to μ").fail()
        }
        None if !search.truncated => result = result.note("no metastable index within cap"),
        None => result = result.note("search inconclusive: windows run past the trajectory"),
    }
    Ok(result)
}

fn json_point<T: Scalar>(p: &crate::geometry::Point<T>) -> Value {
    json!(p.coords_f64())
}
