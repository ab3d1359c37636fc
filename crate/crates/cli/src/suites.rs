//! Verification suites over the shipped scenario matrix. Each building block
//! takes its horizons explicitly so that callers can scale them; the suite
//! runners use desk-scale defaults.

use std::thread;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::json;
use tmlab_core::engine::check_hilbert_special_case;
use tmlab_core::geometry::fixtures::BrokenCombination;
use tmlab_core::geometry::{
    check_cn, check_quasilin_axioms, check_uniform_convexity, check_w_axioms, AxiomReport, GeodesicSpace, GeometryError,
    SampleSpec, Sampler, SpaceModel,
};
use tmlab_core::mappings::{check_condition_c1, check_nonexpansive, MappingFamily, MappingReport};
use tmlab_core::rates::{BiCounterfunction, Cap, Counterfunction};
use tmlab_core::scenarios::{identity_line, matrix, matrix_scenario};
use tmlab_core::schedules::{audit_schedule, preset, PRESET_NAMES};
use tmlab_core::verify::{
    check_ar, check_chi_t, check_convex_afp, check_family_ar, check_mu, check_recursive_inequalities, check_variational,
    check_xu_lemma, search_metastable, unit_grid, CheckResult, HypothesisStatus, MetastabilityQuery, XuInstance, XuVariant,
    DEFAULT_T_GRID,
};
use tmlab_core::{Point64, Scenario64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Schedules,
    Engine,
    Lemmas,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Schedules => "schedules",
            Suite::Engine => "engine",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        }
    }
}

/// Deliberately broken models injected to exercise failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    BrokenCombination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub fixture: Option<Fixture>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 1000, tol: tmlab_core::verify::DEFAULT_TOL, fixture: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
    pub checks_total: usize,
    pub checks_failed: usize,
    pub hypotheses_unmet: usize,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(suite: Suite, opts: &SuiteOptions, checks: Vec<CheckResult>) -> Self {
        Self {
            suite: suite.name().into(),
            seed: opts.seed,
            samples: opts.samples,
            tol: opts.tol,
            pass: checks.iter().all(|c| c.pass),
            checks_total: checks.len(),
            checks_failed: checks.iter().filter(|c| !c.pass).count(),
            hypotheses_unmet: checks.iter().filter(|c| c.hypothesis_status == HypothesisStatus::Unmet).count(),
            checks,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Report> {
    let checks = match suite {
        Suite::Geometry => geometry(opts)?,
        Suite::Schedules => schedules(opts),
        Suite::Engine => engine(opts)?,
        Suite::Lemmas => lemmas(opts)?,
        Suite::All => {
            let mut all = geometry(opts)?;
            all.extend(schedules(opts));
            all.extend(engine(opts)?);
            all.extend(lemmas(opts)?);
            all
        }
    };
    Ok(Report::new(suite, opts, checks))
}

/// Runs `jobs` on scoped threads and returns their results in input order.
fn parallel<I: Sync, O: Send>(items: &[I], job: impl Fn(&I) -> O + Sync) -> Vec<O> {
    thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|item| s.spawn(|| job(item))).collect();
        handles.into_iter().map(|h| h.join().expect("suite worker panicked")).collect()
    })
}

fn from_axiom(prefix: &str, r: AxiomReport) -> CheckResult {
    let mut c = CheckResult::new(format!("{prefix}/{}", r.axiom), HypothesisStatus::NotApplicable)
        .witness("max_violation", r.max_violation)
        .witness("worst_case_inputs", &r.worst_case_inputs)
        .horizon("samples", r.samples as u64);
    if !r.pass {
        c = c.fail();
    }
    c
}

fn from_mapping(prefix: &str, r: MappingReport) -> CheckResult {
    let ratio = r.max_lipschitz_ratio;
    let n_max = r.n_max;
    let mut c = from_axiom(prefix, r.report).horizon("n_max", n_max);
    if let Some(ratio) = ratio {
        c = c.witness("max_lipschitz_ratio", ratio);
    }
    c
}

// ---------------------------------------------------------------- geometry

/// The metric axioms on one model: (W1)–(W4), CN⁻/CN⁺ (plus CN⁻ equality on
/// Hilbert models), uniform convexity and the quasilinearization properties.
pub fn geometry_axioms<S: GeodesicSpace<f64>>(space: &S, spec: &SampleSpec, tol: f64) -> Result<Vec<CheckResult>, GeometryError> {
    let prefix = format!("geometry/{}", space.label());
    let mut reports = check_w_axioms(space, spec, tol)?;
    reports.extend(check_cn(space, spec, tol)?);
    reports.extend(check_uniform_convexity(space, spec, tol)?);
    reports.extend(check_quasilin_axioms(space, spec, tol)?);
    Ok(reports.into_iter().map(|r| from_axiom(&prefix, r)).collect())
}

/// The three shipped models plus a three-dimensional Euclidean one.
pub fn geometry_models() -> Vec<SpaceModel<f64>> {
    vec![
        SpaceModel::euclidean(2).expect("dimension 2"),
        SpaceModel::euclidean(3).expect("dimension 3"),
        SpaceModel::poincare_disk(),
        SpaceModel::tripod(),
    ]
}

fn geometry(opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let spec = SampleSpec::new(opts.seed, opts.samples, 2.0)?;
    let mut checks: Vec<CheckResult> = parallel(&geometry_models(), |m| geometry_axioms(m, &spec, opts.tol))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    if opts.fixture == Some(Fixture::BrokenCombination) {
        checks.extend(geometry_axioms(&BrokenCombination::new(2)?, &spec, opts.tol)?);
    }
    Ok(checks)
}

// --------------------------------------------------------------- schedules

pub const SCHEDULE_HORIZON: u64 = 10_000;

fn schedules(opts: &SuiteOptions) -> Vec<CheckResult> {
    PRESET_NAMES
        .iter()
        .map(|name| audit_schedule(&preset(name).expect("shipped preset"), SCHEDULE_HORIZON, opts.tol))
        .flat_map(|report| {
            let bundle = report.bundle.clone();
            report.conditions.into_iter().map(move |c| {
                let mut r = CheckResult::new(format!("schedules/{bundle}/{}", c.condition_id), HypothesisStatus::NotApplicable)
                    .horizon("horizon", c.horizon)
                    .witness("first_violation", &c.first_violation);
                if !c.pass {
                    r = r.fail();
                }
                r
            })
        })
        .collect()
}

// ------------------------------------------------------------------ engine

/// `x_n = 1/(n+1)` on the identity line for `n ≤ steps`.
pub fn identity_closed_form(steps: u64, tol: f64) -> Result<CheckResult> {
    let traj = identity_line().run(steps).map_err(|e| anyhow!("{e}"))?;
    let (mut worst, mut worst_n) = (0.0f64, 0u64);
    for r in &traj.records {
        let dev = (r.x.coords_f64()[0] - 1.0 / (r.n as f64 + 1.0)).abs();
        if dev > worst {
            (worst, worst_n) = (dev, r.n);
        }
    }
    let mut c = CheckResult::new("engine/identity_closed_form", HypothesisStatus::NotApplicable)
        .witness("max_deviation", worst)
        .witness("worst_n", worst_n)
        .horizon("steps", steps);
    if worst > tol {
        c = c.fail();
    }
    Ok(c)
}

/// The anchored iteration with `u = 0` against its Hilbert-space form for the
/// identity, rotation and proximal families on the Euclidean plane.
pub fn hilbert_cross_checks(steps: u64, tol: f64) -> Result<Vec<CheckResult>> {
    ["identity", "rotation", "proximal"]
        .iter()
        .map(|f| {
            let s = matrix_scenario("euclidean", f).expect("shipped scenario");
            let r = check_hilbert_special_case(&s.space, &s.family, &s.bundle, &s.x0, steps, tol)?;
            Ok(from_axiom(&format!("engine/{}", s.name), r).with_scenario(s.hash()))
        })
        .collect()
}

/// Nonexpansiveness of every family, condition (C1) for the γ-indexed ones,
/// and `d(x_n, p) ≤ M` along a run of every scenario.
pub fn matrix_engine_checks(spec: &SampleSpec, steps: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let per_scenario = parallel(&matrix(), |s| -> Result<Vec<CheckResult>> {
        let prefix = format!("engine/{}", s.name);
        let mut out = vec![from_mapping(&prefix, check_nonexpansive(&s.family, &s.space, 20, spec, tol)?).with_scenario(s.hash())];
        if let Some(gamma) = s.family.gamma() {
            out.push(from_mapping(&prefix, check_condition_c1(&s.family, &s.space, gamma, 20, spec, tol)?).with_scenario(s.hash()));
        }
        let traj = s.run(steps).map_err(|e| anyhow!("{e}"))?;
        let m = s.bounds()?.m;
        let max_dp = traj.records.iter().map(|r| r.d_p).fold(0.0, f64::max);
        let mut bounded = CheckResult::new(format!("{prefix}/bounded_by_M"), HypothesisStatus::NotApplicable)
            .with_scenario(s.hash())
            .witness("max_d_p", max_dp)
            .witness("M", m)
            .horizon("steps", steps);
        if max_dp > m + tol {
            bounded = bounded.fail();
        }
        out.push(bounded);
        Ok(out)
    });
    Ok(per_scenario.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn engine(opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut checks = vec![identity_closed_form(1000, 1e-12)?];
    checks.extend(hilbert_cross_checks(100, 1e-10)?);
    let spec = SampleSpec::new(opts.seed, opts.samples.min(2000), 2.0)?;
    checks.extend(matrix_engine_checks(&spec, 1000, opts.tol)?);
    Ok(checks)
}

// ------------------------------------------------------------------ lemmas

fn tagged(c: CheckResult, s: &Scenario64) -> CheckResult {
    let id = format!("{}/{}", s.name, c.check_id);
    CheckResult { check_id: id, ..c }.with_scenario(s.hash())
}

/// AR rate `Σ*` for `d(x_n, x_{n+1})` and `Σ̃*` for `d(x_n, T_n x_n)`, k ≤ `k_max`,
/// suffix checked on `[min(rate, horizon), horizon]`.
pub fn ar_rate_checks(s: &Scenario64, horizon: u64, k_max: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let traj = s.run(horizon).map_err(|e| anyhow!("{e}"))?;
    let ctx = s.rate_context(Cap::default())?;
    let mut out = Vec::new();
    for k in 0..=k_max {
        out.push(tagged(check_ar(&traj, &ctx.sigma_star(k), k, horizon, tol)?, s));
        out.push(tagged(check_family_ar(&traj, &ctx.sigma_tilde_star(k), k, horizon, tol)?, s));
    }
    Ok(out)
}

/// Parts (i)–(iii) of the recursive inequalities at the fixed point and at
/// `points` random reference points.
pub fn recursive_inequality_checks(s: &Scenario64, steps: u64, points: usize, seed: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let traj = s.run(steps).map_err(|e| anyhow!("{e}"))?;
    let mut rng = Sampler::new(seed, &format!("recursive/{}", s.name));
    let mut refs = vec![s.fixed_point(), s.anchor.clone()];
    refs.extend((0..points).map(|_| s.space.sample_point(&mut rng, 2.0)));
    refs.iter()
        .map(|x| Ok(tagged(check_recursive_inequalities(&traj, &s.space, &s.family, &s.bundle, x, tol)?.witness("x", x.to_json()), s)))
        .collect()
}

/// Cauchy-modulus claim of `χ_T` on `Σ d(T_{n+1}u_n, T_n u_n)` for k ≤ `k_max`.
pub fn chi_t_check(s: &Scenario64, horizon: u64, k_max: u64, tol: f64) -> Result<CheckResult> {
    let traj = s.run(horizon).map_err(|e| anyhow!("{e}"))?;
    let ctx = s.rate_context(Cap::default())?;
    Ok(tagged(check_chi_t(&traj, &s.space, &s.family, &|k| ctx.chi_t_at(k), k_max, tol)?, s))
}

/// Metastability: least metastable index vs `μ*(k, f)` (and `μ(k, f)`).
pub fn metastability_checks(
    s: &Scenario64,
    steps: u64,
    k_max: u64,
    fs: &[Counterfunction],
    search_cap: u64,
    rate_cap: Cap,
    tol: f64,
) -> Result<Vec<CheckResult>> {
    let traj = s.run(steps).map_err(|e| anyhow!("{e}"))?;
    let ctx = s.rate_context(rate_cap)?;
    let mut out = Vec::new();
    for k in 0..=k_max {
        for f in fs {
            let q = MetastabilityQuery::new(k, f.clone(), search_cap)?;
            out.push(tagged(check_mu(&traj, &s.space, &q, &ctx.mu_star(k, f, None), tol)?.witness("rate", "mu_star"), s));
            out.push(tagged(check_mu(&traj, &s.space, &q, &ctx.mu(k, f, None), tol)?.witness("rate", "mu"), s));
        }
    }
    Ok(out)
}

/// Telescoping instance `s_n = 1/(n+1)` for `k ≤ k_max` with the product
/// modulus, plus `random` generated instances.
pub fn xu_checks(k_max: u64, q: u64, random: u64, seed: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let sigma_star: BiCounterfunction = "prod(affine:1,1,affine:1,1)".parse().expect("literal");
    let sigma: Counterfunction = "cexp:2".parse().expect("literal");
    let telescoping = XuInstance::from_recurrence(1.0, q as usize + 1, 1, |n| 1.0 / (n as f64 + 2.0), |_| 0.0, |_| 0.0)?;
    let mut out = Vec::new();
    for k in 0..=k_max {
        let c = check_xu_lemma(&telescoping, XuVariant::Product(&sigma_star), k, 0, q, tol)?;
        out.push(CheckResult { check_id: format!("xu/telescoping/{}", c.check_id), ..c });
    }
    let mut rng = Sampler::new(seed, "xu/random");
    for i in 0..random {
        let k = i % 6;
        let bound = 1 + i % 3;
        let inst = XuInstance::random(&mut rng, k, q, bound)?;
        let n = i % 4;
        for variant in [XuVariant::Product(&sigma_star), XuVariant::Divergence(&sigma)] {
            let c = check_xu_lemma(&inst, variant, k, n, q, tol)?.witness("instance", i).witness("S", bound);
            out.push(CheckResult { check_id: format!("xu/random/{}", c.check_id), ..c });
        }
    }
    Ok(out)
}

/// The approximate-fixed-point lemmas: the convex-combination lemma at the
/// fixed point and near it, and the variational lemma at metric projections
/// onto a ball with random second points inside the ball.
pub fn afp_lemma_checks(s: &Scenario64, samples: usize, seed: u64, tol: f64) -> Result<Vec<CheckResult>> {
    let grid = unit_grid(DEFAULT_T_GRID);
    let p = s.fixed_point();
    let k_bound = s.bounds()?.k;
    let mut out = vec![tagged(check_convex_afp(&s.space, &s.family, &p, &p, &p, k_bound, 3, 20, &grid, tol)?, s)];
    let mut rng = Sampler::new(seed, &format!("afp/{}", s.name));
    // points this close to p are approximate fixed points of every family
    let near = 1.0 / (8.0 * 24.0 * (k_bound * k_bound) as f64);
    for _ in 0..samples {
        let v1 = toward(s, &p, &s.space.sample_point(&mut rng, 2.0), near)?;
        let v2 = toward(s, &p, &s.space.sample_point(&mut rng, 2.0), near)?;
        out.push(tagged(check_convex_afp(&s.space, &s.family, &v1, &v2, &p, k_bound, 0, 20, &grid, tol)?, s));
    }
    if let MappingFamily::MetricProjection { center, radius } = &s.family {
        let projection = MappingFamily::MetricProjection { center: center.clone(), radius: *radius };
        let x = projection.apply(&s.space, 0, &s.anchor)?;
        for _ in 0..samples {
            let y = projection.apply(&s.space, 0, &s.space.sample_point(&mut rng, 2.0))?;
            for k in [0u64, 3, 10] {
                out.push(tagged(check_variational(&s.space, &x, &y, &s.anchor, &p, k_bound, k, &grid, tol)?, s));
            }
        }
    }
    Ok(out)
}

/// The point at distance at most `dist` from `p` on the geodesic towards `q`.
fn toward(s: &Scenario64, p: &Point64, q: &Point64, dist: f64) -> Result<Point64> {
    let d = s.space.dist(p, q)?;
    if d <= dist {
        return Ok(q.clone());
    }
    Ok(s.space.comb(p, q, dist / d)?)
}

/// Finds `n` for every query; `search_metastable` never errors for a trajectory
/// of at least one record.
pub fn metastable_index(s: &Scenario64, steps: u64, k: u64, f: &Counterfunction, cap: u64, tol: f64) -> Result<Option<u64>> {
    let traj = s.run(steps).map_err(|e| anyhow!("{e}"))?;
    let q = MetastabilityQuery::new(k, f.clone(), cap)?;
    Ok(search_metastable(&traj, &s.space, &q, tol)?.found)
}

fn lemmas(opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let scenarios = matrix();
    let fs: Vec<Counterfunction> = ["const:0", "id", "affine:2,0"].iter().map(|f| f.parse().expect("literal")).collect();
    let per_scenario = parallel(&scenarios, |s| -> Result<Vec<CheckResult>> {
        let mut out = ar_rate_checks(s, 10_000, 5, opts.tol).with_context(|| format!("{}: rates", s.name))?;
        out.extend(recursive_inequality_checks(s, 1000, 10, opts.seed, opts.tol)?);
        out.extend(afp_lemma_checks(s, 20, opts.seed, opts.tol)?);
        if s.family.depends_on_n() {
            out.push(chi_t_check(s, 10_000, 20, 1e-8)?);
        }
        out.extend(metastability_checks(s, 2000, 3, &fs, 1000, Cap(1 << 12), opts.tol)?);
        Ok(out)
    });
    let mut checks: Vec<CheckResult> = per_scenario.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    checks.extend(xu_checks(50, 1000, 100, opts.seed, opts.tol)?);
    checks.push(
        CheckResult::new("lemmas/summary", HypothesisStatus::NotApplicable)
            .witness("scenarios", json!(scenarios.iter().map(|s| &s.name).collect::<Vec<_>>()))
            .note("metastability bounds with the default Φ are astronomical: informative only as a soundness regression"),
    );
    Ok(checks)
}
