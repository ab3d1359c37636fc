//! Scenario configuration files.
//!
//! A config is TOML; dotted keys (`space.kind = "disk"`) and tables
//! (`[space]` / `kind = "disk"`) are interchangeable. Unknown keys are
//! rejected so that typos surface with their line and column.
//!
//! ```toml
//! space.kind = "euclidean"
//! space.dim = 2
//! family.kind = "proximal"
//! family.center = [0.2, 0.1]
//! schedule.preset = "harmonic"
//! run.steps = 1000
//! run.u = [0.6, -0.3]
//! run.x0 = [1.5, 2.0]
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::Deserialize;
use tmlab_core::geometry::{ModelKind, Point, SpaceModel};
use tmlab_core::mappings::{ConvexFunction, MappingFamily, SingleMap, RESOLVENT_MAX_ITER, RESOLVENT_TOL};
use tmlab_core::rates::{Cap, Counterfunction, RateContext, DEFAULT_CAP_BITS};
use tmlab_core::schedules::{preset, BundleSpec, ScheduleBundle, Sequence};
use tmlab_core::verify::DEFAULT_TOL;
use tmlab_core::{Point64, Scenario64, SpaceModel64};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub space: SpaceConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// `euclidean`, `disk` or `tripod`.
    pub kind: String,
    /// Dimension of the Euclidean model.
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// `identity`, `rotation`, `projection`, `proximal` or `resolvent`.
    pub kind: String,
    pub angle: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    /// Proximal families: `half-squared-norm` (default) or `ball-indicator`.
    pub function: Option<String>,
    /// Resolvent families: `identity`, `rotation` or `projection`.
    pub base: Option<String>,
    /// Step sizes; defaults to the schedule's γ.
    pub gamma: Option<String>,
    pub inner_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// A preset plus optional per-field overrides (sequence and counterfunction literals).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_preset")]
    pub preset: String,
    pub lambda: Option<String>,
    pub beta: Option<String>,
    pub gamma: Option<String>,
    pub sigma: Option<String>,
    pub sigma_star: Option<String>,
    pub chi_beta: Option<String>,
    pub chi_lambda: Option<String>,
    pub chi_gamma: Option<String>,
    pub eta: Option<String>,
    pub b: Option<String>,
    pub lambda_bound: Option<u64>,
    pub n_lambda: Option<u64>,
    pub gamma_bound: Option<u64>,
    pub n_gamma: Option<u64>,
    pub g_bound: Option<u64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        toml::from_str("").expect("every schedule field has a default")
    }
}

fn default_preset() -> String {
    "harmonic".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub steps: u64,
    /// Anchor point `u`.
    pub u: Vec<f64>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    /// Override of `K`; must be at least `⌈M⌉`.
    pub k_bound: Option<u64>,
    #[serde(default = "default_bit_cap")]
    pub bit_cap: u64,
    /// Override of `Φ` in the metastability rates.
    pub phi: Option<String>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self { k_bound: None, bit_cap: DEFAULT_CAP_BITS, phi: None }
    }
}

fn default_bit_cap() -> u64 {
    DEFAULT_CAP_BITS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_tol")]
    pub check: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { check: DEFAULT_TOL }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// A validated configuration: the scenario plus everything needed for rates.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ScenarioConfig,
    pub scenario: Scenario64,
    pub k_bound: u64,
    pub cap: Cap,
    pub phi: Option<Counterfunction>,
}

impl Loaded {
    pub fn rate_context(&self) -> Result<RateContext> {
        Ok(RateContext::new(self.scenario.bundle.clone(), self.k_bound, self.scenario.family.chi_t(), self.cap)?)
    }

    pub fn steps(&self) -> u64 {
        self.config.run.steps
    }

    pub fn tol(&self) -> f64 {
        self.config.tolerances.check
    }
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let fallback = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse(&text, &fallback).with_context(|| format!("invalid config {}", path.display()))
}

/// Parses and validates a config; `fallback_name` names scenarios without a `name` key.
pub fn parse(text: &str, fallback_name: &str) -> Result<Loaded> {
    let config: ScenarioConfig = toml::from_str(text)?;
    ensure!(config.run.steps >= 1, "run.steps: must be at least 1");
    ensure!(config.rates.bit_cap >= 1, "rates.bit_cap: must be at least 1");
    ensure!(config.tolerances.check >= 0.0, "tolerances.check: must be nonnegative");
    let space = space(&config.space)?;
    let bundle = bundle(&config.schedule)?;
    let family = family(&config.family, &space, &bundle)?;
    family.validate(&space).context("family")?;
    let anchor = point(&space, &config.run.u).context("run.u")?;
    let x0 = point(&space, &config.run.x0).context("run.x0")?;
    let scenario = Scenario64 {
        name: config.name.clone().unwrap_or_else(|| fallback_name.to_string()),
        space,
        family,
        bundle,
        anchor,
        x0,
    };
    let bounds = scenario.bounds()?;
    let k_bound = match config.rates.k_bound {
        Some(k) if k < bounds.k => bail!("rates.k_bound: {k} is below ⌈M⌉ = {} (M = {})", bounds.k, bounds.m),
        Some(k) => k,
        None => bounds.k,
    };
    let phi = config.rates.phi.as_deref().map(str::parse).transpose().map_err(|e| anyhow!("rates.phi: {e}"))?;
    let cap = Cap(config.rates.bit_cap);
    Ok(Loaded { config, scenario, k_bound, cap, phi })
}

fn space(c: &SpaceConfig) -> Result<SpaceModel64> {
    match c.kind.as_str() {
        "euclidean" => Ok(SpaceModel::euclidean(c.dim.unwrap_or(2)).context("space.dim")?),
        "disk" | "poincare-disk" => {
            ensure!(c.dim.is_none(), "space.dim: only meaningful for the euclidean model");
            Ok(SpaceModel::poincare_disk())
        }
        "tripod" => {
            ensure!(c.dim.is_none(), "space.dim: only meaningful for the euclidean model");
            Ok(SpaceModel::tripod())
        }
        other => bail!("space.kind: unknown model {other:?} (expected euclidean, disk or tripod)"),
    }
}

/// Coordinates by model: Euclidean `[x₁, …, x_d]`, disk `[a, b]`, tripod `[leg, length]`.
pub fn point(space: &SpaceModel64, coords: &[f64]) -> Result<Point64> {
    let p = match space.kind() {
        ModelKind::Euclidean(d) => {
            ensure!(coords.len() == d, "expected {d} coordinates, got {}", coords.len());
            Point::euclidean(coords.to_vec())
        }
        ModelKind::PoincareDisk => {
            let [a, b] = coords else { bail!("a disk point is [a, b], got {} values", coords.len()) };
            Point::disk(*a, *b)?
        }
        ModelKind::Tripod => {
            let [leg, len] = coords else { bail!("a tripod point is [leg, length], got {} values", coords.len()) };
            ensure!(leg.fract() == 0.0 && (0.0..=2.0).contains(leg), "tripod leg must be 0, 1 or 2, got {leg}");
            Point::tripod(*leg as u8, *len)?
        }
    };
    space.validate(&p)?;
    Ok(p)
}

fn family(c: &FamilyConfig, space: &SpaceModel64, bundle: &ScheduleBundle) -> Result<MappingFamily<f64>> {
    let center = || -> Result<Point64> {
        let coords = c.center.as_ref().ok_or_else(|| anyhow!("family.center: required for {}", c.kind))?;
        point(space, coords).context("family.center")
    };
    let radius = || c.radius.ok_or_else(|| anyhow!("family.radius: required for {}", c.kind));
    let angle = || c.angle.ok_or_else(|| anyhow!("family.angle: required for {}", c.kind));
    let gamma = || -> Result<Sequence> {
        match &c.gamma {
            Some(s) => s.parse().map_err(|e| anyhow!("family.gamma: {e}")),
            None => Ok(bundle.gamma_sequence().clone()),
        }
    };
    let family = match c.kind.as_str() {
        "identity" => MappingFamily::Identity,
        "rotation" => MappingFamily::Rotation { angle: angle()? },
        "projection" => MappingFamily::MetricProjection { center: center()?, radius: radius()? },
        "proximal" => {
            let function = match c.function.as_deref().unwrap_or("half-squared-norm") {
                "half-squared-norm" => ConvexFunction::HalfSquaredNorm { center: center()? },
                "ball-indicator" => ConvexFunction::IndicatorOfBall { center: center()?, radius: radius()? },
                other => bail!("family.function: unknown function {other:?}"),
            };
            MappingFamily::Proximal { function, gamma: gamma()? }
        }
        "resolvent" => {
            let base = match c.base.as_deref().unwrap_or("rotation") {
                "identity" => SingleMap::Identity,
                "rotation" => SingleMap::Rotation { angle: angle()? },
                "projection" => SingleMap::BallProjection { center: center()?, radius: radius()? },
                other => bail!("family.base: unknown map {other:?}"),
            };
            MappingFamily::Resolvent {
                base,
                gamma: gamma()?,
                inner_tol: c.inner_tol.unwrap_or(RESOLVENT_TOL),
                max_iter: c.max_iter.unwrap_or(RESOLVENT_MAX_ITER),
            }
        }
        other => bail!("family.kind: unknown family {other:?} (expected identity, rotation, projection, proximal or resolvent)"),
    };
    Ok(family)
}

fn bundle(c: &ScheduleConfig) -> Result<ScheduleBundle> {
    let base = preset(&c.preset).with_context(|| format!("schedule.preset: {:?}", c.preset))?;
    let overridden = *c != ScheduleConfig { preset: c.preset.clone(), ..Default::default() };
    let mut errors = Vec::new();
    let bundle = base.with_spec(|spec: &mut BundleSpec| {
        let mut seq = |field: &str, value: &Option<String>, slot: &mut Sequence| {
            if let Some(v) = value {
                match v.parse() {
                    Ok(s) => *slot = s,
                    Err(e) => errors.push(format!("schedule.{field}: {e}")),
                }
            }
        };
        seq("lambda", &c.lambda, &mut spec.lambda);
        seq("beta", &c.beta, &mut spec.beta);
        seq("gamma", &c.gamma, &mut spec.gamma);
        let mut cf = |field: &str, value: &Option<String>, slot: &mut Counterfunction| {
            if let Some(v) = value {
                match v.parse() {
                    Ok(f) => *slot = f,
                    Err(e) => errors.push(format!("schedule.{field}: {e}")),
                }
            }
        };
        cf("sigma", &c.sigma, &mut spec.sigma);
        cf("chi_beta", &c.chi_beta, &mut spec.chi_beta);
        cf("chi_lambda", &c.chi_lambda, &mut spec.chi_lambda);
        cf("chi_gamma", &c.chi_gamma, &mut spec.chi_gamma);
        cf("eta", &c.eta, &mut spec.eta);
        cf("b", &c.b, &mut spec.b);
        if let Some(v) = &c.sigma_star {
            match v.parse() {
                Ok(f) => spec.sigma_star = f,
                Err(e) => errors.push(format!("schedule.sigma_star: {e}")),
            }
        }
        let nat = |value: Option<u64>, slot: &mut u64| *slot = value.unwrap_or(*slot);
        nat(c.lambda_bound, &mut spec.lambda_bound);
        nat(c.n_lambda, &mut spec.n_lambda);
        nat(c.gamma_bound, &mut spec.gamma_bound);
        nat(c.n_gamma, &mut spec.n_gamma);
        nat(c.g_bound, &mut spec.g_bound);
        if overridden {
            spec.name = format!("{}+overrides", spec.name);
        }
    });
    if !errors.is_empty() {
        bail!(errors.join("; "));
    }
    Ok(bundle?)
}
