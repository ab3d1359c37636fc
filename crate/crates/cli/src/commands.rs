//! The four subcommands. Each returns the exit status on completion and a
//! classified error otherwise; nothing here touches the process directly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use log::{debug, info, warn};
use serde::Serialize;
use tmlab_core::rates::{Counterfunction, RateContext, RateKind, RateValue};
use tmlab_core::verify::{check_mu, search_metastable, CheckResult, MetastabilityQuery};

use crate::config::{self, Loaded};
use crate::error::{usage_error, Classify, CliResult, Status};
use crate::suites::{run_suite, Fixture, Suite, SuiteOptions};

/// Writes to the file, or to standard output when no path is given.
fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display())).runtime()?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value).context("writing report").runtime()?;
    writeln!(out).and_then(|_| out.flush()).context("writing report").runtime()
}

fn load(path: &Path) -> CliResult<Loaded> {
    let loaded = config::load(path).usage()?;
    info!("scenario {} ({}), K = {}", loaded.scenario.name, loaded.scenario.hash(), loaded.k_bound);
    Ok(loaded)
}

// --------------------------------------------------------------------- run

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub steps: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Writes the trajectory CSV. A run that stops early writes the completed
/// records and exits with the runtime status.
pub fn run(args: &RunArgs) -> CliResult<Status> {
    let loaded = load(&args.config)?;
    let steps = args.steps.unwrap_or(loaded.steps());
    if steps == 0 {
        return Err(usage_error("--steps must be at least 1"));
    }
    let s = &loaded.scenario;
    let (traj, failure) = match s.run(steps) {
        Ok(t) => (t, None),
        Err(f) => {
            let f = *f;
            (f.partial.clone(), Some(anyhow!("{f}")))
        }
    };
    let out = output(args.out.as_deref())?;
    traj.write_csv(s.space.kind(), &s.hash(), out).context("writing trajectory").runtime()?;
    match failure {
        Some(e) => Err(e).runtime(),
        None => {
            info!("wrote {} records", traj.len());
            Ok(Status::Success)
        }
    }
}

// ------------------------------------------------------------------- rates

/// A column of the rate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Rate(RateKind),
    Mu,
    MuStar,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Rate(kind) => kind.name(),
            Column::Mu => "mu",
            Column::MuStar => "mu_star",
        }
    }

    pub fn all() -> Vec<Column> {
        RateKind::ALL.iter().map(|k| Column::Rate(*k)).chain([Column::Mu, Column::MuStar]).collect()
    }
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mu" => Ok(Column::Mu),
            "mu_star" => Ok(Column::MuStar),
            other => other.parse().map(Column::Rate).map_err(|_| {
                let names: Vec<_> = Column::all().iter().map(|c| c.name()).collect();
                format!("unknown rate {other:?} (expected one of {})", names.join(", "))
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatesArgs {
    pub config: PathBuf,
    pub k_max: u64,
    pub which: Vec<Column>,
    /// Counterfunction for the metastability columns.
    pub cf: Counterfunction,
    /// Overrides `rates.phi` from the config.
    pub phi: Option<Counterfunction>,
    /// Overrides `rates.bit_cap` from the config.
    pub bit_cap: Option<u64>,
    pub out: Option<PathBuf>,
}

fn rate_context(loaded: &Loaded, bit_cap: Option<u64>) -> CliResult<RateContext> {
    let ctx = loaded.rate_context().usage()?;
    Ok(match bit_cap {
        Some(bits) => ctx.with_cap(tmlab_core::rates::Cap(bits)),
        None => ctx,
    })
}

pub fn evaluate(ctx: &RateContext, column: Column, k: u64, f: &Counterfunction, phi: Option<&Counterfunction>) -> RateValue {
    match column {
        Column::Rate(kind) => ctx.eval(kind, k),
        Column::Mu => ctx.mu(k, f, phi),
        Column::MuStar => ctx.mu_star(k, f, phi),
    }
}

/// One row per `k ≤ k_max`; big naturals in decimal, astronomical values as `ASTRO:<expr>`.
pub fn rates(args: &RatesArgs) -> CliResult<Status> {
    if args.which.is_empty() {
        return Err(usage_error("--which needs at least one rate"));
    }
    let loaded = load(&args.config)?;
    let ctx = rate_context(&loaded, args.bit_cap)?;
    let phi = args.phi.as_ref().or(loaded.phi.as_ref());
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    let mut header = vec!["k"];
    header.extend(args.which.iter().map(|c| c.name()));
    w.write_record(&header).context("writing rates").runtime()?;
    for k in 0..=args.k_max {
        let mut row = vec![k.to_string()];
        for column in &args.which {
            let value = evaluate(&ctx, *column, k, &args.cf, phi);
            if value.is_astronomical() {
                warn!("{}({k}) exceeds the {}-bit cap", column.name(), ctx.cap().bits());
            }
            row.push(value.to_string());
        }
        w.write_record(&row).context("writing rates").runtime()?;
    }
    w.flush().context("writing rates").runtime()?;
    Ok(Status::Success)
}

// ------------------------------------------------------------------ verify

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub suite: Suite,
    pub options: SuiteOptions,
    pub report: Option<PathBuf>,
}

pub fn verify(args: &VerifyArgs) -> CliResult<Status> {
    let opts = &args.options;
    if opts.samples == 0 {
        return Err(usage_error("--samples must be at least 1"));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(usage_error("--tol must be nonnegative"));
    }
    if let Some(Fixture::BrokenCombination) = opts.fixture {
        warn!("injecting the broken-combination model into the geometry checks");
    }
    let report = run_suite(args.suite, opts).runtime()?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        warn!("FAIL {}", c.check_id);
        debug!("{} witnesses: {}", c.check_id, serde_json::Value::Object(c.witnesses.clone()));
    }
    info!("{}: {} checks, {} failed, {} with unmet hypotheses", report.suite, report.checks_total, report.checks_failed, report.hypotheses_unmet);
    write_json(args.report.as_deref(), &report)?;
    Ok(Status::from_pass(report.pass))
}

// -------------------------------------------------------------- metastable

#[derive(Debug, Clone)]
pub struct MetastableArgs {
    pub config: PathBuf,
    pub k: u64,
    pub cf: Counterfunction,
    pub cap: u64,
    pub phi: Option<Counterfunction>,
    pub steps: Option<u64>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetastableReport {
    pub scenario: String,
    pub scenario_hash: String,
    pub k: u64,
    pub f: String,
    pub cap: u64,
    pub steps: u64,
    pub phi: String,
    pub searched_n: Option<u64>,
    pub truncated: bool,
    pub mu: RateValue,
    pub mu_star: RateValue,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

/// Least metastable index of the scenario's trajectory next to `μ(k, f)` and
/// `μ*(k, f)`; passes when the index respects both bounds.
pub fn metastable(args: &MetastableArgs) -> CliResult<Status> {
    let report = metastable_report(args)?;
    info!("searched n = {:?}, mu = {}, mu_star = {}", report.searched_n, report.mu, report.mu_star);
    write_json(args.report.as_deref(), &report)?;
    Ok(Status::from_pass(report.pass))
}

pub fn metastable_report(args: &MetastableArgs) -> CliResult<MetastableReport> {
    let loaded = load(&args.config)?;
    let s = &loaded.scenario;
    let steps = args.steps.unwrap_or(loaded.steps());
    let query = MetastabilityQuery::new(args.k, args.cf.clone(), args.cap).usage()?;
    let traj = s.run(steps).map_err(|f| anyhow!("{f}")).runtime()?;
    let search = search_metastable(&traj, &s.space, &query, loaded.tol()).runtime()?;
    if search.truncated {
        warn!("windows beyond the {steps}-step trajectory were skipped; raise --steps");
    }
    let ctx = rate_context(&loaded, None)?;
    let phi = args.phi.as_ref().or(loaded.phi.as_ref());
    let mu = ctx.mu(args.k, &args.cf, phi);
    let mu_star = ctx.mu_star(args.k, &args.cf, phi);
    let checks = [("mu", &mu), ("mu_star", &mu_star)]
        .into_iter()
        .map(|(name, bound)| {
            check_mu(&traj, &s.space, &query, bound, loaded.tol()).map(|c| CheckResult { check_id: format!("metastability/{name}"), ..c })
        })
        .collect::<Result<Vec<_>, _>>()
        .runtime()?;
    Ok(MetastableReport {
        scenario: s.name.clone(),
        scenario_hash: s.hash(),
        k: args.k,
        f: args.cf.to_string(),
        cap: args.cap,
        steps,
        phi: phi.map_or_else(|| "default".to_string(), |p| p.to_string()),
        searched_n: search.found,
        truncated: search.truncated,
        pass: checks.iter().all(|c| c.pass),
        mu,
        mu_star,
        checks,
    })
}
