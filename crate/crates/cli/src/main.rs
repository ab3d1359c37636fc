use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::LevelFilter;
use tmlab::commands::{self, Column, MetastableArgs, RatesArgs, RunArgs, VerifyArgs};
use tmlab::suites::{Fixture, Suite, SuiteOptions};
use tmlab::Status;
use tmlab_core::rates::Counterfunction;

#[derive(Parser)]
#[command(name = "tmlab", version, about = "Tikhonov-Mann iteration lab: trajectories, rate tables and verification suites")]
struct Cli {
    /// Diagnostics on standard error: error, warn, info or debug
    #[arg(long, global = true, value_enum, default_value = "warn")]
    log_level: LogLevel,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Geometry,
    Schedules,
    Engine,
    Lemmas,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureArg {
    BrokenComb,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory as CSV
    Run {
        config: PathBuf,
        /// Number of steps (overrides run.steps)
        #[arg(long)]
        steps: Option<u64>,
        /// Output file (standard output when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the explicit rates for k = 0..=k-max as CSV
    Rates {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        k_max: u64,
        /// Comma-separated columns: chi, Sigma, Sigma_tilde, Sigma_star, Sigma_tilde_star, Psi, Psi_star, mu, mu_star
        #[arg(long, value_delimiter = ',', default_value = "chi,Sigma,Sigma_tilde,Sigma_star,Sigma_tilde_star,Psi,Psi_star")]
        which: Vec<Column>,
        /// Counterfunction for the mu columns
        #[arg(long, default_value = "const:0")]
        cf: Counterfunction,
        /// Override of Φ in the mu columns (overrides rates.phi)
        #[arg(long)]
        phi: Option<Counterfunction>,
        /// Bit cap for explicit values (overrides rates.bit_cap)
        #[arg(long)]
        bit_cap: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write a JSON report
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per sampled check
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = tmlab_core::verify::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, hide = true)]
        fixture: Option<FixtureArg>,
    },
    /// Search the least metastable index and compare it with the metastability rates
    Metastable {
        config: PathBuf,
        #[arg(long)]
        k: u64,
        /// Counterfunction, e.g. "id", "const:0", "affine:2,1"
        #[arg(long)]
        cf: Counterfunction,
        /// Largest index searched
        #[arg(long, default_value_t = 1000)]
        cap: u64,
        /// Override of Φ (overrides rates.phi)
        #[arg(long)]
        phi: Option<Counterfunction>,
        /// Trajectory length (overrides run.steps)
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> tmlab::CliResult<Status> {
    match command {
        Command::Run { config, steps, out } => commands::run(&RunArgs { config, steps, out }),
        Command::Rates { config, k_max, which, cf, phi, bit_cap, out } => {
            commands::rates(&RatesArgs { config, k_max, which, cf, phi, bit_cap, out })
        }
        Command::Verify { suite, seed, samples, tol, report, fixture } => {
            let suite = match suite {
                SuiteArg::Geometry => Suite::Geometry,
                SuiteArg::Schedules => Suite::Schedules,
                SuiteArg::Engine => Suite::Engine,
                SuiteArg::Lemmas => Suite::Lemmas,
                SuiteArg::All => Suite::All,
            };
            let fixture = fixture.map(|FixtureArg::BrokenComb| Fixture::BrokenCombination);
            commands::verify(&VerifyArgs { suite, options: SuiteOptions { seed, samples, tol, fixture }, report })
        }
        Command::Metastable { config, k, cf, cap, phi, steps, report } => {
            commands::metastable(&MetastableArgs { config, k, cf, cap, phi, steps, report })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage.code() } else { 0 });
        }
    };
    let level = match cli.log_level {
        LogLevel::Error => LevelFilter::Error,
        LogLevel::Warn => LevelFilter::Warn,
        LogLevel::Info => LevelFilter::Info,
        LogLevel::Debug => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).target(env_logger::Target::Stderr).init();
    match dispatch(cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
