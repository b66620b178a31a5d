use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use atc_core::experiment::{compare, run_scheme, sweep_grid};
use atc_core::optimizer::{OptimizerSettings, Scheme};
use atc_core::scenario::{load_scenario, BASELINE_CFG};
use atc_core::sim_oracle::oracle_grid;
use atc_core::Scenario;

mod output;
mod plot;
mod tables;

use output::{Manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "atc", version, about = "Continuous-approximation design of trunk transit with adaptive feeders")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Scenario file (TOML). The built-in baseline is used when omitted.
    #[arg(long, global = true, env = "ATC_SCENARIO")]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "ATC_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ATC_THREADS")]
    threads: Option<usize>,
    /// Seed for the multistart solver and the oracle.
    #[arg(long, global = true, env = "ATC_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize one scheme.
    Optimize {
        #[arg(long, env = "ATC_SCHEME", default_value = "ADAPTIVE")]
        scheme: Scheme,
    },
    /// Optimize all three schemes and compare Adaptive against the other two.
    Compare,
    /// Daily gains of Adaptive over MRT_FRF across city radii and values of time.
    Sweep {
        #[arg(long, env = "ATC_RADII", value_delimiter = ',', default_value = "10,15,20,25,30,35,40")]
        radii: Vec<f64>,
        #[arg(long, env = "ATC_VOTS", value_delimiter = ',', default_value = "10,15,20")]
        vots: Vec<f64>,
    },
    /// Compare closed-form feeder cycles with the Monte-Carlo simulator.
    Oracle {
        #[arg(long, env = "ATC_TRIALS", default_value_t = 10_000)]
        trials: usize,
    },
    /// Turn a finished run directory into long-format plot series.
    Plotdata,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Optimize { .. } => "optimize",
            Command::Compare => "compare",
            Command::Sweep { .. } => "sweep",
            Command::Oracle { .. } => "oracle",
            Command::Plotdata => "plotdata",
        }
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

fn classify(error: anyhow::Error) -> Failure {
    use atc_core::Error as E;
    let code = match error.downcast_ref::<E>() {
        Some(E::Parse(_) | E::InvalidParam { .. } | E::UnknownPeriod(_) | E::InvalidInput(_) | E::OutOfDomain { .. }) => EXIT_CONFIG,
        Some(E::Infeasible { .. } | E::SweepExhausted(_) | E::NoStopFits { .. }) => EXIT_INFEASIBLE,
        _ if error.downcast_ref::<ConfigError>().is_some() => EXIT_CONFIG,
        _ => 1,
    };
    Failure { code, error }
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

struct Loaded {
    params: Scenario,
    settings: OptimizerSettings,
}

fn load(common: &Common) -> anyhow::Result<Loaded> {
    let source = match &common.scenario {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read scenario {}: {e}", path.display())))?,
        None => BASELINE_CFG.to_string(),
    };
    let params = load_scenario(&source)?;
    let mut settings = OptimizerSettings::from_config(&source)?;
    if let Some(seed) = common.seed {
        settings.seed = seed;
    }
    Ok(Loaded { params, settings })
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ATC_LOG", "info"))
        .format(|buf, record| writeln!(buf, "level={} {}", record.level().as_str().to_lowercase(), record.args()))
        .target(env_logger::Target::Stderr)
        .init();
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| classify(e.into()))?;
    }
    let name = cli.command.name();
    if let Command::Plotdata = cli.command {
        return plot::run(&cli.common.out).map_err(classify);
    }
    let loaded = load(&cli.common).map_err(classify)?;
    let out = OutputDir::create(&cli.common.out).map_err(classify)?;
    let mut manifest = Manifest::new(name, &cli.common, &loaded.params, &loaded.settings).map_err(classify)?;
    match &cli.command {
        Command::Optimize { scheme } => manifest.set("scheme", scheme.label()),
        Command::Sweep { radii, vots } => {
            manifest.set("radii", &join(radii));
            manifest.set("vots", &join(vots));
        }
        Command::Oracle { trials } => manifest.set("trials", &trials.to_string()),
        Command::Compare | Command::Plotdata => {}
    }
    manifest.write(&out).map_err(classify)?;
    log::info!("command={name} out={} seed={}", out.path().display(), loaded.settings.seed);

    match cli.command {
        Command::Optimize { scheme } => {
            let result = run_scheme(&loaded.params, &loaded.settings, scheme).map_err(|e| classify(e.into()))?;
            tables::write_scheme_outputs(&out, &loaded.params, std::slice::from_ref(&result)).map_err(classify)?;
            log::info!("command=optimize scheme={scheme} z24h={} violations={}", result.z_24h, result.violations.len());
        }
        Command::Compare => {
            let cmp = compare(&loaded.params, &loaded.settings).map_err(|e| classify(e.into()))?;
            tables::write_scheme_outputs(&out, &loaded.params, &cmp.results).map_err(classify)?;
            tables::write_gains(&out, &cmp).map_err(classify)?;
            for g in cmp.gains.iter().filter(|g| g.period == atc_core::experiment::DAILY) {
                log::info!("command=compare reference={} total_gain={} agency_gain={} user_gain={}", g.reference, g.total, g.agency, g.user);
            }
        }
        Command::Sweep { radii, vots } => {
            let cells = sweep_grid(&loaded.params, &loaded.settings, &radii, &vots);
            tables::write_sweep(&out, &cells).map_err(classify)?;
            let failed = cells.iter().filter(|c| !c.ok()).count();
            if failed > 0 {
                return Err(Failure {
                    code: EXIT_PARTIAL,
                    error: anyhow::anyhow!("{failed} of {} sweep cells failed; see sweep.csv", cells.len()),
                });
            }
        }
        Command::Oracle { trials } => {
            let rows = oracle_grid(&loaded.params, trials, loaded.settings.seed).map_err(|e| classify(e.into()))?;
            tables::write_oracle(&out, &rows).map_err(classify)?;
        }
        Command::Plotdata => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    init_logging();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Reads a file produced by an earlier run, as a config error when it is missing.
pub(crate) fn read_input(dir: &Path, name: &str) -> anyhow::Result<String> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(ConfigError(format!("missing input {}", path.display())).into());
    }
    std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}
