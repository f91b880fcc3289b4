//! Command-line interface: configuration schema, subcommand dispatch, and
//! file-based outputs.
//!
//! Every command is deterministic given its configuration and seed. Reports
//! land under `<out>/<command>/<config-hash>/`, with the configuration hash
//! and master seed embedded in the file names. Exit codes: 0 success,
//! 2 configuration or precondition error, 3 data error, 4 envelope violation
//! under `--strict`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classfn::{self, BoundaryFamily, ClassFunction, DecayFunction};
use crate::error::{Error, Result};
use crate::expfam;
use crate::mle;
use crate::montecarlo::{self, ExperimentConfig, ModelSpec};
use crate::qsim::{self, ObservationWindow, StoppingRule};
use crate::report;
use crate::rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_ENVELOPE: i32 = 4;

/// Output formats for experiment reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// The configuration file schema: the experiment keys plus output location,
/// formats, and parallelism. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub arrival: ModelSpec,
    pub service: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<StoppingRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<Vec<f64>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub class_functions: Vec<ClassFunction>,
    #[serde(default = "default_epsilon")]
    pub epsilon: DecayFunction,
    #[serde(default = "default_series_constant")]
    pub series_constant: f64,
    #[serde(default)]
    pub stability_check: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Worker threads for replications; 0 uses the default pool.
    #[serde(default)]
    pub parallelism: usize,
}

fn default_replications() -> usize {
    1000
}

fn default_epsilon() -> DecayFunction {
    DecayFunction::Power(0.4)
}

fn default_series_constant() -> f64 {
    1.0
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// The experiment-level view of this configuration (what gets hashed).
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            arrival: self.arrival.clone(),
            service: self.service.clone(),
            rule: self.rule,
            time_grid: self.time_grid.clone(),
            replications: self.replications,
            master_seed: self.master_seed,
            class_functions: self.class_functions.clone(),
            epsilon: self.epsilon,
            series_constant: self.series_constant,
            stability_check: self.stability_check,
        }
    }

    fn apply_overrides(&mut self, common: &ExperimentArgs) {
        if let Some(seed) = common.seed {
            self.master_seed = seed;
        }
        if let Some(out) = &common.out {
            self.out_dir = out.clone();
        }
        if let Some(parallel) = common.parallel {
            self.parallelism = parallel;
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qmle",
    about = "GI/G/1 queue simulation, rate estimation, and boundary-crossing experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one observation window and write it as JSON.
    Simulate(ExperimentArgs),
    /// Estimate arrival and service rates from a stored window file.
    Estimate(EstimateArgs),
    /// Normal-approximation quality of the standardized estimates.
    Normality(ExperimentArgs),
    /// Boundary-crossing experiment on nested paths.
    Crossings(ExperimentArgs),
    /// Concentration of the arrival and departure counts.
    #[command(name = "c1check")]
    C1Check(ExperimentArgs),
    /// Integrability check of a decay function.
    #[command(name = "c2check")]
    C2Check(C2Args),
    /// Estimation-error decay across a ratio-4 horizon grid.
    Consistency(ExperimentArgs),
    /// Integral-test classification of a boundary function.
    Classify(ClassifyArgs),
    /// Partial-sum diagnostics of the boundary series.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the worker-thread count (0 = default pool).
    #[arg(long)]
    parallel: Option<usize>,
    /// Exit 4 if the report violates its acceptance envelope.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Observation-window JSON file.
    #[arg(long)]
    window: PathBuf,
    /// Arrival model name (e.g. exponential, gamma:2).
    #[arg(long)]
    arrival: String,
    /// Service model name.
    #[arg(long)]
    service: String,
    /// True arrival rate, for standardized deviations.
    #[arg(long, requires = "phi0")]
    theta0: Option<f64>,
    /// True service rate.
    #[arg(long, requires = "theta0")]
    phi0: Option<f64>,
}

#[derive(Debug, Args)]
struct C2Args {
    /// Decay spec: power:<a>, invloglog:<p>, exp, or const:<v>.
    #[arg(long)]
    epsilon: String,
    /// Upper integration limit.
    #[arg(long, default_value_t = classfn::DEFAULT_T_MAX)]
    t_max: f64,
}

#[derive(Debug, Args)]
struct BoundaryArgs {
    /// Boundary family: scaled_lil or power_log_log.
    #[arg(long, conflicts_with = "table")]
    family: Option<String>,
    /// Coefficient of the boundary family.
    #[arg(long, requires = "family")]
    param: Option<f64>,
    /// JSON file with [[t, h], ...] points for a table boundary.
    #[arg(long)]
    table: Option<PathBuf>,
}

impl BoundaryArgs {
    fn resolve(&self) -> Result<ClassFunction> {
        if let Some(path) = &self.table {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read table {}: {e}", path.display()))
            })?;
            let points: Vec<(f64, f64)> = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("invalid table {}: {e}", path.display())))?;
            return Ok(ClassFunction::new(BoundaryFamily::UserTable(points)));
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| Error::Config("either --family or --table is required".into()))?;
        let param = self
            .param
            .ok_or_else(|| Error::Config("--param is required with --family".into()))?;
        match family {
            "scaled_lil" => Ok(ClassFunction::new(BoundaryFamily::ScaledLil(param))),
            "power_log_log" => Ok(ClassFunction::new(BoundaryFamily::PowerLogLog(param))),
            other => Err(Error::Config(format!(
                "unknown boundary family `{other}`; use scaled_lil or power_log_log"
            ))),
        }
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    boundary: BoundaryArgs,
    #[arg(long, default_value_t = classfn::DEFAULT_T_MAX)]
    t_max: f64,
    #[arg(long, default_value_t = classfn::DEFAULT_MARGIN)]
    margin: f64,
}

#[derive(Debug, Args)]
struct DiagnosticsArgs {
    #[command(flatten)]
    boundary: BoundaryArgs,
    /// First grid point (must be at least e²).
    #[arg(long, default_value_t = 10.0)]
    grid_start: f64,
    /// Last grid point.
    #[arg(long, default_value_t = 1e12)]
    grid_stop: f64,
    /// Number of geometric grid points.
    #[arg(long, default_value_t = 40)]
    grid_points: usize,
    /// Optional file with one crossing probability per line, aligned with
    /// the grid.
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Constant of the exponent-corrected series.
    #[arg(long, default_value_t = 1.0)]
    c_constant: f64,
}

/// JSON summary wrapper written next to each CSV report.
#[derive(Serialize)]
struct Summary<'a, R: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    report: &'a R,
}

fn write_summary<R: serde::Serialize>(
    dir: &Path,
    stem: &str,
    command: &str,
    hash: &str,
    experiment: &ExperimentConfig,
    report: &R,
) -> Result<PathBuf> {
    let summary = Summary {
        command,
        config_hash: hash,
        config: experiment,
        report,
    };
    report::write_file(dir, &format!("{stem}.json"), &report::json_string(&summary)?)
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// Map an error to the documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Precondition(_)
        | Error::Domain { .. }
        | Error::Json(_)
        | Error::Io(_) => EXIT_CONFIG,
        Error::InsufficientData(_)
        | Error::Input(_)
        | Error::SimulationFault(_)
        | Error::Inversion { .. } => EXIT_DATA,
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Normality(args) => cmd_experiment(args, "normality"),
        Command::Crossings(args) => cmd_experiment(args, "crossings"),
        Command::C1Check(args) => cmd_experiment(args, "c1check"),
        Command::Consistency(args) => cmd_experiment(args, "consistency"),
        Command::C2Check(args) => cmd_c2check(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Diagnostics(args) => cmd_diagnostics(args),
    }
}

fn in_pool<T: Send>(parallelism: usize, work: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if parallelism == 0 {
        work()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(work)
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_simulate(args: ExperimentArgs) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply_overrides(&args);
    let rule = cfg
        .rule
        .ok_or_else(|| Error::Config("simulate needs a `rule` key in the config".into()))?;
    let experiment = cfg.experiment();
    print_warnings(&experiment.validate()?);
    let models = experiment.resolve_models()?;

    let mut stream = rng::stream(cfg.master_seed, 0);
    let window = qsim::simulate(
        models.arrival.as_ref(),
        models.theta0,
        models.service.as_ref(),
        models.phi0,
        rule,
        &mut stream,
    )?;

    let hash = report::config_hash(&experiment);
    let dir = report::run_dir(&cfg.out_dir, "simulate", &hash)?;
    let name = format!("window_{hash}_s{}.json", cfg.master_seed);
    let path = report::write_file(&dir, &name, &report::json_string(&window)?)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.window)?;
    let window: ObservationWindow = serde_json::from_str(&text)?;
    window.validate()?;
    let arrival = expfam::by_name(&args.arrival)?;
    let service = expfam::by_name(&args.service)?;
    let true_params = match (args.theta0, args.phi0) {
        (Some(t), Some(p)) => Some((t, p)),
        _ => None,
    };
    let fit = mle::estimate(&window, arrival.as_ref(), service.as_ref(), true_params)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(EXIT_OK)
}

fn cmd_experiment(args: ExperimentArgs, command: &str) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply_overrides(&args);
    let experiment = cfg.experiment();
    let hash = report::config_hash(&experiment);
    let dir = report::run_dir(&cfg.out_dir, command, &hash)?;
    let stem = format!("{command}_{hash}_s{}", cfg.master_seed);
    let wants = |f: OutputFormat| cfg.formats.contains(&f);

    let write_csv = |name: &str, contents: &str| -> Result<()> {
        if wants(OutputFormat::Csv) {
            let path = report::write_file(&dir, name, contents)?;
            println!("{}", path.display());
        }
        Ok(())
    };

    let envelope_ok = match command {
        "normality" => {
            let rep = in_pool(cfg.parallelism, || montecarlo::run_normality(&experiment))?;
            print_warnings(&rep.warnings);
            write_csv(&format!("{stem}.csv"), &rep.to_csv())?;
            if wants(OutputFormat::Json) {
                let path = write_summary(&dir, &stem, command, &hash, &experiment, &rep)?;
                println!("{}", path.display());
            }
            rep.envelope_ok()
        }
        "crossings" => {
            let rep = in_pool(cfg.parallelism, || montecarlo::run_crossings(&experiment))?;
            print_warnings(&rep.warnings);
            write_csv(&format!("{stem}_freqs.csv"), &rep.freqs_csv())?;
            write_csv(&format!("{stem}_tails.csv"), &rep.tails_csv())?;
            if wants(OutputFormat::Json) {
                let path = write_summary(&dir, &stem, command, &hash, &experiment, &rep)?;
                println!("{}", path.display());
            }
            rep.envelope_ok()
        }
        "c1check" => {
            let rep = in_pool(cfg.parallelism, || montecarlo::run_condition_c1(&experiment))?;
            print_warnings(&rep.warnings);
            write_csv(&format!("{stem}.csv"), &rep.to_csv())?;
            if wants(OutputFormat::Json) {
                let path = write_summary(&dir, &stem, command, &hash, &experiment, &rep)?;
                println!("{}", path.display());
            }
            rep.envelope_ok()
        }
        "consistency" => {
            let rep = in_pool(cfg.parallelism, || montecarlo::run_consistency(&experiment))?;
            print_warnings(&rep.warnings);
            write_csv(&format!("{stem}.csv"), &rep.to_csv())?;
            if wants(OutputFormat::Json) {
                let path = write_summary(&dir, &stem, command, &hash, &experiment, &rep)?;
                println!("{}", path.display());
            }
            rep.envelope_ok()
        }
        other => {
            return Err(Error::Config(format!("unknown experiment `{other}`")));
        }
    };

    if args.strict && !envelope_ok {
        eprintln!("strict mode: acceptance envelope violated");
        return Ok(EXIT_ENVELOPE);
    }
    Ok(EXIT_OK)
}

fn cmd_c2check(args: C2Args) -> Result<i32> {
    let eps: DecayFunction = args.epsilon.parse()?;
    let report = classfn::condition_c2_check(|t| eps.eval(t), args.t_max)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(EXIT_OK)
}

fn cmd_classify(args: ClassifyArgs) -> Result<i32> {
    let boundary = args.boundary.resolve()?;
    let report = classfn::integral_test(&boundary, args.t_max, args.margin)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(EXIT_OK)
}

fn cmd_diagnostics(args: DiagnosticsArgs) -> Result<i32> {
    let boundary = args.boundary.resolve()?;
    let grid = classfn::geomspace(args.grid_start, args.grid_stop, args.grid_points)?;
    let probs = match &args.probs {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let values: Vec<f64> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Input(format!("bad probability line `{l}`")))
                })
                .collect::<Result<_>>()?;
            Some(values)
        }
        None => None,
    };
    let table =
        classfn::series_diagnostics(&boundary, &grid, probs.as_deref(), args.c_constant)?;
    print!("{}", table.to_csv());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_minimal_defaults() {
        let json = r#"{
            "arrival": {"model": "exponential", "param": 1.0},
            "service": {"model": "exponential", "param": 1.5}
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.replications, 1000);
        assert_eq!(cfg.epsilon, DecayFunction::Power(0.4));
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
        assert_eq!(cfg.formats, vec![OutputFormat::Csv, OutputFormat::Json]);
        assert_eq!(cfg.parallelism, 0);
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        let json = r#"{
            "arrival": {"model": "exponential", "param": 1.0},
            "service": {"model": "exponential", "param": 1.5},
            "replciations": 100
        }"#;
        let err = serde_json::from_str::<RunConfig>(json).unwrap_err();
        assert!(err.to_string().contains("replciations"));
    }

    #[test]
    fn decay_spec_parsing() {
        assert_eq!(
            "power:0.4".parse::<DecayFunction>().unwrap(),
            DecayFunction::Power(0.4)
        );
        assert_eq!("exp".parse::<DecayFunction>().unwrap(), DecayFunction::ExpNeg);
        assert_eq!(
            "const:10".parse::<DecayFunction>().unwrap(),
            DecayFunction::Constant(10.0)
        );
        assert!("wavelet:3".parse::<DecayFunction>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Precondition("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code_for(&Error::InsufficientData("x".into())),
            EXIT_DATA
        );
        assert_eq!(
            exit_code_for(&Error::SimulationFault("x".into())),
            EXIT_DATA
        );
    }

    #[test]
    fn boundary_args_resolution() {
        let args = BoundaryArgs {
            family: Some("scaled_lil".into()),
            param: Some(1.2),
            table: None,
        };
        assert_eq!(
            args.resolve().unwrap().family,
            BoundaryFamily::ScaledLil(1.2)
        );
        let bad = BoundaryArgs {
            family: Some("bessel".into()),
            param: Some(1.0),
            table: None,
        };
        assert!(bad.resolve().is_err());
    }
}
