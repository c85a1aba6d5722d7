//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for config or usage errors, 2 for I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::domain::{ConfigError, ScenarioConfig, ScenarioKind, ValidatedConfig};
use crate::engine::{build_workload, run_sweep_with_workload, run_with_workload, EngineError, RunReport, SweepParam};
use crate::workload::WorkloadError;

/// Header of `metrics.csv`.
pub const METRICS_HEADER: [&str; 9] = [
    "scenario",
    "n",
    "seed",
    "completion_time_s",
    "reuse_rate",
    "cpu_occupancy",
    "reuse_accuracy",
    "data_transfer_mb",
    "total_cost_s",
];

/// Header of `sweep.csv`.
pub const SWEEP_HEADER: [&str; 11] = [
    "param",
    "value",
    "scenario",
    "n",
    "seed",
    "completion_time_s",
    "reuse_rate",
    "cpu_occupancy",
    "reuse_accuracy",
    "data_transfer_mb",
    "total_cost_s",
];

/// Header of `compare.csv`.
pub const COMPARE_HEADER: [&str; 6] = [
    "scenario",
    "completion_time_s",
    "reuse_rate",
    "cpu_occupancy",
    "reuse_accuracy",
    "data_transfer_mb",
];

#[derive(Debug, Parser)]
#[command(name = "satreuse", version, about = "Satellite computation-reuse simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write report.json, metrics.csv and events.log.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Overrides the scenario named in the config.
        #[arg(long)]
        scenario: Option<ScenarioKind>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one simulation per parameter value and write sweep.csv.
    Sweep {
        config: PathBuf,
        /// `tau` or `th_co`.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a config and print it with every default filled in.
    Validate { config: PathBuf },
    /// Run several scenarios on one workload and write compare.csv.
    Compare {
        config: PathBuf,
        /// Comma-separated scenario names; all five when omitted.
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<ScenarioKind>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::Csv(_) => 2,
            CliError::Engine(e) => match e {
                EngineError::Workload(WorkloadError::UnreadableFile { .. } | WorkloadError::EmptyDirectory(_)) => 2,
                _ => 1,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ValidatedConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let config_err = |source| CliError::Config { path: path.to_path_buf(), source };
    ScenarioConfig::from_toml_str(&text).and_then(ScenarioConfig::validate).map_err(config_err)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run { config, out: dir, scenario, seed } => {
            let mut cfg = load_config(config)?;
            if scenario.is_some() || seed.is_some() {
                cfg = cfg
                    .with(|c| {
                        c.scenario = scenario.unwrap_or(c.scenario);
                        c.seed = seed.unwrap_or(c.seed);
                    })
                    .map_err(|source| CliError::Config { path: config.clone(), source })?;
            }
            let workload = build_workload(&cfg)?;
            let report = run_with_workload(&cfg, &workload)?;
            write_run(dir, &report)?;
            let _ = writeln!(out, "wrote {}", dir.display());
        }
        Command::Sweep { config, param, values, out: dir } => {
            let cfg = load_config(config)?;
            if values.is_empty() {
                return Err(CliError::Usage("--values needs at least one value".into()));
            }
            let workload = build_workload(&cfg)?;
            let reports = run_sweep_with_workload(&cfg, &workload, *param, values)?;
            create_dir(dir)?;
            let path = dir.join("sweep.csv");
            fs::write(&path, sweep_csv(&reports)?).map_err(io_err(&path))?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            let _ = write!(out, "{}", cfg.to_toml_string());
        }
        Command::Compare { config, scenarios, out: dir } => {
            let cfg = load_config(config)?;
            let scenarios = if scenarios.is_empty() { ScenarioKind::ALL.to_vec() } else { scenarios.clone() };
            let workload = build_workload(&cfg)?;
            let mut reports = Vec::with_capacity(scenarios.len());
            for s in scenarios {
                let point = cfg
                    .with(|c| c.scenario = s)
                    .map_err(|source| CliError::Config { path: config.clone(), source })?;
                reports.push(run_with_workload(&point, &workload)?);
            }
            create_dir(dir)?;
            let path = dir.join("compare.csv");
            fs::write(&path, compare_csv(&reports)?).map_err(io_err(&path))?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `report.json`, `metrics.csv` and `events.log` into `dir`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<(), CliError> {
    create_dir(dir)?;
    let files = [
        ("report.json", report.to_json() + "\n"),
        ("metrics.csv", metrics_csv(std::slice::from_ref(report))?),
        ("events.log", report.events_log()),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
    }
    Ok(())
}

fn metric_fields(r: &RunReport) -> [String; 6] {
    let m = &r.metrics;
    [
        m.completion_time_s.to_string(),
        m.reuse_rate.to_string(),
        m.cpu_occupancy.to_string(),
        m.reuse_accuracy.to_string(),
        m.data_transfer_mb.to_string(),
        m.total_cost_s.to_string(),
    ]
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn metrics_csv(reports: &[RunReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER)?;
    for r in reports {
        let mut row = vec![r.scenario.to_string(), r.n.to_string(), r.seed.to_string()];
        row.extend(metric_fields(r));
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn sweep_csv(reports: &[RunReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in reports {
        let (param, value) = match r.sweep {
            Some(p) => (p.param.as_str().to_string(), p.value.to_string()),
            None => (String::new(), String::new()),
        };
        let mut row = vec![param, value, r.scenario.to_string(), r.n.to_string(), r.seed.to_string()];
        row.extend(metric_fields(r));
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn compare_csv(reports: &[RunReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARE_HEADER)?;
    for r in reports {
        let mut row = vec![r.scenario.to_string()];
        row.extend(metric_fields(r).into_iter().take(5));
        w.write_record(&row)?;
    }
    finish(w)
}
