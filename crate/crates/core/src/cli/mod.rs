//! Scenario runner behind the `ptsym` binary.
//!
//! Exit codes: 0 when every enabled check passes, 2 for configuration or
//! model errors, 3 for numerical failures (including a failed check).

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ScenarioConfig, Scenario};
pub use run::{run_scenario, validate_scenario, RunSummary, ValidationSummary};
pub use sweep::{sweep, SweepAxis, SweepRow};

use crate::error::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ptsym", version, about = "PT-symmetric evolution and adiabatic checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for all artifacts (overrides output.dir)
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// RK4 substeps per grid interval
    #[arg(long, global = true)]
    pub substeps: Option<usize>,
    /// Frame and symmetry tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its artifacts
    Run { config: PathBuf },
    /// Run a scenario once per value of one or more fields
    Sweep {
        config: PathBuf,
        /// Dotted field path, e.g. `grid.t_end`; repeat for zipped axes
        #[arg(long, required = true)]
        axis: Vec<String>,
        /// Comma-separated values, one list per --axis
        #[arg(long, required = true, allow_hyphen_values = true)]
        values: Vec<String>,
    },
    /// Frame and symmetry checks only
    Validate { config: PathBuf },
}

pub fn exit_code(err: &Error) -> u8 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}

impl Cli {
    fn adjust(&self, cfg: &mut ScenarioConfig) {
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
        if self.substeps.is_some() {
            cfg.substeps = self.substeps;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.frame = t;
            cfg.tolerances.symmetry = t;
        }
    }

    fn load(&self, path: &std::path::Path) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(path)?;
        self.adjust(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_values(axis: &str, list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("--values for {axis}: {s:?} is not a number")))
        })
        .collect()
}

fn print_json<T: serde::Serialize>(v: &T) {
    match serde_json::to_string_pretty(v) {
        // a closed pipe (e.g. `| head`) is not an error worth a panic
        Ok(s) => {
            let _ = writeln!(std::io::stdout(), "{s}");
        }
        Err(e) => eprintln!("cannot serialize summary: {e}"),
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = cli.load(config)?;
            let s = run_scenario(&cfg)?;
            print_json(&s);
            for c in s.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} = {:e} (threshold {:e})", c.name, c.value, c.threshold);
            }
            Ok(if s.passed { EXIT_OK } else { EXIT_NUMERIC })
        }
        Command::Validate { config } => {
            let cfg = cli.load(config)?;
            let s = validate_scenario(&cfg)?;
            print_json(&s);
            if let Some(t) = s.symmetry.first_failure {
                eprintln!("symmetry check failed at t={t}");
            }
            Ok(if s.passed { EXIT_OK } else { EXIT_NUMERIC })
        }
        Command::Sweep { config, axis, values } => {
            if axis.len() != values.len() {
                return Err(Error::Config(format!(
                    "{} --axis but {} --values lists",
                    axis.len(),
                    values.len()
                )));
            }
            // validate the base file before sweeping
            let base_cfg = cli.load(config)?;
            let text = std::fs::read_to_string(config)?;
            let base: toml::Value = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            let axes = axis
                .iter()
                .zip(values)
                .map(|(a, v)| Ok(SweepAxis { field: a.clone(), values: parse_values(a, v)? }))
                .collect::<Result<Vec<_>>>()?;
            let out_dir = cli.out_dir.clone().unwrap_or(base_cfg.output.dir);
            let rows = sweep(&base, &axes, &out_dir, &|c| cli.adjust(c))?;
            let _ = write!(std::io::stdout(), "{}", sweep::sweep_csv(&axes, &rows));
            Ok(EXIT_OK)
        }
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn run_cli(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonFinite { last_good, .. } = &e {
                eprintln!("last good time: {last_good}");
            }
            exit_code(&e)
        }
    }
}
