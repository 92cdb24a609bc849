//! Deterministic experiment runner.
//!
//! Settings are layered: built-in defaults, then `--config`, then flags.
//! Exit status is 0 when every check passes, 1 when a check fails or an
//! experiment errors (artifacts written so far are kept), 2 for usage,
//! configuration or output-directory errors.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{ConfigError, Experiment, RunConfig};
use experiments::Run;
use output::{Artifacts, Check, Record};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Environment variable that overrides the output directory of the config.
pub const OUT_ENV: &str = "TEMPWIT_OUT";

#[derive(Debug, Parser)]
#[command(name = "tempwit", version, about = "Reproducible runs of the witness, homogenizer and oscillator experiments")]
pub struct Cli {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Homogenizer coupling; replaces the configured list.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Homogenizer reservoir size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Oscillator truncation; replaces the configured list.
    #[arg(long, global = true)]
    pub db: Option<usize>,
    /// Random-draw budget for both classical searches.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Without a subcommand the config's `experiment` field is run.
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Descriptor table of the witness circuit against the reference.
    Table1,
    /// Commutant bases, constrained families and conservation residuals.
    Conservation,
    /// Axis root systems, classical search and quantum demonstrations.
    Witness,
    /// Homogenizer trajectories, coefficient law and classical reservoir check.
    Homogenize,
    /// Truncated bosonic model audits and coherence trajectories.
    Oscillator,
    /// Every experiment above.
    All,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Table1 => Experiment::Table1,
            Command::Conservation => Experiment::Conservation,
            Command::Witness => Experiment::Witness,
            Command::Homogenize => Experiment::Homogenize,
            Command::Oscillator => Experiment::Oscillator,
            Command::All => Experiment::All,
        }
    }
}

impl Cli {
    /// Effective configuration after applying flags to the loaded file.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(cmd) = self.command {
            c.experiment = cmd.into();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(e) = self.eta {
            c.homogenizer.etas = vec![e];
        }
        if let Some(n) = self.n {
            c.homogenizer.n = n;
        }
        if let Some(d) = self.db {
            c.oscillator.d_b = vec![d];
        }
        if let Some(b) = self.budget {
            c.witness.random_draws = b;
            c.reservoir.random_draws = b;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub experiment: Experiment,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub error: Option<String>,
    pub checks: &'a [Check],
    pub records: &'a [Record],
    pub artifacts: Vec<String>,
    pub config: &'a RunConfig,
}

pub fn main_with(cli: Cli) -> ExitCode {
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("tempwit: configuration error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let go = || execute(&config);
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(go),
            Err(e) => {
                eprintln!("tempwit: thread pool: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => go(),
    };
    ExitCode::from(outcome)
}

/// Runs the configured experiment and writes `summary.json` last.
pub fn execute(config: &RunConfig) -> u8 {
    let artifacts = match Artifacts::create(&config.out) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("tempwit: output directory {}: {e}", config.out.display());
            return EXIT_USAGE;
        }
    };
    let mut run = Run::new(config, artifacts);
    let error = run.experiment(config.experiment).err().map(|e| format!("{e:#}"));
    for c in &run.checks {
        eprintln!(
            "{} {}/{}: {:e} ({:?} {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.experiment,
            c.name,
            c.measured,
            c.comparison,
            c.threshold
        );
    }
    let failed = run.checks.iter().filter(|c| !c.pass).count();
    let mut artifacts = run.artifacts.written().to_vec();
    artifacts.push("summary.json".into());
    let summary = Summary {
        experiment: config.experiment,
        seed: config.seed,
        passed: run.checks.len() - failed,
        failed,
        error: error.clone(),
        checks: &run.checks,
        records: &run.records,
        artifacts,
        config,
    };
    if let Err(e) = run.artifacts.json("summary.json", &summary) {
        eprintln!("tempwit: writing summary: {e}");
        return EXIT_USAGE;
    }
    if let Some(e) = error {
        eprintln!("tempwit: {e}");
        return EXIT_CHECK_FAILED;
    }
    eprintln!("tempwit: {} passed, {failed} failed -> {}", summary.passed, run.artifacts.dir().display());
    if failed == 0 {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
