use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempwit_core::homogenizer::default_eta_grid;

/// Only this schema version is accepted.
pub const SCHEMA_VERSION: u32 = 1;

/// Smallest final reservoir distance on the documented grid, frozen after
/// the first full run.
pub const RESERVOIR_MIN_DISTANCE: f64 = 0.707_106_781_186_547_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Table1,
    Conservation,
    Witness,
    Homogenize,
    Oscillator,
    All,
}

impl Experiment {
    pub const SUITE: [Experiment; 5] = [
        Experiment::Table1,
        Experiment::Conservation,
        Experiment::Witness,
        Experiment::Homogenize,
        Experiment::Oscillator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Conservation => "conservation",
            Experiment::Witness => "witness",
            Experiment::Homogenize => "homogenize",
            Experiment::Oscillator => "oscillator",
            Experiment::All => "all",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Dense and symbolic identities that hold to rounding.
    pub exact: f64,
    /// Pauli coefficients of symbolic commutators.
    pub symbolic: f64,
    /// State-level comparisons after evolution.
    pub state: f64,
    /// Allowed drift of the reservoir minimum from [`RESERVOIR_MIN_DISTANCE`].
    pub regression: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-12,
            symbolic: 1e-13,
            state: 1e-10,
            regression: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessParams {
    /// Rotation angles at which the axis systems are solved and written out.
    pub thetas: Vec<f64>,
    pub grid_points: usize,
    pub grid_range: f64,
    pub time_points: usize,
    pub random_draws: usize,
    /// Haar-random mediator states for the independence check.
    pub haar_draws: usize,
    /// Random members of the classical family for the `Z_M` check.
    pub family_draws: usize,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            thetas: vec![std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
            grid_points: 9,
            grid_range: 2.0,
            time_points: 64,
            random_draws: 10_000,
            haar_draws: 100,
            family_draws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomogenizerParams {
    pub etas: Vec<f64>,
    pub n: usize,
    /// Bloch vectors.
    pub rho0: [f64; 3],
    pub xi: [f64; 3],
}

impl Default for HomogenizerParams {
    fn default() -> Self {
        HomogenizerParams {
            etas: vec![0.2, 0.5, 1.0],
            n: 30,
            rho0: [0.0, 0.0, 1.0],
            xi: [1.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirParams {
    pub etas: Vec<f64>,
    pub grid_points: usize,
    pub grid_range: f64,
    pub random_draws: usize,
    pub steps: usize,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        ReservoirParams {
            etas: default_eta_grid(),
            grid_points: 9,
            grid_range: 2.0,
            random_draws: 1000,
            steps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorParams {
    /// Mediator truncations.
    pub d_b: Vec<usize>,
    pub t_max: f64,
    pub time_points: usize,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            d_b: vec![2, 3, 5],
            t_max: 10.0,
            time_points: 101,
        }
    }
}

/// Everything a run depends on. Equal configs give byte-identical artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub seed: u64,
    /// Not echoed into artifacts, so runs into different directories compare equal.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub witness: WitnessParams,
    pub homogenizer: HomogenizerParams,
    pub reservoir: ReservoirParams,
    pub oscillator: OscillatorParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::All,
            seed: 20_240_917,
            out: PathBuf::from("tempwit-out"),
            tolerances: Tolerances::default(),
            witness: WitnessParams::default(),
            homogenizer: HomogenizerParams::default(),
            reservoir: ReservoirParams::default(),
            oscillator: OscillatorParams::default(),
        }
    }
}

/// A config that cannot be used; always a usage error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field(name: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("field `{name}`: {msg}"))
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            ConfigError(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Semantic checks that serde cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.exact", t.exact),
            ("tolerances.symbolic", t.symbolic),
            ("tolerances.state", t.state),
            ("tolerances.regression", t.regression),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(field(name, format!("must be positive and finite, found {v}")));
            }
        }
        let w = &self.witness;
        finite_all("witness.thetas", &w.thetas)?;
        positive("witness.grid_range", w.grid_range)?;
        let h = &self.homogenizer;
        if h.n == 0 {
            return Err(field("homogenizer.n", "must be at least 1"));
        }
        finite_all("homogenizer.etas", &h.etas)?;
        bloch("homogenizer.rho0", h.rho0)?;
        bloch("homogenizer.xi", h.xi)?;
        let r = &self.reservoir;
        finite_all("reservoir.etas", &r.etas)?;
        positive("reservoir.grid_range", r.grid_range)?;
        if r.steps == 0 {
            return Err(field("reservoir.steps", "must be at least 1"));
        }
        let o = &self.oscillator;
        if let Some(d) = o.d_b.iter().find(|&&d| d < 2) {
            return Err(field("oscillator.d_b", format!("truncation must be at least 2, found {d}")));
        }
        positive("oscillator.t_max", o.t_max)?;
        if o.time_points < 2 {
            return Err(field("oscillator.time_points", "must be at least 2"));
        }
        Ok(())
    }
}

fn finite_all(name: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.is_empty() {
        return Err(field(name, "must not be empty"));
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(field(&format!("{name}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, found {v}")))
    }
}

fn bloch(name: &str, r: [f64; 3]) -> Result<(), ConfigError> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r.iter().all(|x| x.is_finite()) && norm <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(field(name, format!("Bloch vector must lie in the unit ball, norm {norm}")))
    }
}
