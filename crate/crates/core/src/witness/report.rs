use serde::{Deserialize, Serialize};

use super::rotation::SystemRoots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes when `value < tolerance`.
    Below,
    /// Passes when `value > tolerance`.
    Above,
    /// Recorded only; `tolerance` is the numerical accuracy of the value.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

impl Parameter {
    pub fn new(name: &str, value: f64) -> Self {
        Parameter {
            name: name.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: Option<bool>,
    /// Where the value was attained, for search optima.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at: Vec<Parameter>,
}

impl Measurement {
    pub fn new(name: &str, value: f64, tolerance: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Below => Some(value < tolerance),
            Relation::Above => Some(value > tolerance),
            Relation::Record => None,
        };
        Measurement {
            name: name.to_string(),
            value,
            tolerance,
            relation,
            pass,
            at: Vec::new(),
        }
    }

    pub fn at(mut self, at: Vec<Parameter>) -> Self {
        self.at = at;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub name: String,
    pub theta: f64,
    /// Unit-norm acceptance tolerance.
    pub tolerance: f64,
    pub real_roots: Vec<[f64; 3]>,
    pub accepted: Vec<[f64; 3]>,
    pub continuum: bool,
}

impl RootSet {
    pub fn from_system(s: &SystemRoots) -> Self {
        RootSet {
            name: s.system.name.clone(),
            theta: s.theta,
            tolerance: super::rotation::ROOT_ACCEPT_TOL,
            real_roots: s.real_roots.clone(),
            accepted: s.accepted.clone(),
            continuum: s.continuum,
        }
    }
}

/// Tabular series, one row per sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub tolerance: f64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub task: String,
    pub measurements: Vec<Measurement>,
    #[serde(default)]
    pub root_sets: Vec<RootSet>,
    #[serde(default)]
    pub series: Vec<Series>,
    pub parameters: Vec<Parameter>,
    pub seed: Option<u64>,
    pub samples: usize,
    pub skipped: usize,
    /// Set when the verdict rests on a bounded search.
    pub unproven: bool,
    pub verdict: String,
}

impl WitnessReport {
    pub fn new(task: &str) -> Self {
        WitnessReport {
            task: task.to_string(),
            measurements: Vec::new(),
            root_sets: Vec::new(),
            series: Vec::new(),
            parameters: Vec::new(),
            seed: None,
            samples: 0,
            skipped: 0,
            unproven: false,
            verdict: String::new(),
        }
    }

    pub fn measurement(&self, name: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.name == name)
    }

    /// No measurement with a threshold failed.
    pub fn passed(&self) -> bool {
        self.measurements.iter().all(|m| m.pass != Some(false))
    }
}
