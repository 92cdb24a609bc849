use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempwit_core::witness::{Measurement, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured < threshold`.
    Below,
    /// `measured > threshold`.
    Above,
    /// `measured == threshold`; used for counts.
    Equal,
}

/// One pass/fail entry of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub experiment: String,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
    /// Short neutral statement of the property checked.
    pub anchor: String,
}

impl Check {
    pub fn new(experiment: &str, name: &str, measured: f64, comparison: Comparison, threshold: f64, anchor: &str) -> Self {
        let pass = match comparison {
            Comparison::Below => measured < threshold,
            Comparison::Above => measured > threshold,
            Comparison::Equal => measured == threshold,
        };
        Check {
            experiment: experiment.to_string(),
            name: name.to_string(),
            measured,
            threshold,
            comparison,
            pass,
            anchor: anchor.to_string(),
        }
    }

    /// `None` for record-only measurements.
    pub fn from_measurement(experiment: &str, m: &Measurement, anchor: &str) -> Option<Self> {
        let comparison = match m.relation {
            Relation::Below => Comparison::Below,
            Relation::Above => Comparison::Above,
            Relation::Record => return None,
        };
        Some(Check::new(experiment, &m.name, m.value, comparison, m.tolerance, anchor))
    }
}

/// A reported value with no pass/fail attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub name: String,
    pub value: f64,
}

/// Fixed-width scientific notation; 17 significant digits round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output directory with a list of what has been written, in write order.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.into_iter().collect::<Vec<_>>())?;
        }
        w.flush()?;
        self.note(name);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        self.note(name);
        Ok(())
    }

    fn note(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-300, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_measurements_are_not_checks() {
        let m = Measurement::new("x", 1.0, 0.5, Relation::Record);
        assert!(Check::from_measurement("w", &m, "a").is_none());
        let m = Measurement::new("x", 1.0, 0.5, Relation::Above);
        assert!(Check::from_measurement("w", &m, "a").unwrap().pass);
    }
}
