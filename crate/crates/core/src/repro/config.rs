//! Run configuration for the figure, spectrum and validation commands.
//!
//! A configuration can come from defaults, a flat `key = value` file, and
//! command-line flags, in increasing order of precedence. The same
//! key/value pairs are embedded in every output file so a run can be
//! repeated from its own output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::loss::SingleExcitationState;
use crate::model::Scenario;
use crate::oracle::IntegratorConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Oracle,
    Both,
}

impl Method {
    pub fn exact(self) -> bool {
        matches!(self, Method::Exact | Method::Both)
    }

    pub fn oracle(self) -> bool {
        matches!(self, Method::Oracle | Method::Both)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Oracle => "oracle",
            Method::Both => "both",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Method::Exact),
            "oracle" => Ok(Method::Oracle),
            "both" => Ok(Method::Both),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected exact, oracle or both)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Initial atomic state; the cavity always starts in vacuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Initial {
    Excited,
    Amplitudes { c_g: C64, c_e: C64 },
}

impl Initial {
    pub fn state(&self) -> Result<SingleExcitationState> {
        match *self {
            Initial::Excited => Ok(SingleExcitationState::excited()),
            Initial::Amplitudes { c_g, c_e } => SingleExcitationState::new(c_g, c_e),
        }
    }
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::Excited => f.write_str("excited"),
            Initial::Amplitudes { c_g, c_e } => {
                write!(f, "{},{},{},{}", c_g.re, c_g.im, c_e.re, c_e.im)
            }
        }
    }
}

impl FromStr for Initial {
    type Err = Error;

    /// `excited`, or `re(c_g),im(c_g),re(c_e),im(c_e)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "excited" {
            return Ok(Initial::Excited);
        }
        let parts = parse_list(s, "initial")?;
        if parts.len() != 4 {
            return Err(Error::Config(format!(
                "initial must be 'excited' or four numbers re(c_g),im(c_g),re(c_e),im(c_e); got '{s}'"
            )));
        }
        let init = Initial::Amplitudes {
            c_g: C64::new(parts[0], parts[1]),
            c_e: C64::new(parts[2], parts[3]),
        };
        init.state()
            .map_err(|e| Error::Config(format!("initial amplitudes: {e}")))?;
        Ok(init)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// `γ/g` for dephasing, `κ/g` for loss.
    pub ratios: Vec<f64>,
    pub delta_over_g: f64,
    pub t_max_over_g: f64,
    pub samples: usize,
    pub initial: Initial,
    pub method: Method,
    pub fock_dim: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub format: Format,
}

/// Keys accepted in configuration files, in the order they are written.
pub const KEYS: &[&str] = &[
    "scenario", "ratio", "delta", "tmax", "samples", "initial", "method", "fock_dim", "rel_tol",
    "abs_tol", "format",
];

impl RunConfig {
    /// Defaults reproducing the cavity-dephasing figure.
    pub fn figure2() -> Self {
        Self::defaults(Scenario::Dephasing)
    }

    /// Defaults reproducing the photon-loss figure (`δ/g = 0.8`).
    pub fn figure3() -> Self {
        Self::defaults(Scenario::Loss)
    }

    pub fn defaults(scenario: Scenario) -> Self {
        let integ = IntegratorConfig::default();
        Self {
            scenario,
            ratios: vec![1.0, 10.0, 100.0, 1000.0],
            delta_over_g: match scenario {
                Scenario::Dephasing => 0.0,
                Scenario::Loss => 0.8,
            },
            t_max_over_g: 10.0,
            samples: 200,
            initial: Initial::Excited,
            method: Method::Exact,
            fock_dim: 4,
            rel_tol: integ.rel_tol,
            abs_tol: integ.abs_tol,
            format: Format::Csv,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..IntegratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if self.ratios.is_empty() {
            return Err(Error::Config("at least one ratio is required".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Config(format!("ratios must be positive, got {r}")));
        }
        if !self.delta_over_g.is_finite() {
            return Err(Error::Config("delta must be finite".into()));
        }
        if !(self.t_max_over_g.is_finite() && self.t_max_over_g > 0.0) {
            return Err(Error::Config(format!(
                "tmax must be positive, got {}",
                self.t_max_over_g
            )));
        }
        if self.fock_dim < 2 {
            return Err(Error::Config(format!(
                "fock_dim must be at least 2, got {}",
                self.fock_dim
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        self.initial.state().map_err(|e| Error::Config(e.to_string()))?;
        if self.scenario == Scenario::Dephasing
            && self.method.exact()
            && self.initial != Initial::Excited
        {
            return Err(Error::Config(
                "the dephasing closed form needs initial = excited; use --method oracle for superpositions"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Flat key/value view, the inverse of [`RunConfig::apply_pairs`].
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let ratios = self
            .ratios
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("scenario".into(), self.scenario.to_string()),
            ("ratio".into(), ratios),
            ("delta".into(), self.delta_over_g.to_string()),
            ("tmax".into(), self.t_max_over_g.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("initial".into(), self.initial.to_string()),
            ("method".into(), self.method.to_string()),
            ("fock_dim".into(), self.fock_dim.to_string()),
            ("rel_tol".into(), self.rel_tol.to_string()),
            ("abs_tol".into(), self.abs_tol.to_string()),
            ("format".into(), self.format.to_string()),
        ]
    }

    pub fn apply_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        for (key, value) in pairs {
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "scenario" => self.scenario = value.parse()?,
            "ratio" | "ratios" => self.ratios = parse_list(value, "ratio")?,
            "delta" => self.delta_over_g = parse_num(value, "delta")?,
            "tmax" => self.t_max_over_g = parse_num(value, "tmax")?,
            "samples" => {
                self.samples = value
                    .parse()
                    .map_err(|_| Error::Config(format!("samples: '{value}' is not a count")))?
            }
            "initial" => self.initial = value.parse()?,
            "method" => self.method = value.parse()?,
            "fock_dim" => {
                self.fock_dim = value
                    .parse()
                    .map_err(|_| Error::Config(format!("fock_dim: '{value}' is not a count")))?
            }
            "rel_tol" => self.rel_tol = parse_num(value, "rel_tol")?,
            "abs_tol" => self.abs_tol = parse_num(value, "abs_tol")?,
            "format" => self.format = value.parse()?,
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{other}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{what}: '{s}' is not a number")))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_num(p, what))
        .collect()
}

/// Marker in front of configuration lines embedded in CSV output.
pub const EMBEDDED_PREFIX: &str = "#%";

/// Reads configuration pairs from text.
///
/// Accepted forms:
/// * plain `key = value` lines, with `#` comments and blank lines;
/// * CSV output of this tool, whose `#% key = value` lines carry the
///   configuration (everything else is ignored);
/// * JSON output of this tool (the `config` object).
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: serde_json::Value = serde_json::from_str(trimmed)
            .map_err(|e| Error::Config(format!("invalid JSON configuration: {e}")))?;
        let obj = doc
            .get("config")
            .unwrap_or(&doc)
            .as_object()
            .ok_or_else(|| Error::Config("JSON configuration must be an object".into()))?;
        return obj
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                Ok((k.clone(), v))
            })
            .collect();
    }

    let embedded = text.lines().any(|l| l.starts_with(EMBEDDED_PREFIX));
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = if embedded {
            match raw.strip_prefix(EMBEDDED_PREFIX) {
                Some(rest) => rest,
                None => continue,
            }
        } else {
            raw
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}
