//! Line-oriented `key = value` configuration.
//!
//! `#` starts a comment, blank lines are ignored, list values are
//! comma-separated. Unknown and repeated keys are errors; missing keys take
//! the defaults below. Every accepted document renders to a canonical form
//! with [`ConfigDocument::normalize`].

use std::fmt;

use crate::engine::{EngineError, SimConfig};
use crate::geometry::Arena;
use crate::harness::{Experiment, SweepGrid};
use crate::mobility::{MobilityError, MobilityModel, MobilityParams};
use crate::target::{TargetError, TargetKind, TargetSpec};

pub const KEYS: [&str; 15] = [
    "arena_side",
    "n_nodes",
    "mobility_model",
    "node_speed",
    "range",
    "step_length",
    "target_kind",
    "target_duration",
    "target_speed",
    "dt",
    "runs",
    "base_seed",
    "n_values",
    "td_values",
    "models",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, absent for command-line flags and whole-document checks.
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError { line: None, key: key.to_string(), message: message.into() }
    }

    fn at(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub arena_side: f64,
    pub n_nodes: usize,
    pub mobility_model: MobilityModel,
    pub node_speed: f64,
    pub range: f64,
    pub step_length: f64,
    pub target_kind: TargetKind,
    pub target_duration: f64,
    pub target_speed: f64,
    pub dt: f64,
    pub runs: u64,
    pub base_seed: u64,
    pub n_values: Vec<usize>,
    pub td_values: Vec<f64>,
    pub models: Vec<MobilityModel>,
    lines: Vec<(String, usize)>,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ConfigDocument {
            arena_side: 4000.0,
            n_nodes: 10,
            mobility_model: MobilityModel::CoverageBased,
            node_speed: 5.0,
            range: 500.0,
            step_length: 50.0,
            target_kind: TargetKind::Stationary,
            target_duration: 100.0,
            target_speed: 5.0,
            dt: 1.0,
            runs: 2000,
            base_seed: 1,
            n_values: vec![2, 10, 18, 26],
            td_values: vec![100.0, 300.0, 500.0, 1000.0],
            models: vec![
                MobilityModel::CoverageBased,
                MobilityModel::RandomWalk,
                MobilityModel::ParallelPath,
                MobilityModel::RandomDirection,
                MobilityModel::Static,
            ],
            lines: Vec::new(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::new(key, format!("expected a finite number, got `{value}`"))),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| ConfigError::new(key, format!("expected a non-negative integer, got `{value}`")))
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be positive, got {v}")))
    }
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::new(key, "list must not be empty"));
    }
    Ok(items)
}

fn join<T>(items: &[T], render: impl Fn(&T) -> String) -> String {
    items.iter().map(render).collect::<Vec<_>>().join(",")
}

impl ConfigDocument {
    /// Sets one key from its textual value, checking the per-key invariant.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "arena_side" => self.arena_side = positive(key, parse_f64(key, value)?)?,
            "n_nodes" => self.n_nodes = parse_int(key, value)?,
            "mobility_model" => {
                self.mobility_model = value.parse().map_err(|e| ConfigError::new(key, format!("{e}")))?
            }
            "node_speed" => {
                let v = parse_f64(key, value)?;
                if v < 0.0 {
                    return Err(ConfigError::new(key, format!("must be non-negative, got {v}")));
                }
                self.node_speed = v;
            }
            "range" => self.range = positive(key, parse_f64(key, value)?)?,
            "step_length" => self.step_length = positive(key, parse_f64(key, value)?)?,
            "target_kind" => self.target_kind = value.parse().map_err(|e| ConfigError::new(key, format!("{e}")))?,
            "target_duration" => self.target_duration = positive(key, parse_f64(key, value)?)?,
            "target_speed" => self.target_speed = positive(key, parse_f64(key, value)?)?,
            "dt" => self.dt = positive(key, parse_f64(key, value)?)?,
            "runs" => {
                let runs: u64 = parse_int(key, value)?;
                if runs == 0 {
                    return Err(ConfigError::new(key, "must be at least 1"));
                }
                self.runs = runs;
            }
            "base_seed" => self.base_seed = parse_int(key, value)?,
            "n_values" => self.n_values = list(key, value, |s| parse_int(key, s))?,
            "td_values" => self.td_values = list(key, value, |s| positive(key, parse_f64(key, s)?))?,
            "models" => {
                self.models =
                    list(key, value, |s| s.parse::<MobilityModel>().map_err(|e| ConfigError::new(key, format!("{e}"))))?
            }
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.iter().find(|(k, _)| k == key).map(|&(_, l)| l)
    }

    /// Cross-key checks: the assembled scenario must be runnable.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Err(e) = self.sim_config_unchecked().validate() {
            let key = match &e {
                EngineError::Mobility(MobilityError::InvalidSpeed { .. }) => "node_speed",
                EngineError::Mobility(MobilityError::InvalidRange(_)) => "range",
                EngineError::Mobility(_) => "step_length",
                EngineError::Target(TargetError::InvalidSpeed(_)) => "target_speed",
                EngineError::Target(TargetError::InvalidStepLength(_)) => "step_length",
                EngineError::Target(_) => "target_duration",
                _ => "dt",
            };
            return Err(ConfigError::new(key, e.to_string()).at(self.line_of(key)));
        }
        let target_speed = if self.target_kind.is_mobile() { self.target_speed } else { 0.0 };
        let max_speed = self.node_speed + target_speed;
        if self.models.iter().any(|m| m.is_mobile()) && max_speed * self.dt > self.range / 10.0 {
            return Err(ConfigError::new("dt", format!("{} s is too coarse for the models listed in `models`", self.dt))
                .at(self.line_of("dt")));
        }
        Ok(())
    }

    fn sim_config_unchecked(&self) -> SimConfig {
        SimConfig {
            arena: Arena::new(self.arena_side).expect("arena_side checked on set"),
            n_nodes: self.n_nodes,
            mobility: MobilityParams {
                model: self.mobility_model,
                speed: self.node_speed,
                max_speed: self.node_speed,
                range: self.range,
                step_length: self.step_length,
            },
            target: TargetSpec {
                kind: self.target_kind,
                duration: self.target_duration,
                speed: self.target_speed,
                step_length: self.step_length,
            },
            dt: self.dt,
            snapshot_times: Vec::new(),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        self.validate()?;
        Ok(self.sim_config_unchecked())
    }

    pub fn experiment(&self) -> Result<Experiment, ConfigError> {
        Ok(Experiment::new(self.sim_config()?, self.runs, self.base_seed))
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid { n_values: self.n_values.clone(), td_values: self.td_values.clone(), models: self.models.clone() }
    }

    /// Textual value of `key` in canonical form.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "arena_side" => self.arena_side.to_string(),
            "n_nodes" => self.n_nodes.to_string(),
            "mobility_model" => self.mobility_model.to_string(),
            "node_speed" => self.node_speed.to_string(),
            "range" => self.range.to_string(),
            "step_length" => self.step_length.to_string(),
            "target_kind" => self.target_kind.to_string(),
            "target_duration" => self.target_duration.to_string(),
            "target_speed" => self.target_speed.to_string(),
            "dt" => self.dt.to_string(),
            "runs" => self.runs.to_string(),
            "base_seed" => self.base_seed.to_string(),
            "n_values" => join(&self.n_values, |v| v.to_string()),
            "td_values" => join(&self.td_values, |v| v.to_string()),
            "models" => join(&self.models, |m| m.to_string()),
            _ => return None,
        })
    }

    /// Every key in fixed order, one `key = value` line each.
    pub fn normalize(&self) -> String {
        KEYS.iter().map(|k| format!("{k} = {}\n", self.get(k).expect("known key"))).collect()
    }
}

/// Parses a configuration document, then checks cross-key invariants.
pub fn parse_config(text: &str) -> Result<ConfigDocument, ConfigError> {
    let mut doc = ConfigDocument::default();
    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::new(line, "expected `key = value`").at(Some(line_no)));
        };
        let key = key.trim();
        if doc.lines.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::new(key, "key given more than once").at(Some(line_no)));
        }
        doc.set(key, value).map_err(|e| e.at(Some(line_no)))?;
        doc.lines.push((key.to_string(), line_no));
    }
    doc.validate()?;
    Ok(doc)
}
