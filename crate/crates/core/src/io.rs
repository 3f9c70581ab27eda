//! Configuration documents and result files.
//!
//! A configuration is a flat JSON object; every key is optional:
//!
//! ```json
//! {
//!   "n": 1000, "dt": 0.01, "omega": 110.0, "x0": 0.95, "seed": 0,
//!   "alpha": -11.175, "beta": 0.1, "sigma_scale": 0.05,
//!   "drift_knots": [[0.0, 0.0], [85.0, -0.026], [110.0, -0.07]]
//! }
//! ```
//!
//! Results are written as a JSON summary plus comma-separated tables. Floats
//! are rendered in their shortest round-trip form, so every number parses
//! back to the value held in memory.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{ConfigError, Error};
use crate::mortality::HazardParams;
use crate::population::{PopulationResult, SimConfig};
use crate::sde::{DiffusionParams, DriftTable};

pub const CONFIG_KEYS: [&str; 9] = [
    "n",
    "dt",
    "omega",
    "x0",
    "seed",
    "alpha",
    "beta",
    "sigma_scale",
    "drift_knots",
];

pub const SUMMARY_FILE: &str = "summary.json";
pub const CURVES_FILE: &str = "curves.csv";
pub const INDIVIDUALS_FILE: &str = "individuals.csv";
pub const PATHS_FILE: &str = "paths.csv";

fn number(key: &'static str, value: &Value) -> Result<f64, ConfigError> {
    value
        .as_f64()
        .ok_or_else(|| ConfigError::invalid(key, format!("expected a number, got {value}")))
}

fn unsigned(key: &'static str, value: &Value) -> Result<u64, ConfigError> {
    value
        .as_u64()
        .ok_or_else(|| ConfigError::invalid(key, format!("expected a non-negative integer, got {value}")))
}

fn knots(value: &Value) -> Result<Vec<(f64, f64)>, ConfigError> {
    let malformed = || ConfigError::invalid("drift_knots", "expected a list of [age, value] pairs");
    value
        .as_array()
        .ok_or_else(malformed)?
        .iter()
        .map(|pair| match pair.as_array().map(Vec::as_slice) {
            Some([age, rate]) => Ok((
                age.as_f64().ok_or_else(malformed)?,
                rate.as_f64().ok_or_else(malformed)?,
            )),
            _ => Err(malformed()),
        })
        .collect()
}

/// Builds a validated [`SimConfig`] from a parsed configuration object.
/// Missing keys take their defaults.
pub fn config_from_value(value: &Value) -> Result<SimConfig, ConfigError> {
    let object = value
        .as_object()
        .ok_or_else(|| ConfigError::Malformed("top level must be an object".into()))?;
    if let Some(unknown) = object.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(unknown.clone()));
    }

    let mut config = SimConfig::default();
    let get = |key: &str| object.get(key);
    if let Some(v) = get("n") {
        let n = unsigned("n", v)?;
        config.n = usize::try_from(n).map_err(|_| ConfigError::invalid("n", "too large"))?;
    }
    if let Some(v) = get("dt") {
        config.dt = number("dt", v)?;
    }
    if let Some(v) = get("omega") {
        config.omega = number("omega", v)?;
    }
    if let Some(v) = get("x0") {
        config.x0 = number("x0", v)?;
    }
    if let Some(v) = get("seed") {
        config.seed = unsigned("seed", v)?;
    }
    let alpha = get("alpha").map(|v| number("alpha", v)).transpose()?;
    let beta = get("beta").map(|v| number("beta", v)).transpose()?;
    config.hazard = HazardParams::new(
        alpha.unwrap_or(config.hazard.alpha()),
        beta.unwrap_or(config.hazard.beta()),
    )?;
    if let Some(v) = get("sigma_scale") {
        config.diffusion = DiffusionParams::new(number("sigma_scale", v)?)?;
    }
    if let Some(v) = get("drift_knots") {
        config.drift = DriftTable::new(knots(v)?)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    if text.trim().is_empty() {
        return config_from_value(&Value::Object(Map::new()));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    config_from_value(&value)
}

pub fn read_config(path: &Path) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// The configuration as a document [`parse_config`] reads back unchanged.
pub fn config_to_value(config: &SimConfig) -> Value {
    json!({
        "n": config.n,
        "dt": config.dt,
        "omega": config.omega,
        "x0": config.x0,
        "seed": config.seed,
        "alpha": config.hazard.alpha(),
        "beta": config.hazard.beta(),
        "sigma_scale": config.diffusion.scale(),
        "drift_knots": config.drift.knots().iter().map(|&(a, v)| json!([a, v])).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: SimConfig,
    pub version: String,
    pub runtime_seconds: f64,
}

impl RunManifest {
    pub fn new(config: SimConfig, runtime_seconds: f64) -> Self {
        RunManifest {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            runtime_seconds,
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "config": config_to_value(&self.config),
            "version": self.version,
            "runtime_seconds": self.runtime_seconds,
        })
    }
}

pub fn render_summary(result: &PopulationResult, manifest: &RunManifest) -> String {
    let s = &result.summary;
    let doc = json!({
        "median_le": s.life_expectancy.median,
        "le_q25": s.life_expectancy.q25,
        "le_q75": s.life_expectancy.q75,
        "median_x_at_death": s.hrqol_at_death.median,
        "xq25": s.hrqol_at_death.q25,
        "xq75": s.hrqol_at_death.q75,
        "median_haly": s.haly.median,
        "haly_q25": s.haly.q25,
        "haly_q75": s.haly.q75,
        "manifest": manifest.to_value(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary values are finite");
    text.push('\n');
    text
}

/// Grid age `k·dt` without the representation noise of the product.
fn format_age(k: usize, dt: f64) -> String {
    let s = format!("{:.9}", k as f64 * dt);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_curves(result: &PopulationResult) -> String {
    let c = &result.quantile_curves;
    let mut out = String::from("age,q25,q50,q75\n");
    for k in 0..c.len() {
        let _ = writeln!(out, "{},{},{},{}", format_age(k, c.dt), c.q25[k], c.q50[k], c.q75[k]);
    }
    out
}

pub fn render_individuals(result: &PopulationResult) -> String {
    let mut out = String::from("id,tau,x_at_death,haly\n");
    for (id, t) in result.trajectories.iter().enumerate() {
        let _ = writeln!(out, "{id},{},{},{}", t.tau, t.x_at_death, t.haly);
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_summary(result: &PopulationResult, manifest: &RunManifest, path: &Path) -> Result<(), Error> {
    write_text(path, &render_summary(result, manifest))
}

pub fn write_curves(result: &PopulationResult, path: &Path) -> Result<(), Error> {
    write_text(path, &render_curves(result))
}

pub fn write_individuals(result: &PopulationResult, path: &Path) -> Result<(), Error> {
    write_text(path, &render_individuals(result))
}

/// Long-format dump `id,age,hrqol` of every path up to and including the
/// first grid age at or after death, where the stopped value is 0.
pub fn write_paths(result: &PopulationResult, path: &Path) -> Result<(), Error> {
    let wrap = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    writeln!(out, "id,age,hrqol").map_err(wrap)?;
    for (id, t) in result.trajectories.iter().enumerate() {
        let shown = (t.living_values().len() + 1).min(t.grid_len());
        for k in 0..shown {
            writeln!(out, "{id},{},{}", format_age(k, t.dt()), t.value_at(k)).map_err(wrap)?;
        }
    }
    out.flush().map_err(wrap)
}
