//! Scenario files: TOML with top-level budgets and one `[channel]` table.
//!
//! ```toml
//! name = "allpass"
//! w = 10.0
//! n_bins = 1000
//! p = 100.0
//! c = 9.0
//! methods = ["optimal", "water_pouring", "uniform", "limited_rate_wp"]
//!
//! [channel]
//! kind = "gaussian_mix"
//! alpha1 = 0.25
//! f1 = 0.25
//! alpha2 = 0.75
//! f2 = 0.75
//! normalized_pdf = true
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use fronthaul::ChannelGrid;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_BINS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Optimal,
    WaterPouring,
    Uniform,
    LimitedRateWp,
    FlatSweep,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Optimal => "optimal",
            Method::WaterPouring => "water_pouring",
            Method::Uniform => "uniform",
            Method::LimitedRateWp => "limited_rate_wp",
            Method::FlatSweep => "flat_sweep",
        };
        f.write_str(s)
    }
}

fn all_methods() -> Vec<Method> {
    vec![Method::Optimal, Method::WaterPouring, Method::Uniform, Method::LimitedRateWp]
}

fn yes() -> bool {
    true
}

/// Channel amplitude `|H(f)|` over `[0, w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Allpass,
    /// `alpha1 N(f1 w, 1) + alpha2 N(f2 w, 1)`, centers given as fractions of `w`.
    GaussianMix {
        alpha1: f64,
        f1: f64,
        alpha2: f64,
        f2: f64,
        /// Unit-area bumps when true, unit-peak bumps otherwise.
        #[serde(default = "yes")]
        normalized_pdf: bool,
    },
    /// `max H - H` of the inner channel.
    Inverse {
        inner: Box<ChannelSpec>,
    },
    /// `|H|^2` samples, one per line (last comma-separated column), `#` comments.
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bins: Option<usize>,
    pub p: f64,
    pub c: f64,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "is_default_outputs")]
    pub outputs: Outputs,
    pub channel: ChannelSpec,
}

fn is_default_outputs(o: &Outputs) -> bool {
    *o == Outputs::default()
}

/// 1-based line of the first `key = ...` assignment in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

fn invalid(text: &str, key: &str, msg: String) -> CliError {
    match line_of(text, key) {
        Some(n) => CliError::Config(format!("line {n}: {key}: {msg}")),
        None => CliError::Config(format!("{key}: {msg}")),
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    for (key, v) in [("w", cfg.w), ("p", cfg.p), ("c", cfg.c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(text, key, format!("must be positive and finite, got {v}")));
        }
    }
    if cfg.n_bins == Some(0) {
        return Err(invalid(text, "n_bins", "must be at least 1".into()));
    }
    if cfg.methods.is_empty() {
        return Err(invalid(text, "methods", "at least one method is required".into()));
    }
    check_channel(text, &cfg.channel)?;
    Ok(cfg)
}

fn check_channel(text: &str, spec: &ChannelSpec) -> Result<(), CliError> {
    match spec {
        ChannelSpec::GaussianMix { alpha1, f1, alpha2, f2, .. } => {
            for (key, v) in [("f1", *f1), ("f2", *f2)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(text, key, format!("center fraction must lie in [0, 1], got {v}")));
                }
            }
            for (key, v) in [("alpha1", *alpha1), ("alpha2", *alpha2)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(text, key, format!("weight must be finite and >= 0, got {v}")));
                }
            }
            Ok(())
        }
        ChannelSpec::Inverse { inner } => check_channel(text, inner),
        _ => Ok(()),
    }
}

pub fn render_config(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario configs always serialize")
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut cfg = parse_config(&text).map_err(|e| e.context(&path.display().to_string()))?;
    if let Some(dir) = path.parent() {
        resolve_paths(&mut cfg.channel, dir);
    }
    Ok(cfg)
}

/// Makes tabulated paths relative to the config file's directory.
fn resolve_paths(spec: &mut ChannelSpec, dir: &Path) {
    match spec {
        ChannelSpec::Tabulated { path } if path.is_relative() => *path = dir.join(&*path),
        ChannelSpec::Inverse { inner } => resolve_paths(inner, dir),
        _ => {}
    }
}

fn read_table(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap().trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            // a header row is allowed before any data
            Err(_) if out.is_empty() => continue,
            Err(_) => {
                return Err(CliError::Config(format!("{}: line {}: not a number: {field}", path.display(), i + 1)));
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{}: no samples", path.display())));
    }
    Ok(out)
}

fn standard_bump(f: f64, mu: f64, pdf: bool) -> f64 {
    let g = (-0.5 * (f - mu) * (f - mu)).exp();
    if pdf {
        g / (2.0 * std::f64::consts::PI).sqrt()
    } else {
        g
    }
}

/// `|H|` at the bin centers.
fn amplitude(spec: &ChannelSpec, w: f64, n: Option<usize>) -> Result<Vec<f64>, CliError> {
    let bins = n.unwrap_or(DEFAULT_BINS);
    let centers = || (0..bins).map(move |i| (i as f64 + 0.5) * w / bins as f64);
    Ok(match spec {
        ChannelSpec::Allpass => vec![1.0; bins],
        ChannelSpec::GaussianMix { alpha1, f1, alpha2, f2, normalized_pdf } => centers()
            .map(|f| {
                alpha1 * standard_bump(f, f1 * w, *normalized_pdf) + alpha2 * standard_bump(f, f2 * w, *normalized_pdf)
            })
            .collect(),
        ChannelSpec::Inverse { inner } => {
            let h = amplitude(inner, w, n)?;
            let top = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            h.iter().map(|v| top - v).collect()
        }
        ChannelSpec::Tabulated { path } => {
            let h2 = read_table(path)?;
            if let Some(k) = n {
                if k != h2.len() {
                    return Err(CliError::Config(format!("{}: {} samples but n_bins = {k}", path.display(), h2.len())));
                }
            }
            if let Some(bad) = h2.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CliError::Config(format!("{}: |H|^2 must be >= 0, got {bad}", path.display())));
            }
            h2.iter().map(|v| v.sqrt()).collect()
        }
    })
}

impl ScenarioConfig {
    /// Samples `|H|^2` on the configured grid; `bins` overrides `n_bins`.
    pub fn grid(&self, bins: Option<usize>) -> Result<ChannelGrid, CliError> {
        let n = bins.or(self.n_bins);
        let h = amplitude(&self.channel, self.w, n)?;
        Ok(ChannelGrid::new(self.w, h.iter().map(|v| v * v).collect())?)
    }
}
