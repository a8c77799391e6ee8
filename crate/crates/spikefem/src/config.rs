//! Flat `key = value` run configuration.
//!
//! Sources are layered: built-in defaults, then an optional config file, then
//! `SPIKEFEM_*` environment variables, then command-line overrides. Every key
//! is checked against the known set and the result is validated before any
//! work starts.

use std::fs;
use std::path::{Path, PathBuf};

use spikefem_core::encoder::GammaSetting;
use spikefem_core::{FaultKind, FaultSpec, NetworkConfig, Rhs};

pub const ENV_PREFIX: &str = "SPIKEFEM_";

pub const DEFAULT_ABLATION_GRID: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
pub const DEFAULT_DROP_GRID: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), reason: reason.into() }
}

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "mesh.n_side",
    "problem.rhs",
    "network.npm",
    "network.gamma",
    "network.lambda_d",
    "network.dt",
    "network.t_total",
    "network.decode_window",
    "network.eta",
    "faults.ablation_p",
    "faults.drop_p",
    "experiment.npm_values",
    "experiment.p_values",
    "experiment.n_trials",
    "experiment.master_seed",
    "experiment.raster_k",
    "experiment.svg",
    "run.jobs",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_side: usize,
    pub rhs: Rhs,
    pub network: NetworkConfig,
    pub faults: FaultSpec,
    pub npm_values: Vec<usize>,
    /// `None` selects the default grid for the sweep kind.
    pub p_values: Option<Vec<f64>>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub raster_k: usize,
    pub svg: bool,
    pub jobs: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_side: 17,
            rhs: Rhs::Paper,
            network: NetworkConfig::default(),
            faults: FaultSpec::NONE,
            npm_values: vec![4, 16],
            p_values: None,
            n_trials: 5,
            master_seed: 1,
            raster_k: 50,
            svg: true,
            jobs: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, format!("`{value}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "mesh.n_side" => self.n_side = parse_num(key, v)?,
            "problem.rhs" => self.rhs = Rhs::parse(v).ok_or_else(|| bad(key, "expected `paper` or `zero`"))?,
            "network.npm" => self.network.npm = parse_num(key, v)?,
            "network.gamma" => {
                self.network.gamma = if v == "auto" { GammaSetting::Auto } else { GammaSetting::Fixed(parse_num(key, v)?) }
            }
            "network.lambda_d" => self.network.lambda_d = parse_num(key, v)?,
            "network.dt" => self.network.dt = parse_num(key, v)?,
            "network.t_total" => self.network.t_total = parse_num(key, v)?,
            "network.decode_window" => self.network.decode_window = parse_num(key, v)?,
            "network.eta" => self.network.eta = parse_num(key, v)?,
            "faults.ablation_p" => self.faults.ablation_p = parse_num(key, v)?,
            "faults.drop_p" => self.faults.drop_p = parse_num(key, v)?,
            "experiment.npm_values" => self.npm_values = parse_list(key, v)?,
            "experiment.p_values" => {
                self.p_values = if v.is_empty() || v == "default" { None } else { Some(parse_list(key, v)?) }
            }
            "experiment.n_trials" => self.n_trials = parse_num(key, v)?,
            "experiment.master_seed" => self.master_seed = parse_num(key, v)?,
            "experiment.raster_k" => self.raster_k = parse_num(key, v)?,
            "experiment.svg" => self.svg = parse_num(key, v)?,
            "run.jobs" => self.jobs = parse_num(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Current value of a key, formatted as it would be written in a file.
    pub fn get(&self, key: &str) -> Option<String> {
        let n = &self.network;
        Some(match key {
            "mesh.n_side" => self.n_side.to_string(),
            "problem.rhs" => self.rhs.name().to_string(),
            "network.npm" => n.npm.to_string(),
            "network.gamma" => match n.gamma {
                GammaSetting::Auto => "auto".to_string(),
                GammaSetting::Fixed(g) => g.to_string(),
            },
            "network.lambda_d" => n.lambda_d.to_string(),
            "network.dt" => n.dt.to_string(),
            "network.t_total" => n.t_total.to_string(),
            "network.decode_window" => n.decode_window.to_string(),
            "network.eta" => n.eta.to_string(),
            "faults.ablation_p" => self.faults.ablation_p.to_string(),
            "faults.drop_p" => self.faults.drop_p.to_string(),
            "experiment.npm_values" => join(&self.npm_values),
            "experiment.p_values" => self.p_values.as_deref().map(join).unwrap_or_else(|| "default".to_string()),
            "experiment.n_trials" => self.n_trials.to_string(),
            "experiment.master_seed" => self.master_seed.to_string(),
            "experiment.raster_k" => self.raster_k.to_string(),
            "experiment.svg" => self.svg.to_string(),
            "run.jobs" => self.jobs.to_string(),
            "output.dir" => self.output_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or(ConfigError::Syntax { path: source.to_string(), line: i + 1 })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `SPIKEFEM_SECTION_NAME` variables, e.g. `SPIKEFEM_NETWORK_LAMBDA_D`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
            let key = KEYS
                .iter()
                .find(|k| env_name(k) == name)
                .ok_or_else(|| ConfigError::UnknownKey(format!("{ENV_PREFIX}{rest}")))?;
            self.set(key, &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_side < 3 {
            return Err(bad("mesh.n_side", "must be >= 3 so the mesh has interior nodes"));
        }
        let n = &self.network;
        if n.npm == 0 {
            return Err(bad("network.npm", "must be >= 1"));
        }
        if let GammaSetting::Fixed(g) = n.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(bad("network.gamma", "must be `auto` or a positive number"));
            }
        }
        for key in ["network.lambda_d", "network.dt", "network.t_total"] {
            let v: f64 = self.get(key).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, "must be positive"));
            }
        }
        if !(n.dt * n.lambda_d < 0.1) {
            return Err(bad("network.dt", "dt * lambda_d must be < 0.1"));
        }
        if n.t_total < n.dt {
            return Err(bad("network.t_total", "must be at least one time step"));
        }
        if !(n.decode_window > 0.0 && n.decode_window <= 1.0) {
            return Err(bad("network.decode_window", "must be in (0, 1]"));
        }
        if !(n.eta > 0.0 && n.eta < 1.0) {
            return Err(bad("network.eta", "must be in (0, 1)"));
        }
        for (key, p) in [("faults.ablation_p", self.faults.ablation_p), ("faults.drop_p", self.faults.drop_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(key, "must be in [0, 1]"));
            }
        }
        if self.npm_values.is_empty() || self.npm_values.contains(&0) {
            return Err(bad("experiment.npm_values", "must be a non-empty list of positive integers"));
        }
        if let Some(ps) = &self.p_values {
            if ps.is_empty() || ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(bad("experiment.p_values", "must be a non-empty list of probabilities"));
            }
        }
        if self.n_trials == 0 {
            return Err(bad("experiment.n_trials", "must be >= 1"));
        }
        if self.jobs == 0 {
            return Err(bad("run.jobs", "must be >= 1"));
        }
        Ok(())
    }

    pub fn sweep_grid(&self, kind: FaultKind) -> Vec<f64> {
        self.p_values.clone().unwrap_or_else(|| match kind {
            FaultKind::Ablation => DEFAULT_ABLATION_GRID.to_vec(),
            FaultKind::Drop => DEFAULT_DROP_GRID.to_vec(),
        })
    }

    /// `key=value` lines for every key.
    pub fn to_manifest_lines(&self) -> Vec<String> {
        KEYS.iter().map(|k| format!("{k}={}", self.get(k).expect("known key"))).collect()
    }
}

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

/// Layered configuration builder.
#[derive(Debug, Default)]
pub struct ConfigSources {
    pub file: Option<PathBuf>,
    pub env: Vec<(String, String)>,
    /// Applied last, in order.
    pub overrides: Vec<(String, String)>,
}

impl ConfigSources {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.file {
            cfg.apply_file(path)?;
        }
        cfg.apply_env(self.env.iter().cloned())?;
        for (k, v) in &self.overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
