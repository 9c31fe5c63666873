use std::fmt;
use std::path::{Path, PathBuf};

use gyrostat::sphere::GridSpec;
use gyrostat::{GyrostatParams, State};
use serde::Deserialize;

/// The published JSON Schema for [`RunConfig`].
pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

/// Settings read from a `--config` file. Every field is optional; command-line
/// flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsConfig>,
    pub k: Option<[f64; 3]>,
    pub grid: Option<String>,
    pub sigma_tolerance: Option<f64>,
    pub integrator_tolerance: Option<f64>,
    pub rank_tolerance: Option<f64>,
    pub sigma_samples: Option<usize>,
    pub k3_slices: Option<Vec<f64>>,
    pub region_samples: Option<usize>,
    pub state: Option<StateConfig>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "A")]
    pub inertia: [f64; 3],
    pub lambda: [f64; 3],
}

impl ParamsConfig {
    pub fn build(&self) -> gyrostat::Result<GyrostatParams> {
        GyrostatParams::new(self.inertia, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub omega: [f64; 3],
    pub nu: [f64; 3],
}

impl StateConfig {
    pub fn build(&self) -> gyrostat::Result<State> {
        State::new(self.omega.into(), self.nu.into())
    }
}

/// A config problem pinned to a line and column of the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
    }
}

/// Line and column (1-based) of the first `"key":` in `text`.
fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            let line = text[..at].matches('\n').count() + 1;
            let column = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
            return (line, column);
        }
        from = at + needle.len();
    }
    (1, 1)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: 0,
            column: 0,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })?;
        config.validate().map_err(|(key, message)| {
            let (line, column) = locate_key(text, key);
            ConfigError { path: path.to_path_buf(), line, column, message: format!("{key}: {message}") }
        })?;
        Ok(config)
    }

    /// Range checks serde cannot express, reported against the offending key.
    fn validate(&self) -> Result<(), (&'static str, String)> {
        if let Some(p) = &self.params {
            p.build().map_err(|e| ("params", e.to_string()))?;
        }
        if let Some(s) = &self.state {
            s.build().map_err(|e| ("state", e.to_string()))?;
        }
        if let Some(g) = &self.grid {
            g.parse::<GridSpec>().map_err(|e| ("grid", e))?;
        }
        if let Some(k) = self.k {
            if k.iter().any(|v| !v.is_finite()) {
                return Err(("k", "values must be finite".into()));
            }
        }
        let positive = |key: &'static str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err((key, format!("must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("sigma_tolerance", self.sigma_tolerance)?;
        positive("t_end", self.t_end)?;
        if let Some(t) = self.integrator_tolerance {
            if !(1e-14..=1e-3).contains(&t) {
                return Err(("integrator_tolerance", format!("must lie in [1e-14, 1e-3], got {t}")));
            }
        }
        if let Some(t) = self.rank_tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(("rank_tolerance", format!("must lie in (0, 1), got {t}")));
            }
        }
        if let Some(n) = self.sigma_samples {
            if n < 2 {
                return Err(("sigma_samples", format!("must be at least 2, got {n}")));
            }
        }
        if self.threads == Some(0) {
            return Err(("threads", "must be at least 1".into()));
        }
        if let Some(slices) = &self.k3_slices {
            if slices.iter().any(|v| !v.is_finite()) {
                return Err(("k3_slices", "values must be finite".into()));
            }
        }
        Ok(())
    }
}
