//! TOML run configurations, one file per command.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// A list of values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        from: f64,
        to: f64,
        points: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Self::List(ref v) => v.clone(),
            Self::Range {
                from,
                to,
                points,
                log,
            } => {
                if points == 1 {
                    return vec![from];
                }
                (0..points)
                    .map(|i| {
                        if i == points - 1 {
                            return to;
                        }
                        let s = i as f64 / (points - 1) as f64;
                        if i == 0 {
                            from
                        } else if log {
                            (from.ln() + s * (to.ln() - from.ln())).exp()
                        } else {
                            from + s * (to - from)
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Initial transverse field: a number or `"inf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    #[default]
    Auto,
    Grid,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryName {
    Periodic,
    Open,
}

/// Piecewise-linear window density.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub e2: f64,
    #[serde(default = "one")]
    pub d: u32,
    pub l: Vec<u64>,
    pub t: Grid,
    pub alpha: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub correction: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub h_i: FieldValue,
    pub h_f: f64,
    #[serde(default = "unit")]
    pub j: f64,
    #[serde(default = "default_k_grid")]
    pub k_grid: usize,
    pub t: f64,
    pub l: Vec<u64>,
    pub alpha: Vec<u32>,
    #[serde(default = "default_f_samples")]
    pub f_samples: usize,
    #[serde(default)]
    pub scheme: SchemeName,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    /// Ground state of another Hamiltonian file.
    Ground { hamiltonian: PathBuf },
    /// Every spin along one direction (`+z`, `-z`, `+x`, `-x`, `+y`, `-y`).
    Product { direction: String },
}

/// `ε_t = a / √(1 + b·J·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionConfig {
    /// Chain lengths to analyse; defaults to all of `l`.
    pub l: Option<Vec<usize>>,
    pub windows: Vec<f64>,
    #[serde(default = "default_projection_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdConfig {
    pub hamiltonian: PathBuf,
    /// Overrides the boundary set in the Hamiltonian files.
    pub boundary: Option<BoundaryName>,
    pub initial: InitialConfig,
    pub l: Vec<usize>,
    #[serde(default = "unit")]
    pub j: f64,
    pub times: Grid,
    pub schedule: Schedule,
    pub projection: Option<ProjectionConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingConfig {
    pub e2: f64,
    #[serde(default = "one")]
    pub d: u32,
    pub l: u64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub x: Grid,
    pub counting: Option<CountingConfig>,
    pub weight: Option<WeightConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    pub e2: f64,
    #[serde(default = "one")]
    pub d: u32,
    pub l: Vec<u64>,
    pub t: Grid,
    pub eps: Vec<f64>,
    pub weight: Option<WeightConfig>,
}

fn one() -> u32 {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_eps() -> Vec<f64> {
    vec![0.01]
}

fn default_k_grid() -> usize {
    qspan_core::overlap::DEFAULT_K_GRID
}

fn default_f_samples() -> usize {
    201
}

fn default_projection_points() -> usize {
    200
}

/// A parsed config together with its location, for diagnostics and for
/// resolving relative paths.
#[derive(Debug, Clone)]
pub struct Loaded<C> {
    pub path: PathBuf,
    pub config: C,
}

impl<C: DeserializeOwned> Loaded<C> {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let config = toml::from_str(text).map_err(|e| CliError::ConfigSyntax {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            config,
        })
    }
}

impl<C> Loaded<C> {
    pub fn error(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.clone(),
            field: field.into(),
            message: message.into(),
        }
    }

    /// `p` relative to the directory holding the config.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    pub fn increasing(&self, field: &str, v: &[f64]) -> Result<()> {
        if v.is_empty() {
            return Err(self.error(field, "must not be empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.error(field, "values must be finite"));
        }
        if let Some(w) = v.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(self.error(
                field,
                format!("must increase strictly ({} is followed by {})", w[0], w[1]),
            ));
        }
        Ok(())
    }

    pub fn sorted_lengths<T: PartialOrd + Copy + std::fmt::Display>(
        &self,
        field: &str,
        v: &[T],
    ) -> Result<()> {
        if v.is_empty() {
            return Err(self.error(field, "must not be empty"));
        }
        if let Some(w) = v.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(self.error(
                field,
                format!(
                    "must be sorted ascending without repeats ({} then {})",
                    w[0], w[1]
                ),
            ));
        }
        Ok(())
    }

    pub fn positive(&self, field: &str, x: f64) -> Result<()> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(self.error(field, format!("must be positive and finite, got {x}")));
        }
        Ok(())
    }

    pub fn grid(&self, field: &str, g: &Grid) -> Result<Vec<f64>> {
        if let Grid::Range {
            from,
            to,
            points,
            log,
        } = *g
        {
            if points == 0 {
                return Err(self.error(field, "needs at least one point"));
            }
            if log && !(from > 0.0 && to > 0.0) {
                return Err(self.error(field, "log ranges need positive ends"));
            }
        }
        let v = g.values();
        self.increasing(field, &v)?;
        Ok(v)
    }
}
