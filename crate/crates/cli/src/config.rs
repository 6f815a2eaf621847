use std::path::{Path, PathBuf};

use clap::ValueEnum;
use renorm_core::{McConfig, QuadratureConfig, Regulator, Spectrum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, spacing: Spacing::Linear }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, spacing: Spacing::Log }
    }

    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        let ok = self.count >= 1
            && self.min.is_finite()
            && self.max.is_finite()
            && self.min <= self.max
            && (self.spacing == Spacing::Linear || self.min > 0.0);
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!("invalid {name} {self:?}")))
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let steps = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / steps;
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.count {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    /// Values rounded to positive integers, duplicates removed.
    pub fn integer_values(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.values().iter().map(|v| v.round().max(1.0) as u64).collect();
        out.dedup();
        out
    }
}

/// Everything a subcommand needs, read from the `--config` JSON file.
/// Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub spectrum: Spectrum,
    pub regulator: Regulator,
    pub theta: f64,
    /// Quartic coupling λ.
    pub lambda: f64,
    pub s_grid: Grid,
    /// Cutoff values Λ.
    pub cutoff_grid: Grid,
    pub n_grid: Grid,
    pub theta_grid: Grid,
    /// Points `s` at which the flow table tracks `Φ`.
    pub flow_s: Vec<f64>,
    pub tol: f64,
    pub kappa_tol: f64,
    /// Highest order for the diagram tables.
    pub order: u32,
    pub quadrature: QuadratureConfig,
    pub mc: McConfig,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spectrum: Spectrum::harmonic(),
            regulator: Regulator::SharpCutoff { a: 1.0 },
            theta: 0.0,
            lambda: 1.0,
            s_grid: Grid::linear(-4.0, 4.0, 33),
            cutoff_grid: Grid::log(1e3, 1e5, 3),
            n_grid: Grid::log(10.0, 1000.0, 3),
            theta_grid: Grid::linear(-2.0, 2.0, 9),
            flow_s: vec![0.5, 1.0, 2.0],
            tol: 1e-12,
            kappa_tol: 1e-12,
            order: 8,
            quadrature: QuadratureConfig::default(),
            mc: McConfig::default(),
            output: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.regulator.validate()?;
        self.quadrature.validate()?;
        self.s_grid.validate("s_grid")?;
        self.cutoff_grid.validate("cutoff_grid")?;
        self.n_grid.validate("n_grid")?;
        self.theta_grid.validate("theta_grid")?;
        if self.cutoff_grid.min <= 0.0 {
            return Err(CliError::Config("cutoff_grid must be positive".into()));
        }
        if self.n_grid.min < 1.0 {
            return Err(CliError::Config("n_grid must start at 1 or above".into()));
        }
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {x}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("tol", self.tol)?;
        positive("kappa_tol", self.kappa_tol)?;
        if !self.theta.is_finite() || self.flow_s.iter().any(|s| !s.is_finite()) {
            return Err(CliError::Config("theta and flow_s must be finite".into()));
        }
        if self.flow_s.is_empty() {
            return Err(CliError::Config("flow_s must not be empty".into()));
        }
        Ok(())
    }
}
