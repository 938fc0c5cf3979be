//! Scenario files.
//!
//! ```toml
//! horizon = 10.0
//! lambda = 0.1
//! rho = 0.4
//!
//! [run]
//! runs = 100000
//! seed = 42
//!
//! [firm.A]
//! sigma = 0.09
//! jump_mean = -0.2
//! jump_std = 0.5
//! ```

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use jdfpt_core::mc::CorrelationMode;
use jdfpt_core::model::{sigma_from_correlation, FirmSpec, JumpDist, SystemSpec, Threshold};

use crate::CliError;

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_drift() -> f64 {
    -0.001
}
fn default_runs() -> u64 {
    100_000
}
fn default_grid_points() -> usize {
    512
}
fn default_horizons() -> Vec<f64> {
    vec![1.0, 2.0, 5.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmSection {
    pub sigma: f64,
    pub jump_mean: f64,
    pub jump_std: f64,
    #[serde(default = "two")]
    pub x0: f64,
    #[serde(default = "default_drift")]
    pub mu: f64,
    /// Threshold growth; defaults to `mu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub kappa_log: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
    /// Reporting times; empty means yearly.
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub link: CorrelationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            runs: default_runs(),
            seed: 0,
            workers: 0,
            grid: Vec::new(),
            grid_points: default_grid_points(),
            link: CorrelationMode::default(),
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSection {
    /// Diffusion correlation; defaults to the top-level `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
    /// Standardized distances by firm name; derived from the firms when
    /// empty.
    #[serde(default)]
    pub z: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default = "calib_runs")]
    pub runs_per_eval: u64,
    #[serde(default = "calib_iter")]
    pub max_iter: usize,
    #[serde(default = "calib_tol")]
    pub tol: f64,
    /// Fit `lambda` on the first firm only and hold it for the others.
    #[serde(default = "yes")]
    pub shared_lambda: bool,
}

fn calib_runs() -> u64 {
    50_000
}
fn calib_iter() -> usize {
    200
}
fn calib_tol() -> f64 {
    1e-3
}
fn yes() -> bool {
    true
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            runs_per_eval: calib_runs(),
            max_iter: calib_iter(),
            tol: calib_tol(),
            shared_lambda: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub horizon: f64,
    pub lambda: f64,
    #[serde(default = "one")]
    pub mean_interjump: f64,
    /// Common correlation of every pair of diffusions.
    #[serde(default)]
    pub rho: f64,
    /// Full correlation matrix in firm order; overrides `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSection>,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub firm: IndexMap<String, FirmSection>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.run.runs == 0 {
            return bad("run.runs must be at least 1".into());
        }
        if self.run.grid_points < 2 {
            return bad("run.grid_points must be at least 2".into());
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return bad(format!("rho = {} outside [-1, 1]", self.rho));
        }
        if let Some(c) = &self.correlation {
            let n = self.firm.len();
            if c.len() != n || c.iter().any(|r| r.len() != n) {
                return bad(format!("correlation must be {n} x {n} to match the firms"));
            }
        }
        for (k, &t) in self.run.grid.iter().enumerate() {
            if !(t > 0.0 && t <= self.horizon) {
                return bad(format!("run.grid[{k}] = {t} outside (0, horizon]"));
            }
        }
        if let Some(a) = &self.analytic {
            for (k, &t) in a.horizons.iter().enumerate() {
                if !(t > 0.0) {
                    return bad(format!("analytic.horizons[{k}] = {t} must be positive"));
                }
            }
            for (name, &z) in &a.z {
                if !(z > 0.0) {
                    return bad(format!("analytic.z.{name} = {z} must be positive"));
                }
            }
        }
        Ok(())
    }

    fn correlation_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.firm.len();
        self.correlation.clone().unwrap_or_else(|| {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { self.rho }).collect())
                .collect()
        })
    }

    /// The model described by the firm sections, validated.
    pub fn system(&self) -> Result<SystemSpec, CliError> {
        if self.firm.is_empty() {
            return Err(CliError::Config("no [firm.<name>] sections".into()));
        }
        let sigmas: Vec<f64> = self.firm.values().map(|f| f.sigma).collect();
        let rows = sigma_from_correlation(&sigmas, &self.correlation_matrix())
            .map_err(|e| CliError::Config(format!("volatility matrix: {e}")))?;
        let firms = self
            .firm
            .iter()
            .zip(rows)
            .map(|((name, f), row)| firm_spec(name, f, row))
            .collect();
        let sys = SystemSpec {
            firms,
            lambda: self.lambda,
            mean_interjump: self.mean_interjump,
            horizon: self.horizon,
        };
        sys.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(sys)
    }

    /// Names and standardized distances for the analytic tables.
    pub fn analytic_inputs(&self) -> Result<AnalyticInputs, CliError> {
        let a = self.analytic.clone().unwrap_or(AnalyticSection {
            rho: None,
            horizons: default_horizons(),
            z: IndexMap::new(),
        });
        let rho = a.rho.unwrap_or(self.rho);
        if !a.z.is_empty() {
            return Ok(AnalyticInputs {
                names: a.z.keys().cloned().collect(),
                z: a.z.values().copied().collect(),
                rho,
                horizons: a.horizons,
            });
        }
        let sys = self.system()?;
        let z = sys
            .firms
            .iter()
            .map(|f| f.standardized_distance())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(AnalyticInputs {
            names: sys.firms.iter().map(|f| f.name.clone()).collect(),
            z,
            rho,
            horizons: a.horizons,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticInputs {
    pub names: Vec<String>,
    pub z: Vec<f64>,
    pub rho: f64,
    pub horizons: Vec<f64>,
}

pub fn firm_spec(name: &str, f: &FirmSection, sigma_row: Vec<f64>) -> FirmSpec {
    FirmSpec {
        name: name.to_string(),
        mu: f.mu,
        sigma_row,
        jump: JumpDist::normal(f.jump_mean, f.jump_std),
        x0: f.x0,
        threshold: Threshold::new(f.gamma.unwrap_or(f.mu), f.kappa_log),
    }
}
