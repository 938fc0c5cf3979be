//! Fitting diffusion and jump parameters to cumulative default curves.

mod curves;
pub mod nelder_mead;

pub use curves::{read_curves, write_curves, HistoricalCurve, CURVE_HEADER};
pub use nelder_mead::{minimize, Minimum, NelderMeadOptions, TraceEntry};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::{cumulative_default_rate, estimate_density, uniform_grid, DEFAULT_GRID_POINTS};
use crate::mc::{simulate, CorrelationMode, SimConfig};
use crate::model::{JumpDist, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub sigma: (f64, f64),
    pub lambda: (f64, f64),
    pub jump_mean: (f64, f64),
    pub jump_std: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            sigma: (1e-4, 5.0),
            lambda: (0.0, 5.0),
            jump_mean: (-5.0, 5.0),
            jump_std: (1e-4, 5.0),
        }
    }
}

/// Per-firm parameters adjusted by the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmParams {
    pub sigma: f64,
    pub jump_mean: f64,
    pub jump_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSpec {
    /// Firms to fit, with starting values. Curves are matched to firms by
    /// name.
    pub start: SystemSpec,
    pub bounds: Bounds,
    /// Holds `lambda` at this value instead of fitting it.
    pub fixed_lambda: Option<f64>,
    pub n_runs: u64,
    pub seed: u64,
    pub workers: usize,
    pub options: NelderMeadOptions,
}

impl CalibrationSpec {
    pub fn new(start: SystemSpec) -> Self {
        CalibrationSpec {
            start,
            bounds: Bounds::default(),
            fixed_lambda: None,
            n_runs: 50_000,
            seed: 0,
            workers: 0,
            options: NelderMeadOptions::default(),
        }
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig {
            n_runs: self.n_runs,
            seed: self.seed,
            workers: self.workers,
            grid: Vec::new(),
            // Marginal curves do not depend on the coupling.
            correlation: CorrelationMode::Off,
        }
    }

    fn free_lambda(&self) -> bool {
        self.fixed_lambda.is_none()
    }

    fn layout_bounds(&self) -> Vec<(f64, f64)> {
        let b = &self.bounds;
        let mut v = Vec::new();
        if self.free_lambda() {
            v.push(b.lambda);
        }
        for _ in &self.start.firms {
            v.extend([b.sigma, b.jump_mean, b.jump_std]);
        }
        v
    }

    fn encode(&self, system: &SystemSpec) -> Result<Vec<f64>> {
        let mut v = Vec::new();
        if self.free_lambda() {
            v.push(system.lambda);
        }
        for f in &system.firms {
            v.extend([f.effective_sigma()?, f.jump.mean(), f.jump.std()]);
        }
        Ok(v)
    }

    /// System with the parameter vector `x` substituted into the start.
    pub fn decode(&self, x: &[f64]) -> Result<SystemSpec> {
        let mut sys = self.start.clone();
        let mut k = 0;
        sys.lambda = match self.fixed_lambda {
            Some(l) => l,
            None => {
                k = 1;
                x[0]
            }
        };
        for f in sys.firms.iter_mut() {
            let (s, m, sd) = (x[k], x[k + 1], x[k + 2]);
            k += 3;
            apply_params(
                f,
                FirmParams {
                    sigma: s,
                    jump_mean: m,
                    jump_std: sd,
                },
            )?;
        }
        Ok(sys)
    }
}

/// Rescales the volatility row to `sigma` (keeping its direction) and sets
/// the jump law.
pub fn apply_params(firm: &mut crate::model::FirmSpec, p: FirmParams) -> Result<()> {
    let s0 = firm.effective_sigma()?;
    for v in firm.sigma_row.iter_mut() {
        *v *= p.sigma / s0;
    }
    firm.jump = JumpDist::normal(p.jump_mean, p.jump_std);
    Ok(())
}

/// Model cumulative default rates of every firm at `times`, from the kernel
/// density estimate of a fixed-seed simulation.
pub fn model_curves(system: &SystemSpec, config: &SimConfig, times: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let samples = simulate(system, config)?;
    let grid = uniform_grid(system.horizon, DEFAULT_GRID_POINTS);
    (0..system.n_firms())
        .map(|i| {
            let est = estimate_density(&samples, i, &grid)?;
            times[i].iter().map(|&t| cumulative_default_rate(&est, t)).collect()
        })
        .collect()
}

/// `sum_i sqrt(sum_j ((P_i(t_j) - A_i(t_j)) / t_j)^2)`.
pub fn curve_distance(model: &[Vec<f64>], curves: &[&HistoricalCurve]) -> f64 {
    model
        .iter()
        .zip(curves)
        .map(|(p, c)| {
            p.iter()
                .zip(&c.points)
                .map(|(pm, &(t, a))| ((pm - a) / t).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

fn match_curves<'a>(system: &SystemSpec, curves: &'a [HistoricalCurve]) -> Result<Vec<&'a HistoricalCurve>> {
    system
        .firms
        .iter()
        .map(|f| {
            let c = curves
                .iter()
                .find(|c| c.rating == f.name)
                .ok_or_else(|| Error::Calibration(format!("no curve for firm {}", f.name)))?;
            c.validate()?;
            if let Some(&(t, _)) = c.points.last() {
                if t > system.horizon {
                    return Err(Error::Calibration(format!(
                        "curve {} extends to {t}, beyond the horizon {}",
                        c.rating, system.horizon
                    )));
                }
            }
            Ok(c)
        })
        .collect()
}

/// Objective at `system` with common random numbers from `config.seed`.
pub fn objective(system: &SystemSpec, curves: &[HistoricalCurve], config: &SimConfig) -> Result<f64> {
    let matched = match_curves(system, curves)?;
    let times: Vec<Vec<f64>> = matched.iter().map(|c| c.times()).collect();
    let model = model_curves(system, config, &times)?;
    Ok(curve_distance(&model, &matched))
}

/// Root mean square difference.
pub fn rmse(model: &[f64], market: &[f64]) -> Result<f64> {
    if model.is_empty() || model.len() != market.len() {
        return Err(Error::domain(
            "rmse",
            format!("need equal nonempty lengths, got {} and {}", model.len(), market.len()),
        ));
    }
    let s: f64 = model.iter().zip(market).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / model.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub system: SystemSpec,
    pub objective: f64,
    pub minimum: Minimum,
}

impl CalibrationResult {
    pub fn params(&self) -> Vec<(String, FirmParams)> {
        self.system
            .firms
            .iter()
            .map(|f| {
                (
                    f.name.clone(),
                    FirmParams {
                        sigma: f.effective_sigma().unwrap_or(f64::NAN),
                        jump_mean: f.jump.mean(),
                        jump_std: f.jump.std(),
                    },
                )
            })
            .collect()
    }
}

pub fn calibrate(spec: &CalibrationSpec, curves: &[HistoricalCurve]) -> Result<CalibrationResult> {
    if curves.is_empty() {
        return Err(Error::Calibration("no curves".into()));
    }
    match_curves(&spec.start, curves)?;
    let config = spec.sim_config();
    let bounds = spec.layout_bounds();
    let mut start_sys = spec.start.clone();
    if let Some(l) = spec.fixed_lambda {
        start_sys.lambda = l;
    }
    let x0 = spec.encode(&start_sys)?;
    let steps: Vec<f64> = x0
        .iter()
        .zip(&bounds)
        .map(|(x, (lo, hi))| (0.1 * x.abs()).max(0.02).min(0.25 * (hi - lo)))
        .collect();

    let mut failures = 0usize;
    let mut last_err = None;
    let mut f = |x: &[f64]| match spec.decode(x).and_then(|s| objective(&s, curves, &config)) {
        Ok(v) => v,
        Err(e) => {
            failures += 1;
            last_err = Some(e);
            f64::INFINITY
        }
    };
    // The fixed-seed objective is flat at small scales, so a collapsed
    // simplex is restarted from its best vertex while that still helps and
    // the iteration budget lasts.
    let mut min = minimize(&mut f, &x0, &steps, &bounds, spec.options);
    while min.converged && min.iterations < spec.options.max_iter && min.value > 0.0 {
        let remaining = spec.options.max_iter - min.iterations;
        let opts = NelderMeadOptions {
            max_iter: remaining,
            ..spec.options
        };
        let restart_steps: Vec<f64> = min
            .point
            .iter()
            .zip(&bounds)
            .map(|(x, (lo, hi))| (0.1 * x.abs()).max(0.02).min(0.25 * (hi - lo)))
            .collect();
        let next = minimize(&mut f, &min.point, &restart_steps, &bounds, opts);
        let improved = next.value < min.value * (1.0 - 1e-3);
        min = merge_runs(min, next);
        if !improved {
            break;
        }
    }
    if !min.value.is_finite() {
        return Err(Error::Calibration(format!(
            "all {failures} failing evaluations; last error: {}",
            last_err.map_or_else(|| "none".into(), |e| e.to_string())
        )));
    }
    Ok(CalibrationResult {
        system: spec.decode(&min.point)?,
        objective: min.value,
        minimum: min,
    })
}

/// Joins the traces of consecutive minimizer runs, keeping the better end.
fn merge_runs(first: Minimum, second: Minimum) -> Minimum {
    let offset = first.iterations;
    let mut trace = first.trace;
    // The restart begins at the previous best, so its values never rise.
    for mut e in second.trace.into_iter().skip(1) {
        e.iteration += offset;
        trace.push(e);
    }
    let (point, value) = if second.value < first.value {
        (second.point, second.value)
    } else {
        (first.point, first.value)
    };
    Minimum {
        point,
        value,
        iterations: offset + second.iterations,
        evaluations: first.evaluations + second.evaluations,
        converged: second.converged,
        trace,
    }
}
