//! The subcommands as library functions: each computes a result struct and
//! renders it as named tables.

use std::path::Path;

use jdfpt_core::analytic::{default_probability, pairwise_default_correlation};
use jdfpt_core::calib::{self, CalibrationResult, CalibrationSpec, FirmParams, HistoricalCurve, NelderMeadOptions};
use jdfpt_core::kde::{cumulative_default_rate, estimate_density, uniform_grid, DensityEstimate};
use jdfpt_core::mc::{simulate, simulated_default_correlation, CorrelationMode, FptSampleSet, SimConfig};
use jdfpt_core::model::{build_sigma_matrix, SystemSpec};
use jdfpt_core::Error;

use crate::config::{firm_spec, AnalyticInputs, Scenario};
use crate::output::{time_label, Cell, Table};
use crate::CliError;

/// Undefined correlations (no variance in a default indicator) become NaN.
fn or_nan(r: jdfpt_core::Result<f64>) -> Result<f64, CliError> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::UndefinedCorrelation(_)) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

/// Firm names made safe for file names.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Evaluates `f` on the lower triangle and mirrors it.
fn symmetric(n: usize, mut f: impl FnMut(usize, usize) -> Result<f64, CliError>) -> Result<Vec<Vec<f64>>, CliError> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v = f(i, j)?;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

fn matrix_table(names: &[String], m: &[Vec<f64>]) -> Table {
    let mut t = Table::new(std::iter::once("firm".to_string()).chain(names.iter().cloned()));
    for (name, row) in names.iter().zip(m) {
        t.push(
            std::iter::once(Cell::from(name.as_str()))
                .chain(row.iter().map(|&v| v.into()))
                .collect(),
        );
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticTables {
    pub names: Vec<String>,
    pub z: Vec<f64>,
    pub rho: f64,
    pub horizons: Vec<f64>,
    /// `[firm][horizon]`.
    pub probabilities: Vec<Vec<f64>>,
    /// `[horizon][i][j]`; the diagonal pairs two firms with the same
    /// distance.
    pub correlations: Vec<Vec<Vec<f64>>>,
}

pub fn analytic_tables(inputs: AnalyticInputs) -> Result<AnalyticTables, CliError> {
    let AnalyticInputs {
        names,
        z,
        rho,
        horizons,
    } = inputs;
    let probabilities = z
        .iter()
        .map(|&zi| {
            horizons
                .iter()
                .map(|&t| default_probability(zi, t))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let correlations = horizons
        .iter()
        .map(|&t| symmetric(z.len(), |i, j| or_nan(pairwise_default_correlation(z[i], z[j], rho, t))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnalyticTables {
        names,
        z,
        rho,
        horizons,
        probabilities,
        correlations,
    })
}

impl AnalyticTables {
    pub fn tables(&self) -> Vec<(String, Table)> {
        let mut p = Table::new(["firm", "z", "t_years", "probability"]);
        for (k, name) in self.names.iter().enumerate() {
            for (h, &t) in self.horizons.iter().enumerate() {
                p.push(vec![
                    name.as_str().into(),
                    self.z[k].into(),
                    t.into(),
                    self.probabilities[k][h].into(),
                ]);
            }
        }
        let mut out = vec![("analytic_probabilities".to_string(), p)];
        for (h, &t) in self.horizons.iter().enumerate() {
            out.push((
                format!("analytic_correlations_{}", time_label(t)),
                matrix_table(&self.names, &self.correlations[h]),
            ));
        }
        out
    }
}

fn sim_config(scn: &Scenario, grid: Vec<f64>) -> SimConfig {
    SimConfig {
        n_runs: scn.run.runs,
        seed: scn.run.seed,
        workers: scn.run.workers,
        grid,
        correlation: scn.run.link,
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub samples: FptSampleSet,
    pub densities: Vec<DensityEstimate>,
}

pub fn run_simulation(scn: &Scenario) -> Result<SimulationReport, CliError> {
    let sys = scn.system()?;
    let samples = simulate(&sys, &sim_config(scn, scn.run.grid.clone()))?;
    let grid = uniform_grid(sys.horizon, scn.run.grid_points);
    let densities = (0..sys.n_firms())
        .map(|i| estimate_density(&samples, i, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimulationReport { samples, densities })
}

impl SimulationReport {
    pub fn tables(&self) -> Result<Vec<(String, Table)>, CliError> {
        let s = &self.samples;
        let names = &s.firm_names;
        let mut out = Vec::new();
        for (name, est) in names.iter().zip(&self.densities) {
            let mut t = Table::new(["t_years", "density", "cumulative"]);
            for ((&g, &f), c) in est.grid.iter().zip(&est.density).zip(est.cumulative()) {
                t.push(vec![g.into(), f.into(), c.into()]);
            }
            out.push((format!("density_{}", file_stem(name)), t));
        }

        let mut rates = Table::new(["firm", "t_years", "indicator", "weighted", "weighted_se", "kde"]);
        for (i, name) in names.iter().enumerate() {
            for &t in &s.grid {
                let (w, se) = s.weighted_cumulative(i, t);
                let kde = cumulative_default_rate(&self.densities[i], t)?;
                rates.push(vec![
                    name.as_str().into(),
                    t.into(),
                    s.empirical_cumulative(i, t).into(),
                    w.into(),
                    se.into(),
                    kde.into(),
                ]);
            }
        }
        out.push(("default_rates".to_string(), rates));

        let mut bw = Table::new(["firm", "accepted", "runs", "gamma_shape", "gamma_rate", "bandwidth"]);
        for (name, est) in names.iter().zip(&self.densities) {
            let (a, b) = est
                .fit
                .map_or((Cell::Empty, Cell::Empty), |f| (f.beta.into(), f.alpha.into()));
            bw.push(vec![
                name.as_str().into(),
                Cell::Int(est.n_samples as u64),
                Cell::Int(est.run_count),
                a,
                b,
                est.bandwidth.into(),
            ]);
        }
        out.push(("bandwidths".to_string(), bw));

        let n = s.n_firms();
        for &t in &s.grid {
            let m = symmetric(n, |i, j| {
                if i == j {
                    Ok(1.0)
                } else {
                    or_nan(simulated_default_correlation(s, i, j, t))
                }
            })?;
            out.push((format!("correlations_{}", time_label(t)), matrix_table(names, &m)));
        }
        Ok(out)
    }
}

/// Standardized distances for the tables: the `[analytic.z]` entry when
/// present, else derived from the firm section.
fn table_distances(scn: &Scenario) -> Result<Vec<f64>, CliError> {
    let sys = scn.system()?;
    let given = scn.analytic.as_ref().map(|a| a.z.clone()).unwrap_or_default();
    sys.firms
        .iter()
        .map(|f| match given.get(&f.name) {
            Some(&z) => Ok(z),
            None => f.standardized_distance().map_err(CliError::from),
        })
        .collect()
}

/// Simulated and analytic correlations of every pair of firm types, each
/// pair simulated as its own two-firm system.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTables {
    pub names: Vec<String>,
    pub horizons: Vec<f64>,
    /// `[horizon][i][j]` for `j <= i`; NaN above the diagonal.
    pub simulated: Vec<Vec<Vec<f64>>>,
    pub analytic: Vec<Vec<Vec<f64>>>,
}

/// The two-firm system pairing firm types `i` and `j` at diffusion
/// correlation `rho`.
pub fn pair_system(scn: &Scenario, i: usize, j: usize, rho: f64) -> Result<SystemSpec, CliError> {
    let (ni, fi) = scn
        .firm
        .get_index(i)
        .ok_or_else(|| CliError::Usage(format!("no firm {i}")))?;
    let (nj, fj) = scn
        .firm
        .get_index(j)
        .ok_or_else(|| CliError::Usage(format!("no firm {j}")))?;
    let m = build_sigma_matrix(fi.sigma, fj.sigma, rho).map_err(|e| CliError::Config(e.to_string()))?;
    let second = if i == j { format!("{nj}'") } else { nj.clone() };
    let sys = SystemSpec {
        firms: vec![firm_spec(ni, fi, m[0].to_vec()), firm_spec(&second, fj, m[1].to_vec())],
        lambda: scn.lambda,
        mean_interjump: scn.mean_interjump,
        horizon: scn.horizon,
    };
    sys.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(sys)
}

pub fn pair_tables(scn: &Scenario) -> Result<PairTables, CliError> {
    let AnalyticInputs { rho, horizons, .. } = scn.analytic_inputs()?;
    if let Some(&t) = horizons.iter().find(|&&t| t > scn.horizon) {
        return Err(CliError::Config(format!(
            "table horizon {t} beyond the simulation horizon {}",
            scn.horizon
        )));
    }
    let names: Vec<String> = scn.firm.keys().cloned().collect();
    let z = table_distances(scn)?;
    let n = names.len();
    let nh = horizons.len();
    let mut simulated = vec![vec![vec![f64::NAN; n]; n]; nh];
    let mut analytic = simulated.clone();
    let cfg = sim_config(scn, horizons.clone());
    for i in 0..n {
        for j in 0..=i {
            let sys = pair_system(scn, i, j, rho)?;
            let samples = simulate(&sys, &cfg)?;
            for (h, &t) in horizons.iter().enumerate() {
                simulated[h][i][j] = or_nan(simulated_default_correlation(&samples, 0, 1, t))?;
                analytic[h][i][j] = or_nan(pairwise_default_correlation(z[i], z[j], rho, t))?;
            }
        }
    }
    Ok(PairTables {
        names,
        horizons,
        simulated,
        analytic,
    })
}

impl PairTables {
    pub fn tables(&self) -> Vec<(String, Table)> {
        let headers = std::iter::once("firm".to_string())
            .chain(self.names.iter().map(|n| format!("simulated_{n}")))
            .chain(self.names.iter().map(|n| format!("analytic_{n}")));
        self.horizons
            .iter()
            .enumerate()
            .map(|(h, &t)| {
                let mut tab = Table::new(headers.clone());
                for (i, name) in self.names.iter().enumerate() {
                    let lower = |m: &Vec<Vec<Vec<f64>>>| {
                        (0..self.names.len())
                            .map(move |j| if j <= i { Cell::Num(m[h][i][j]) } else { Cell::Empty })
                            .collect::<Vec<_>>()
                    };
                    let mut row = vec![Cell::from(name.as_str())];
                    row.extend(lower(&self.simulated));
                    row.extend(lower(&self.analytic));
                    tab.push(row);
                }
                (format!("table_{}", time_label(t)), tab)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmFit {
    pub name: String,
    pub lambda: f64,
    pub params: FirmParams,
    pub result: CalibrationResult,
    pub curve: HistoricalCurve,
    /// Model cumulative rates at the curve's times.
    pub fitted: Vec<f64>,
}

pub fn read_curve_file(path: &Path) -> Result<Vec<HistoricalCurve>, CliError> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::Usage(format!("cannot read data {}: {e}", path.display())))?;
    calib::read_curves(file).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn calibration_config(scn: &Scenario) -> SimConfig {
    SimConfig {
        n_runs: scn.calibration.runs_per_eval,
        seed: scn.run.seed,
        workers: scn.run.workers,
        grid: Vec::new(),
        correlation: CorrelationMode::Off,
    }
}

/// Fits every firm that has a curve, one at a time. With a shared jump
/// rate the first fitted firm sets `lambda` for the rest.
pub fn calibrate_curves(scn: &Scenario, curves: &[HistoricalCurve]) -> Result<Vec<FirmFit>, CliError> {
    let targets: Vec<(&String, &HistoricalCurve)> = scn
        .firm
        .keys()
        .filter_map(|name| curves.iter().find(|c| &c.rating == name).map(|c| (name, c)))
        .collect();
    if targets.is_empty() {
        return Err(CliError::Config("no curve matches any firm name".into()));
    }
    for (_, c) in &targets {
        if let Some(&(t, _)) = c.points.last() {
            if t > scn.horizon {
                return Err(CliError::Config(format!(
                    "curve {} extends to {t}, beyond the horizon {}",
                    c.rating, scn.horizon
                )));
            }
        }
    }
    let config = calibration_config(scn);
    let mut shared: Option<f64> = None;
    let mut fits = Vec::new();
    for (name, curve) in targets {
        let f = &scn.firm[name.as_str()];
        let start = SystemSpec {
            firms: vec![firm_spec(name, f, vec![f.sigma])],
            lambda: scn.lambda,
            mean_interjump: scn.mean_interjump,
            horizon: scn.horizon,
        };
        start.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let mut spec = CalibrationSpec::new(start);
        spec.fixed_lambda = shared;
        spec.n_runs = config.n_runs;
        spec.seed = config.seed;
        spec.workers = config.workers;
        spec.options = NelderMeadOptions {
            max_iter: scn.calibration.max_iter,
            tol: scn.calibration.tol,
        };
        let result = calib::calibrate(&spec, std::slice::from_ref(curve))?;
        if scn.calibration.shared_lambda && shared.is_none() {
            shared = Some(result.system.lambda);
        }
        let fitted = calib::model_curves(&result.system, &config, &[curve.times()])?.remove(0);
        let (_, params) = result.params().remove(0);
        fits.push(FirmFit {
            name: name.clone(),
            lambda: result.system.lambda,
            params,
            result,
            curve: curve.clone(),
            fitted,
        });
    }
    Ok(fits)
}

pub fn calibration_tables(fits: &[FirmFit]) -> Vec<(String, Table)> {
    let mut params = Table::new([
        "firm",
        "sigma",
        "lambda",
        "jump_mean",
        "jump_std",
        "objective",
        "iterations",
        "evaluations",
        "converged",
    ]);
    let mut trace = Table::new(["firm", "iteration", "objective", "diameter", "point"]);
    let mut fit = Table::new(["firm", "t_years", "observed", "model"]);
    for f in fits {
        let m = &f.result.minimum;
        params.push(vec![
            f.name.as_str().into(),
            f.params.sigma.into(),
            f.lambda.into(),
            f.params.jump_mean.into(),
            f.params.jump_std.into(),
            f.result.objective.into(),
            Cell::Int(m.iterations as u64),
            Cell::Int(m.evaluations as u64),
            Cell::from(if m.converged { "true" } else { "false" }),
        ]);
        for e in &m.trace {
            let point = e.best_point.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            trace.push(vec![
                f.name.as_str().into(),
                Cell::Int(e.iteration as u64),
                e.best_value.into(),
                e.diameter.into(),
                point.into(),
            ]);
        }
        for (&(t, a), &p) in f.curve.points.iter().zip(&f.fitted) {
            fit.push(vec![f.name.as_str().into(), t.into(), a.into(), p.into()]);
        }
    }
    vec![
        ("params".to_string(), params),
        ("trace".to_string(), trace),
        ("fit".to_string(), fit),
    ]
}
