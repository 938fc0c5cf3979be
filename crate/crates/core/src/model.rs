//! Domain types for the reduced multivariate jump-diffusion
//!
//! ```text
//! dX_i = mu_i dt + sum_k sigma_ik dW_k + dZ_i
//! ```
//!
//! where `X_i = ln V_i` is the log asset value of firm `i`, the `W_k` are
//! independent standard Brownian motions and `Z` is a compound jump process
//! whose jump instants are shared by every firm. Default happens when `X_i`
//! reaches the affine threshold `D_i(t) = gamma_i t + ln(kappa_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine default threshold on the log-value scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Liability growth rate.
    pub gamma: f64,
    /// `ln(kappa)`, log liability level at `t = 0`.
    pub kappa_log: f64,
}

impl Threshold {
    pub fn new(gamma: f64, kappa_log: f64) -> Self {
        Self { gamma, kappa_log }
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.gamma * t + self.kappa_log
    }
}

/// Jump-size distribution of a single firm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpDist {
    Normal { mean: f64, std: f64 },
}

impl JumpDist {
    pub fn normal(mean: f64, std: f64) -> Self {
        JumpDist::Normal { mean, std }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpDist::Normal { mean, .. } => mean,
        }
    }

    pub fn std(&self) -> f64 {
        match *self {
            JumpDist::Normal { std, .. } => std,
        }
    }

    /// Size of `count` superposed jumps driven by a single standard normal
    /// draw. The sum of `count` i.i.d. normals is itself normal, so one draw
    /// per instant is enough.
    #[inline]
    pub fn aggregate(&self, count: u32, standard_normal: f64) -> f64 {
        if count == 0 {
            return 0.0;
        }
        match *self {
            JumpDist::Normal { mean, std } => {
                let k = count as f64;
                k * mean + k.sqrt() * std * standard_normal
            }
        }
    }
}

/// Parameters of one firm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmSpec {
    pub name: String,
    /// Drift of the log value per unit time.
    pub mu: f64,
    /// Row `i` of the volatility matrix.
    pub sigma_row: Vec<f64>,
    pub jump: JumpDist,
    /// Initial log value `X_i(0)`.
    pub x0: f64,
    pub threshold: Threshold,
}

impl FirmSpec {
    pub fn threshold_at(&self, t: f64) -> f64 {
        self.threshold.at(t)
    }

    /// Scalar volatility `sqrt(sum_j sigma_ij^2)` of the projected
    /// one-dimensional process.
    pub fn effective_sigma(&self) -> Result<f64> {
        effective_sigma(&self.sigma_row)
    }

    /// Standardized distance to default at `t = 0`.
    pub fn standardized_distance(&self) -> Result<f64> {
        Ok((self.x0 - self.threshold.kappa_log) / self.effective_sigma()?)
    }
}

/// Threshold level of `firm` at time `t`.
pub fn threshold_at(firm: &FirmSpec, t: f64) -> f64 {
    firm.threshold_at(t)
}

/// Euclidean norm of a volatility row.
pub fn effective_sigma(sigma_row: &[f64]) -> Result<f64> {
    if sigma_row.is_empty() || sigma_row.iter().all(|&s| s == 0.0) {
        return Err(Error::DegenerateVolatility);
    }
    Ok(sigma_row.iter().map(|s| s * s).sum::<f64>().sqrt())
}

/// Two-firm volatility matrix with the `sigma_12 = 0` convention:
///
/// ```text
/// [[s1,        0                 ],
///  [rho * s2,  sqrt(1-rho^2) * s2]]
/// ```
pub fn build_sigma_matrix(sigma1: f64, sigma2: f64, rho12: f64) -> Result<[[f64; 2]; 2]> {
    if !(rho12.abs() <= 1.0) {
        return Err(Error::InvalidCorrelation(rho12));
    }
    if !(sigma1 > 0.0 && sigma2 > 0.0) {
        return Err(Error::domain(
            "build_sigma_matrix",
            format!("volatilities must be positive, got {sigma1}, {sigma2}"),
        ));
    }
    Ok([[sigma1, 0.0], [rho12 * sigma2, (1.0 - rho12 * rho12).sqrt() * sigma2]])
}

/// Lower-triangular `L` with `L L^T = diag(s) C diag(s)` for a correlation
/// matrix `C`. Reduces to [`build_sigma_matrix`] for two firms.
pub fn sigma_from_correlation(sigmas: &[f64], corr: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = sigmas.len();
    if corr.len() != n || corr.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidModel(format!("correlation matrix must be {n}x{n}")));
    }
    for i in 0..n {
        if (corr[i][i] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "correlation matrix diagonal entry {i} is {}, expected 1",
                corr[i][i]
            )));
        }
        if !(sigmas[i] > 0.0) {
            return Err(Error::domain(
                "sigma_from_correlation",
                format!("volatility {i} must be positive"),
            ));
        }
        for j in 0..i {
            if (corr[i][j] - corr[j][i]).abs() > 1e-12 {
                return Err(Error::InvalidModel("correlation matrix is not symmetric".into()));
            }
            if !(corr[i][j].abs() <= 1.0) {
                return Err(Error::InvalidCorrelation(corr[i][j]));
            }
        }
    }

    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let h = corr[i][j] * sigmas[i] * sigmas[j];
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h - s;
                // Semi-definite matrices (|rho| = 1) leave a zero pivot.
                if d < -1e-12 * h.abs().max(1.0) {
                    return Err(Error::InvalidModel(
                        "correlation matrix is not positive semi-definite".into(),
                    ));
                }
                l[i][i] = d.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = (h - s) / l[j][j];
            } else {
                l[i][j] = 0.0;
            }
        }
    }
    Ok(l)
}

/// A set of firms sharing one jump clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub firms: Vec<FirmSpec>,
    /// Jump intensity per unit time. Each jump instant carries a
    /// Poisson(`lambda * mean_interjump`) number of jumps.
    pub lambda: f64,
    /// Mean of the exponential gaps between jump instants.
    pub mean_interjump: f64,
    pub horizon: f64,
}

impl SystemSpec {
    pub fn n_firms(&self) -> usize {
        self.firms.len()
    }

    /// Number of independent Brownian drivers (columns of the volatility
    /// matrix).
    pub fn n_drivers(&self) -> usize {
        self.firms.first().map_or(0, |f| f.sigma_row.len())
    }

    /// Expected number of jumps per jump instant.
    pub fn jumps_per_instant(&self) -> f64 {
        self.lambda * self.mean_interjump
    }

    /// Instantaneous correlation of the diffusion parts of firms `i` and `j`.
    pub fn diffusion_correlation(&self, i: usize, j: usize) -> Result<f64> {
        let a = &self.firms[i].sigma_row;
        let b = &self.firms[j].sigma_row;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let rho = cov / (effective_sigma(a)? * effective_sigma(b)?);
        Ok(rho.clamp(-1.0, 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.firms.is_empty() {
            return Err(Error::InvalidModel("system has no firms".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "jump intensity must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.mean_interjump > 0.0 && self.mean_interjump.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mean interjump time must be positive, got {}",
                self.mean_interjump
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let m = self.n_drivers();
        for f in &self.firms {
            if f.sigma_row.len() != m {
                return Err(Error::InvalidModel(format!(
                    "firm {} has {} volatility entries, expected {m}",
                    f.name,
                    f.sigma_row.len()
                )));
            }
            f.effective_sigma()?;
            if !(f.jump.std() >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "firm {} has negative jump standard deviation",
                    f.name
                )));
            }
            if !(f.x0 > f.threshold_at(0.0)) {
                return Err(Error::InvalidModel(format!(
                    "firm {} starts at or below its default threshold",
                    f.name
                )));
            }
        }
        Ok(())
    }
}
