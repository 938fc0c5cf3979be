//! Closed-form benchmarks for the two-firm diffusion without jumps.

mod bessel;
mod ddouble;

pub use bessel::{bessel_i, bessel_i_scaled};

use libm::erfc;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use ddouble::Dd;

/// Stop summing once an odd term drops below this.
pub const SERIES_TOL: f64 = 1e-12;
/// Upper bound on summed odd terms.
pub const MAX_TERMS: usize = 2001;

/// `Z = (X(0) - ln kappa) / sigma`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StandardizedDistance(pub f64);

impl StandardizedDistance {
    pub fn new(x0: f64, kappa_log: f64, sigma: f64) -> Self {
        StandardizedDistance((x0 - kappa_log) / sigma)
    }
}

impl From<f64> for StandardizedDistance {
    fn from(z: f64) -> Self {
        StandardizedDistance(z)
    }
}

fn check_t(func: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(func, format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// `2 N(-z / sqrt(t))`, the probability of hitting the threshold by `t`.
pub fn default_probability(z: impl Into<StandardizedDistance>, t: f64) -> Result<f64> {
    let z = z.into().0;
    check_t("default_probability", t)?;
    if !(z > 0.0) {
        return Err(Error::domain(
            "default_probability",
            format!("z must be positive, got {z}"),
        ));
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok(erfc(z / (2.0 * t).sqrt()))
}

/// Polar geometry of the pair in the decorrelated plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGeometry {
    pub alpha: f64,
    pub theta0: f64,
    pub r0: f64,
}

/// Wedge angle `alpha`, start angle `theta0` and start radius `r0`.
pub fn polar_geometry(z1: f64, z2: f64, rho: f64) -> Result<PolarGeometry> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    if !(z1 > 0.0 && z2 > 0.0) {
        return Err(Error::domain(
            "polar_geometry",
            format!("distances must be positive, got {z1}, {z2}"),
        ));
    }
    let s = (1.0 - rho * rho).sqrt();
    let alpha = if rho < 0.0 {
        (-s / rho).atan()
    } else if rho == 0.0 {
        FRAC_PI_2
    } else {
        PI + (-s / rho).atan()
    };
    let d = z1 - rho * z2;
    let theta0 = if d == 0.0 {
        FRAC_PI_2
    } else {
        let a = (z2 * s / d).atan();
        if a > 0.0 {
            a
        } else {
            PI + a
        }
    };
    let r0 = z2 / theta0.sin();
    Ok(PolarGeometry { alpha, theta0, r0 })
}

/// Partial sums of the odd-index series in `f64`.
fn survival_series(g: &PolarGeometry, t: f64) -> Result<f64> {
    let x = g.r0 * g.r0 / (4.0 * t);
    let pre = 2.0 * g.r0 / (2.0 * PI * t).sqrt();
    let mut sum = 0.0;
    let mut n = 1usize;
    while n <= MAX_TERMS {
        let nu = n as f64 * PI / g.alpha;
        let lo = bessel_i_scaled(0.5 * (nu - 1.0), x)?;
        let hi = bessel_i_scaled(0.5 * (nu + 1.0), x)?;
        let term = pre / n as f64 * (nu * g.theta0).sin() * (hi + lo);
        sum += term;
        if term.abs() < SERIES_TOL && n >= 5 {
            return Ok(sum);
        }
        n += 2;
    }
    Err(Error::NonConvergence {
        func: "union_default_probability",
        terms: MAX_TERMS / 2 + 1,
        partial_sum: 1.0 - sum,
    })
}

/// Same series in double-double. Returns the joint survival probability.
fn survival_series_dd(g: &PolarGeometry, t: f64) -> Result<Dd> {
    let r0 = Dd::new(g.r0);
    let tt = Dd::new(t);
    let x = r0.sqr() / tt.mul_f64(4.0);
    let ln_pre = (r0.mul_f64(2.0) / (ddouble::PI * tt).mul_f64(2.0).sqrt()).ln();
    let step = ddouble::PI / Dd::new(g.alpha);
    let theta0 = Dd::new(g.theta0);
    let mut sum = Dd::ZERO;
    let mut n = 1usize;
    while n <= MAX_TERMS {
        let nu = step.mul_f64(n as f64);
        let lo = bessel::bessel_i_scaled_dd((nu - Dd::ONE).mul_f64(0.5), x, ln_pre);
        let hi = bessel::bessel_i_scaled_dd((nu + Dd::ONE).mul_f64(0.5), x, ln_pre);
        let term = (nu * theta0).sin() * (hi + lo) / Dd::new(n as f64);
        sum = sum + term;
        if term.abs().hi < 1e-34 && n >= 5 {
            return Ok(sum);
        }
        n += 2;
    }
    Err(Error::NonConvergence {
        func: "union_default_probability",
        terms: MAX_TERMS / 2 + 1,
        partial_sum: 1.0 - sum.to_f64(),
    })
}

fn marginals(z1: f64, z2: f64, t: f64) -> Result<(f64, f64)> {
    Ok((default_probability(z1, t)?, default_probability(z2, t)?))
}

/// Probability that at least one of the two firms has defaulted by `t`.
pub fn union_default_probability(
    z1: impl Into<StandardizedDistance>,
    z2: impl Into<StandardizedDistance>,
    rho: f64,
    t: f64,
) -> Result<f64> {
    let (z1, z2) = (z1.into().0, z2.into().0);
    check_t("union_default_probability", t)?;
    let g = polar_geometry(z1, z2, rho)?;
    let (p1, p2) = marginals(z1, z2, t)?;
    let u = 1.0 - survival_series(&g, t)?;
    Ok(u.clamp(p1.max(p2), (p1 + p2).min(1.0)))
}

/// `f64` rounding in the series, relative to the correlation denominator,
/// above which the double-double path takes over.
const DD_SWITCH: f64 = 1e-8;
/// Below this correlation denominator even the double-double sum cannot
/// separate the joint probability from rounding.
const DD_FLOOR: f64 = 1e-24;

/// Probability that both firms have defaulted by `t`.
///
/// Computed as `P1 + P2 - P_union`. When the marginals are tiny that
/// difference is below `f64` resolution of `P_union`, so the series is then
/// summed in double-double.
pub fn joint_default_probability(
    z1: impl Into<StandardizedDistance>,
    z2: impl Into<StandardizedDistance>,
    rho: f64,
    t: f64,
) -> Result<f64> {
    let (z1, z2) = (z1.into().0, z2.into().0);
    joint_with(z1, z2, rho, t, true)
}

fn joint_with(z1: f64, z2: f64, rho: f64, t: f64, extended: bool) -> Result<f64> {
    check_t("joint_default_probability", t)?;
    let g = polar_geometry(z1, z2, rho)?;
    let (p1, p2) = marginals(z1, z2, t)?;
    let scale = (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt();
    let pij = if extended && 1e-14 / scale > DD_SWITCH {
        if scale < DD_FLOOR {
            return Err(Error::UndefinedCorrelation(format!(
                "marginals {p1:e} and {p2:e} are too small to resolve the joint probability"
            )));
        }
        let s = survival_series_dd(&g, t)?;
        ((s - Dd::ONE) + Dd::new(p1) + Dd::new(p2)).to_f64()
    } else {
        let u = 1.0 - survival_series(&g, t)?;
        p1 + p2 - u
    };
    Ok(pij.clamp(0.0, p1.min(p2)))
}

/// `(p_ij - p_i p_j) / sqrt(p_i (1 - p_i) p_j (1 - p_j))`.
pub fn default_correlation(p_i: f64, p_j: f64, p_ij: f64) -> Result<f64> {
    for p in [p_i, p_j] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::UndefinedCorrelation(format!(
                "marginal default probability {p} is degenerate"
            )));
        }
    }
    if !(p_ij >= 0.0 && p_ij <= p_i.min(p_j) * (1.0 + 1e-12)) {
        return Err(Error::domain(
            "default_correlation",
            format!("joint probability {p_ij} outside [0, min({p_i}, {p_j})]"),
        ));
    }
    Ok((p_ij - p_i * p_j) / (p_i * (1.0 - p_i) * p_j * (1.0 - p_j)).sqrt())
}

/// Default correlation of two diffusions by horizon `t`.
pub fn pairwise_default_correlation(
    z1: impl Into<StandardizedDistance>,
    z2: impl Into<StandardizedDistance>,
    rho: f64,
    t: f64,
) -> Result<f64> {
    let (z1, z2) = (z1.into().0, z2.into().0);
    let pij = joint_with(z1, z2, rho, t, true)?;
    let (p1, p2) = marginals(z1, z2, t)?;
    default_correlation(p1, p2, pij)
}

/// Plain `f64` evaluation: absolute error about `1e-14 / sqrt(P1 P2)`.
/// Enough where the result only steers a sampler.
pub(crate) fn pairwise_default_correlation_f64(z1: f64, z2: f64, rho: f64, t: f64) -> Result<f64> {
    let pij = joint_with(z1, z2, rho, t, false)?;
    let (p1, p2) = marginals(z1, z2, t)?;
    default_correlation(p1, p2, pij)
}
