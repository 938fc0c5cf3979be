//! Brownian-bridge crossing mathematics between two jump instants.
//!
//! Conditioning on both endpoints removes the drift, and an affine
//! threshold is a straight line in `(t, x)`. Working with the gap process
//! `Y = X - D` the threshold becomes the level 0 and the formulas below are
//! exact for any `(mu, gamma)`; `a` and `b` are the gaps at the two ends.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Threshold;

/// One interjump interval `[T_{j-1}, T_j]` of one firm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterjumpSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// Post-jump value at `t_start`.
    pub x_start: f64,
    /// Pre-jump value at `t_end`.
    pub x_end: f64,
    pub mu: f64,
    pub sigma: f64,
    pub threshold: Threshold,
}

impl InterjumpSegment {
    pub fn tau(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Distance above the threshold at the left end.
    pub fn gap_start(&self) -> f64 {
        // Both terms are O(1); subtracting before adding the slope term keeps
        // small gaps accurate.
        (self.x_start - self.threshold.kappa_log) - self.threshold.gamma * self.t_start
    }

    /// Distance above the threshold at the right end.
    pub fn gap_end(&self) -> f64 {
        (self.x_end - self.threshold.kappa_log) - self.threshold.gamma * self.t_end
    }

    fn check(&self, func: &'static str) -> Result<()> {
        if !(self.tau() > 0.0) {
            return Err(Error::domain(
                func,
                format!("segment length {} is not positive", self.tau()),
            ));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::domain(func, format!("sigma {} is not positive", self.sigma)));
        }
        Ok(())
    }

    /// `2 a b / (tau sigma^2)`, the exponent of the crossing probability.
    fn crossing_exponent(&self) -> f64 {
        2.0 * self.gap_start() * self.gap_end() / (self.tau() * self.sigma * self.sigma)
    }
}

/// Probability that the bridge stays strictly above the threshold.
pub fn survival_probability(seg: &InterjumpSegment) -> Result<f64> {
    seg.check("survival_probability")?;
    let (a, b) = (seg.gap_start(), seg.gap_end());
    if a <= 0.0 || b <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-seg.crossing_exponent()).exp_m1())
}

/// `1 - survival_probability`, computed without cancellation.
pub fn crossing_probability(seg: &InterjumpSegment) -> Result<f64> {
    seg.check("crossing_probability")?;
    let (a, b) = (seg.gap_start(), seg.gap_end());
    if a <= 0.0 || b <= 0.0 {
        return Ok(1.0);
    }
    Ok((-seg.crossing_exponent()).exp())
}

/// `ln g(s)`, `-inf` where the density vanishes.
pub fn ln_crossing_density(seg: &InterjumpSegment, s: f64) -> Result<f64> {
    seg.check("crossing_density")?;
    if !(s > seg.t_start && s < seg.t_end) {
        return Err(Error::domain(
            "crossing_density",
            format!("s = {s} is not strictly inside ({}, {})", seg.t_start, seg.t_end),
        ));
    }
    let a = seg.gap_start();
    if a <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let b = seg.gap_end();
    let tau = seg.tau();
    let u = s - seg.t_start;
    let v = seg.t_end - s;
    let two_var = 2.0 * seg.sigma * seg.sigma;
    // First-passage density of the free gap process at u, times the
    // transition density from 0 to b over v, over the transition density
    // from a to b over tau.
    Ok(a.ln() - 1.5 * u.ln() - 0.5 * v.ln() + 0.5 * tau.ln()
        - (seg.sigma * (2.0 * PI).sqrt()).ln()
        - a * a / (two_var * u)
        - b * b / (two_var * v)
        + (b - a) * (b - a) / (two_var * tau))
}

/// Density at `s` of the first crossing time, conditional on both
/// endpoint values. Integrates to [`crossing_probability`] over the segment.
pub fn crossing_density(seg: &InterjumpSegment, s: f64) -> Result<f64> {
    Ok(ln_crossing_density(seg, s)?.exp())
}

/// 1-based index of the first jump that carries the process from above to
/// at-or-below the threshold, with no earlier jump instant having been at
/// or below it. `thresholds[k]` is the threshold level at instant `k`.
pub fn first_jump_default_index_from(pre: &[f64], post: &[f64], thresholds: &[f64]) -> Option<usize> {
    for ((k, (&xm, &xp)), &d) in pre.iter().zip(post).enumerate().zip(thresholds) {
        if xm <= d {
            return None;
        }
        if xp <= d {
            return Some(k + 1);
        }
    }
    None
}

/// Which part of the whole-horizon density a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingCase {
    /// Continuous crossing inside interval `L`.
    Interior,
    /// Point mass at the jump instant `T_I`.
    Atom,
}

/// Multiplier of the whole-horizon density for interval `seg_index`
/// (1-based). `survival_products[k-1]` holds the survival probability of
/// interval `k`; `first_jump_index` is `I` (`None` when no jump defaults).
pub fn whole_horizon_density_weight(
    case: CrossingCase,
    seg_index: usize,
    first_jump_index: Option<usize>,
    survival_products: &[f64],
) -> f64 {
    if let Some(i) = first_jump_index {
        if seg_index > i {
            return 0.0;
        }
    }
    let upto = match case {
        CrossingCase::Interior => seg_index.saturating_sub(1),
        CrossingCase::Atom => {
            if first_jump_index != Some(seg_index) {
                return 0.0;
            }
            seg_index
        }
    };
    survival_products.iter().take(upto).product()
}
