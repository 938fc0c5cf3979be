//! Uniform sampling of crossing times inside interjump intervals.

use serde::{Deserialize, Serialize};

use crate::analytic::{default_probability, pairwise_default_correlation_f64};
use crate::bridge::{crossing_probability, ln_crossing_density, InterjumpSegment};
use crate::error::Result;
use crate::model::SystemSpec;
use crate::sou::{rho_to_c, sou_step};

use super::rng::RandomStream;
use super::samples::{FptSample, RunRecord, SampleKind};
use super::timeline::JumpTimeline;

/// How crossing candidates of neighbouring firms are correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// Independent candidates.
    Off,
    /// Diffusion default correlation over half the interval length, from
    /// the distances at the interval start.
    #[default]
    Elapsed,
    /// As `Elapsed` but evaluated at the interval's absolute midpoint.
    Absolute,
}

/// Below this marginal the analytic correlation is not attempted; above it
/// the `f64` series is accurate to about 1e-4, far inside the SOU cutoff.
const MIN_MARGINAL: f64 = 1e-10;
/// Crossing probabilities below this make the link correlation irrelevant.
const MIN_CROSSING: f64 = 1e-12;

/// Correlation used to couple the crossing candidates of two live firms.
pub fn fpt_correlation(
    system: &SystemSpec,
    i: usize,
    j: usize,
    seg_i: &InterjumpSegment,
    seg_j: &InterjumpSegment,
    mode: CorrelationMode,
) -> f64 {
    let t = match mode {
        CorrelationMode::Off => return 0.0,
        CorrelationMode::Elapsed => 0.5 * seg_i.tau(),
        CorrelationMode::Absolute => 0.5 * (seg_i.t_start + seg_i.t_end),
    };
    let rho = match system.diffusion_correlation(i, j) {
        Ok(r) => r.clamp(-0.999, 0.999),
        Err(_) => return 0.0,
    };
    correlation_at(seg_i.gap_start() / seg_i.sigma, seg_j.gap_start() / seg_j.sigma, rho, t)
}

fn correlation_at(z1: f64, z2: f64, rho: f64, t: f64) -> f64 {
    if !(z1 > 0.0 && z2 > 0.0 && t > 0.0) {
        return 0.0;
    }
    let (Ok(p1), Ok(p2)) = (default_probability(z1, t), default_probability(z2, t)) else {
        return 0.0;
    };
    if p1.min(p2) < MIN_MARGINAL {
        return 0.0;
    }
    match pairwise_default_correlation_f64(z1, z2, rho, t) {
        Ok(c) if c.is_finite() => c.clamp(-0.99, 0.99),
        _ => 0.0,
    }
}

/// Per-system constants of the sampler.
#[derive(Debug, Clone)]
pub struct UnifEngine<'a> {
    pub system: &'a SystemSpec,
    pub sigmas: Vec<f64>,
    pub mode: CorrelationMode,
}

impl<'a> UnifEngine<'a> {
    pub fn new(system: &'a SystemSpec, mode: CorrelationMode) -> Result<Self> {
        system.validate()?;
        let sigmas = system
            .firms
            .iter()
            .map(|f| f.effective_sigma())
            .collect::<Result<Vec<_>>>()?;
        Ok(UnifEngine { system, sigmas, mode })
    }

    /// One Monte Carlo cycle.
    ///
    /// Draw order: the path skeleton, then per interval one uniform per firm
    /// (drawn for defaulted firms too).
    pub fn run(&self, run: u64, rng: &mut RandomStream) -> RunRecord {
        let sys = self.system;
        let n = sys.n_firms();
        let tl = JumpTimeline::generate(sys, rng);
        let mut out: Vec<Option<FptSample>> = vec![None; n];
        let mut segs = Vec::with_capacity(n);
        let mut q = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut u = vec![0.0; n];
        let m = tl.n_jumps();

        for j in 0..tl.n_segments() {
            for v in u.iter_mut() {
                *v = rng.uniform();
            }
            let (t0, t1) = tl.segment_bounds(j);
            let tau = t1 - t0;
            if tau > 0.0 {
                segs.clear();
                for i in 0..n {
                    segs.push(tl.segment(sys, i, j, self.sigmas[i]));
                    q[i] = if out[i].is_none() {
                        crossing_probability(&segs[i]).unwrap_or(0.0)
                    } else {
                        0.0
                    };
                }

                let mut prev: Option<usize> = None;
                for i in (0..n).filter(|&i| out[i].is_none()) {
                    y[i] = match prev {
                        None => u[i],
                        Some(p) => {
                            let rho = if q[p] > MIN_CROSSING && q[i] > MIN_CROSSING {
                                fpt_correlation(sys, p, i, &segs[p], &segs[i], self.mode)
                            } else {
                                0.0
                            };
                            let param = rho_to_c(rho).expect("correlation is clamped");
                            sou_step(y[p], &param, u[i])
                        }
                    };
                    prev = Some(i);
                }

                for i in 0..n {
                    if out[i].is_some() || !(y[i] < q[i]) {
                        continue;
                    }
                    // Candidate s = t0 + tau Y / q lies inside when Y < q.
                    let eps = 1e-12 * tau;
                    let s = (t0 + tau * y[i] / q[i]).clamp(t0 + eps, t1 - eps);
                    let lng = ln_crossing_density(&segs[i], s).unwrap_or(f64::NEG_INFINITY);
                    let weight = (tau.ln() + lng - q[i].ln()).exp();
                    out[i] = Some(FptSample {
                        run,
                        time: s,
                        weight,
                        kind: SampleKind::Interior,
                    });
                }
            }

            if j < m {
                for i in 0..n {
                    if out[i].is_some() {
                        continue;
                    }
                    let d = sys.firms[i].threshold_at(t1);
                    if tl.post_jump[i][j] <= d {
                        out[i] = Some(FptSample {
                            run,
                            time: t1,
                            weight: 1.0,
                            kind: SampleKind::Atom,
                        });
                    }
                }
            }
        }
        RunRecord { run, defaults: out }
    }
}

/// One cycle of the sampler; see [`UnifEngine::run`].
pub fn unif_run(system: &SystemSpec, mode: CorrelationMode, run: u64, rng: &mut RandomStream) -> Result<RunRecord> {
    Ok(UnifEngine::new(system, mode)?.run(run, rng))
}
