//! Weighted Gaussian kernel density estimates of first-passage times.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::FptSampleSet;

/// Number of evaluation points used by default on `[0, horizon]`.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Gaussian kernel with variance `h^2 / 4`.
pub fn kernel(h: f64, u: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain("kernel", format!("bandwidth must be positive, got {h}")));
    }
    Ok(kernel_unchecked(h, u))
}

#[inline]
fn kernel_unchecked(h: f64, u: f64) -> f64 {
    (-(u * u) / (0.5 * h * h)).exp() / ((PI / 2.0).sqrt() * h)
}

/// Gamma law with rate `alpha` and shape `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaFit {
    pub alpha: f64,
    pub beta: f64,
}

/// Smallest shape for which the roughness functional is finite and nonzero.
pub const MIN_SHAPE: f64 = 3.0;

/// Weighted method of moments, shape raised to at least 3 with the mean kept.
pub fn fit_gamma(samples: &[(f64, f64)]) -> Result<GammaFit> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let w: f64 = samples.iter().map(|s| s.1).sum();
    if !(w > 0.0) {
        return Err(Error::DegenerateSample("total weight is not positive".into()));
    }
    let m = samples.iter().map(|(t, wt)| t * wt).sum::<f64>() / w;
    let v = samples.iter().map(|(t, wt)| wt * (t - m) * (t - m)).sum::<f64>() / w;
    if !(v > 0.0) || !(m > 0.0) {
        return Err(Error::DegenerateSample(format!("mean {m}, variance {v}")));
    }
    let beta = (m * m / v).max(MIN_SHAPE);
    Ok(GammaFit { alpha: beta / m, beta })
}

/// `integral (f'')^2` for the gamma density.
pub fn roughness_integral(fit: &GammaFit) -> Result<f64> {
    let GammaFit { alpha, beta } = *fit;
    if !(alpha > 0.0) || !(2.0 * beta - 5.0 > 0.0) {
        return Err(Error::domain(
            "roughness_integral",
            format!("need alpha > 0 and beta > 2.5, got ({alpha}, {beta})"),
        ));
    }
    let a = alpha * alpha;
    let b = -2.0 * alpha * (beta - 1.0);
    let c = (beta - 1.0) * (beta - 2.0);
    let w = [a * a, 2.0 * a * b, b * b + 2.0 * a * c, 2.0 * b * c, c * c];
    let lg_beta = libm::lgamma(beta);
    let mut sum = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let i = (k + 1) as f64;
        let e = 2.0 * beta - i;
        let ln_ratio = libm::lgamma(e) - e * std::f64::consts::LN_2 - 2.0 * lg_beta;
        sum += wk * alpha.powi(k as i32 + 1) * ln_ratio.exp();
    }
    Ok(sum)
}

/// Rule-of-thumb bandwidth for `n_samples` points.
pub fn optimal_bandwidth(fit: &GammaFit, n_samples: usize) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::domain("optimal_bandwidth", "n_samples must be at least 1"));
    }
    let r = roughness_integral(fit)?;
    Ok((2.0 * n_samples as f64 * PI.sqrt() * r).powf(-0.2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Zero when there were no samples.
    pub bandwidth: f64,
    pub fit: Option<GammaFit>,
    /// Accepted samples behind the estimate.
    pub n_samples: usize,
    pub run_count: u64,
}

impl DensityEstimate {
    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    /// Running trapezoid integral on the grid.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        for k in 0..self.grid.len() {
            if k > 0 {
                acc += 0.5 * (self.density[k] + self.density[k - 1]) * (self.grid[k] - self.grid[k - 1]);
            }
            out.push(acc);
        }
        out
    }
}

/// `n` equally spaced points on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let d = horizon / (n.max(2) - 1) as f64;
    (0..n.max(2)).map(|k| k as f64 * d).collect()
}

/// `(1/N) sum w K(h, t - s)` over the firm's samples, with `h` from a gamma
/// fit and the accepted-sample count.
pub fn estimate_density(samples: &FptSampleSet, firm: usize, grid: &[f64]) -> Result<DensityEstimate> {
    let pts: Vec<(f64, f64)> = samples.samples[firm].iter().map(|s| (s.time, s.weight)).collect();
    let n_samples = pts.len();
    if n_samples == 0 {
        return Ok(DensityEstimate {
            grid: grid.to_vec(),
            density: vec![0.0; grid.len()],
            bandwidth: 0.0,
            fit: None,
            n_samples: 0,
            run_count: samples.run_count,
        });
    }
    let (fit, h) = match fit_gamma(&pts) {
        Ok(fit) => (Some(fit), optimal_bandwidth(&fit, n_samples)?),
        // All samples at one instant: any positive width keeps the bump.
        Err(Error::DegenerateSample(_)) => (None, samples.horizon / 20.0),
        Err(e) => return Err(e),
    };
    let n = samples.run_count as f64;
    // Contributions beyond 8 h are below 1e-27 of the peak.
    let cutoff = 8.0 * h;
    let mut sorted = pts;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let density = grid
        .iter()
        .map(|&t| {
            let lo = sorted.partition_point(|p| p.0 < t - cutoff);
            let hi = sorted.partition_point(|p| p.0 <= t + cutoff);
            sorted[lo..hi]
                .iter()
                .map(|(s, w)| w * kernel_unchecked(h, t - s))
                .sum::<f64>()
                / n
        })
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
        fit,
        n_samples,
        run_count: samples.run_count,
    })
}

/// Integral of the density from the start of the grid to `t`.
pub fn cumulative_default_rate(est: &DensityEstimate, t: f64) -> Result<f64> {
    let g = &est.grid;
    let (first, last) = (g[0], g[g.len() - 1]);
    if !(t >= first && t <= last) {
        return Err(Error::domain(
            "cumulative_default_rate",
            format!("t = {t} outside [{first}, {last}]"),
        ));
    }
    let mut acc = 0.0;
    for k in 1..g.len() {
        if g[k] <= t {
            acc += 0.5 * (est.density[k] + est.density[k - 1]) * (g[k] - g[k - 1]);
        } else {
            let frac = (t - g[k - 1]) / (g[k] - g[k - 1]);
            let ft = est.density[k - 1] + frac * (est.density[k] - est.density[k - 1]);
            acc += 0.5 * (est.density[k - 1] + ft) * (t - g[k - 1]);
            break;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{FptSample, RunRecord, SampleKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    #[test]
    fn kernel_properties() {
        let h = 0.37;
        assert_relative_eq!(
            kernel(h, 0.0).unwrap(),
            1.0 / ((PI / 2.0).sqrt() * h),
            max_relative = 1e-15
        );
        assert_eq!(kernel(h, 0.2).unwrap(), kernel(h, -0.2).unwrap());
        assert!(kernel(0.0, 1.0).is_err());
        // Simpson on [-10h, 10h].
        let n = 4000;
        let d = 20.0 * h / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let u = -10.0 * h + k as f64 * d;
            let c = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += c * kernel(h, u).unwrap();
        }
        assert!((s * d / 3.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn roughness_values() {
        assert_relative_eq!(
            roughness_integral(&GammaFit { alpha: 1.0, beta: 3.0 }).unwrap(),
            0.1875,
            max_relative = 1e-13
        );
        let r = roughness_integral(&GammaFit {
            alpha: 0.206699,
            beta: 3.0,
        })
        .unwrap();
        assert_relative_eq!(r, 0.1875 * 0.206699f64.powi(5), max_relative = 1e-12);
        assert!((r - 7.074e-5).abs() < 1e-8);
        assert!(roughness_integral(&GammaFit { alpha: 1.0, beta: 2.5 }).is_err());
    }

    #[test]
    fn roughness_matches_quadrature_for_other_shapes() {
        // f'' of the gamma density by central differences, integrated numerically.
        let fit = GammaFit { alpha: 0.7, beta: 4.3 };
        let f = |t: f64| {
            (fit.beta * fit.alpha.ln() - libm::lgamma(fit.beta) + (fit.beta - 1.0) * t.ln() - fit.alpha * t).exp()
        };
        let (n, hi) = (200_000, 60.0);
        let d = hi / n as f64;
        let e = 1e-3;
        let mut s = 0.0;
        for k in 1..n {
            let t = k as f64 * d;
            if t <= e {
                continue;
            }
            let f2 = (f(t + e) - 2.0 * f(t) + f(t - e)) / (e * e);
            s += f2 * f2 * d;
        }
        let r = roughness_integral(&fit).unwrap();
        assert!((s - r).abs() / r < 1e-4, "{s} vs {r}");
    }

    #[test]
    fn bandwidth_values() {
        let unit = GammaFit { alpha: 1.0, beta: 3.0 };
        let h1 = optimal_bandwidth(&unit, 1).unwrap();
        assert_relative_eq!(h1, (2.0 * PI.sqrt() * 0.1875).powf(-0.2), max_relative = 1e-15);
        assert!((h1 - 1.085_122_476_314_234).abs() < 1e-12);
        let h32 = optimal_bandwidth(&unit, 32).unwrap();
        assert_relative_eq!(h32 / h1, 0.5, max_relative = 1e-12);
        assert!(optimal_bandwidth(&unit, 0).is_err());
    }

    #[test]
    fn gamma_fit_recovery_and_clamp() {
        let truth = Gamma::new(3.0, 1.0 / 0.206699).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<(f64, f64)> = (0..1_000_000).map(|_| (truth.sample(&mut rng), 1.0)).collect();
        let fit = fit_gamma(&xs).unwrap();
        assert!((fit.alpha / 0.206699 - 1.0).abs() < 0.02, "{fit:?}");
        assert!((fit.beta / 3.0 - 1.0).abs() < 0.02, "{fit:?}");

        let five = Gamma::new(5.0, 0.5).unwrap();
        let ys: Vec<(f64, f64)> = (0..200_000).map(|_| (five.sample(&mut rng), 1.0)).collect();
        assert!((fit_gamma(&ys).unwrap().beta - 5.0).abs() < 0.1);

        // Two points with m^2/v = 1.2: the shape is raised to 3, the mean kept.
        let m: f64 = 2.0;
        let sd = (m * m / 1.2).sqrt();
        let zs = [(m - sd, 1.0), (m + sd, 1.0)];
        let fit = fit_gamma(&zs).unwrap();
        assert_eq!(fit.beta, 3.0);
        assert_relative_eq!(fit.alpha, 1.5, max_relative = 1e-12);

        assert!(matches!(
            fit_gamma(&[(1.0, 1.0), (1.0, 2.0)]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(fit_gamma(&[(1.0, 1.0)]).is_err());
    }

    fn set_with(times: &[Option<(f64, f64, SampleKind)>], horizon: f64) -> FptSampleSet {
        let recs = times
            .iter()
            .enumerate()
            .map(|(k, t)| RunRecord {
                run: k as u64,
                defaults: vec![t.map(|(time, weight, kind)| FptSample {
                    run: k as u64,
                    time,
                    weight,
                    kind,
                })],
            })
            .collect();
        FptSampleSet::from_records(vec!["f".into()], horizon, vec![horizon], recs)
    }

    #[test]
    fn single_bump_from_atoms() {
        let s = set_with(&[Some((5.0, 1.0, SampleKind::Atom)); 10], 10.0);
        let grid = uniform_grid(10.0, DEFAULT_GRID_POINTS);
        let est = estimate_density(&s, 0, &grid).unwrap();
        assert!(est.bandwidth > 0.0);
        for (t, f) in grid.iter().zip(&est.density) {
            assert_relative_eq!(
                *f,
                kernel(est.bandwidth, t - 5.0).unwrap(),
                max_relative = 1e-12,
                epsilon = 1e-25
            );
        }
        assert!((cumulative_default_rate(&est, 10.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn empty_estimate_and_domain() {
        let s = set_with(&[None, None], 10.0);
        let grid = uniform_grid(10.0, 64);
        let est = estimate_density(&s, 0, &grid).unwrap();
        assert!(est.is_empty());
        assert!(est.density.iter().all(|&f| f == 0.0));
        assert_eq!(cumulative_default_rate(&est, 0.0).unwrap(), 0.0);
        assert!(cumulative_default_rate(&est, 10.5).is_err());
    }

    #[test]
    fn cumulative_matches_running_sum_at_nodes() {
        let times: Vec<_> = (0..200)
            .map(|k| Some((0.5 + 0.04 * k as f64, 1.0, SampleKind::Interior)))
            .collect();
        let s = set_with(&times, 10.0);
        let grid = uniform_grid(10.0, 101);
        let est = estimate_density(&s, 0, &grid).unwrap();
        let cum = est.cumulative();
        for (k, &t) in grid.iter().enumerate() {
            assert_relative_eq!(
                cumulative_default_rate(&est, t).unwrap(),
                cum[k],
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    proptest! {
        #[test]
        fn roughness_scales_as_alpha_to_fifth(alpha in 0.05f64..1.0) {
            let r = roughness_integral(&GammaFit { alpha, beta: 3.0 }).unwrap();
            let unit = roughness_integral(&GammaFit { alpha: 1.0, beta: 3.0 }).unwrap();
            prop_assert!((r / (alpha.powi(5) * unit) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cumulative_nondecreasing(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let times: Vec<_> = (0..50).map(|k| Some((0.2 * k as f64 + 0.1, 1.0, SampleKind::Interior))).collect();
            let s = set_with(&times, 10.0);
            let est = estimate_density(&s, 0, &uniform_grid(10.0, 128)).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cumulative_default_rate(&est, lo).unwrap() <= cumulative_default_rate(&est, hi).unwrap());
        }
    }
}
