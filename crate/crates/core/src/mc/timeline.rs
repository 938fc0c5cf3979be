use crate::bridge::InterjumpSegment;
use crate::model::SystemSpec;

use super::rng::RandomStream;

/// Jump instants shared by all firms, with each firm's values just before
/// and just after every instant.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTimeline {
    pub horizon: f64,
    /// `T_1 < ... < T_M`, all in `(0, horizon)`.
    pub jump_times: Vec<f64>,
    /// Number of superposed jumps at each instant.
    pub jump_counts: Vec<u32>,
    pub x0: Vec<f64>,
    /// `pre_jump[i][j] = X_i(T_{j+1}^-)`; the last entry is `X_i(T)`.
    pub pre_jump: Vec<Vec<f64>>,
    /// `post_jump[i][j] = X_i(T_{j+1}^+)`.
    pub post_jump: Vec<Vec<f64>>,
}

impl JumpTimeline {
    /// Draws a full path skeleton. Per instant the draws are one uniform for
    /// the jump count and one normal per firm, whatever their values, so the
    /// draw sequence never depends on model parameters other than the
    /// instant clock.
    pub fn generate(system: &SystemSpec, rng: &mut RandomStream) -> Self {
        let times = generate_jump_times(system.mean_interjump, system.horizon, rng);
        let n = system.n_firms();
        let m = times.len();
        let mut pre_jump = vec![Vec::with_capacity(m + 1); n];
        let mut post_jump = vec![Vec::with_capacity(m); n];
        let mut jump_counts = Vec::with_capacity(m);
        let x0: Vec<f64> = system.firms.iter().map(|f| f.x0).collect();
        let mut x = x0.clone();
        let mut t_prev = 0.0;
        for j in 0..=m {
            let t_next = if j < m { times[j] } else { system.horizon };
            x = evolve_interjump(&x, t_prev, t_next, system, rng);
            for (i, &v) in x.iter().enumerate() {
                pre_jump[i].push(v);
            }
            if j < m {
                let k = poisson_count(rng.uniform(), system.jumps_per_instant());
                jump_counts.push(k);
                x = apply_jumps(&x, k, system, rng);
                for (i, &v) in x.iter().enumerate() {
                    post_jump[i].push(v);
                }
            }
            t_prev = t_next;
        }
        JumpTimeline {
            horizon: system.horizon,
            jump_times: times,
            jump_counts,
            x0,
            pre_jump,
            post_jump,
        }
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn n_segments(&self) -> usize {
        self.jump_times.len() + 1
    }

    /// `(T_j, T_{j+1})` of 0-based segment `j`, with `T_0 = 0`,
    /// `T_{M+1} = horizon`.
    pub fn segment_bounds(&self, j: usize) -> (f64, f64) {
        let lo = if j == 0 { 0.0 } else { self.jump_times[j - 1] };
        let hi = self.jump_times.get(j).copied().unwrap_or(self.horizon);
        (lo, hi)
    }

    pub fn segment(&self, system: &SystemSpec, firm: usize, j: usize, sigma: f64) -> InterjumpSegment {
        let (t_start, t_end) = self.segment_bounds(j);
        let f = &system.firms[firm];
        InterjumpSegment {
            t_start,
            t_end,
            x_start: if j == 0 {
                self.x0[firm]
            } else {
                self.post_jump[firm][j - 1]
            },
            x_end: self.pre_jump[firm][j],
            mu: f.mu,
            sigma,
            threshold: f.threshold,
        }
    }
}

/// Cumulative exponential gaps with the given mean, stopped at `horizon`.
pub fn generate_jump_times(mean_interjump: f64, horizon: f64, rng: &mut RandomStream) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng.exponential(mean_interjump);
        if t >= horizon {
            return out;
        }
        out.push(t);
    }
}

/// Diffusion step `x + mu dt + sigma G`, `G ~ N(0, dt I)`.
pub fn evolve_interjump(
    x_prev: &[f64],
    t_prev: f64,
    t_next: f64,
    system: &SystemSpec,
    rng: &mut RandomStream,
) -> Vec<f64> {
    let dt = t_next - t_prev;
    let sd = dt.max(0.0).sqrt();
    let g: Vec<f64> = (0..system.n_drivers()).map(|_| rng.normal() * sd).collect();
    system
        .firms
        .iter()
        .zip(x_prev)
        .map(|(f, &x)| x + f.mu * dt + f.sigma_row.iter().zip(&g).map(|(s, g)| s * g).sum::<f64>())
        .collect()
}

/// One jump for every firm.
pub fn apply_jump(x_pre: &[f64], system: &SystemSpec, rng: &mut RandomStream) -> Vec<f64> {
    apply_jumps(x_pre, 1, system, rng)
}

/// `count` superposed jumps; one normal is drawn per firm even when
/// `count` is zero.
pub fn apply_jumps(x_pre: &[f64], count: u32, system: &SystemSpec, rng: &mut RandomStream) -> Vec<f64> {
    system
        .firms
        .iter()
        .zip(x_pre)
        .map(|(f, &x)| x + f.jump.aggregate(count, rng.normal()))
        .collect()
}

/// Poisson(`mean`) by inversion of one uniform.
pub fn poisson_count(u: f64, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u32;
    while u > cdf && k < 10_000 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 && k as f64 > mean {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_sigma_matrix, FirmSpec, JumpDist, Threshold};
    use crate::stats::{mean, pearson, standard_error};

    fn system(sig: [[f64; 2]; 2], jump_std: f64) -> SystemSpec {
        let firm = |row: [f64; 2], m: f64| FirmSpec {
            name: "f".into(),
            mu: -0.001,
            sigma_row: row.to_vec(),
            jump: JumpDist::normal(m, jump_std),
            x0: 2.0,
            threshold: Threshold::new(-0.001, 0.0),
        };
        SystemSpec {
            firms: vec![firm(sig[0], -0.2), firm(sig[1], -0.8)],
            lambda: 0.1,
            mean_interjump: 1.0,
            horizon: 10.0,
        }
    }

    #[test]
    fn jump_time_counts() {
        let n = 100_000;
        let mut total = 0usize;
        for k in 0..n {
            let mut r = RandomStream::new(3, k);
            let t = generate_jump_times(1.0, 10.0, &mut r);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert!(t.iter().all(|&x| x > 0.0 && x < 10.0));
            total += t.len();
        }
        let m = total as f64 / n as f64;
        assert!((m - 10.0).abs() < 0.1, "{m}");
        let mut r = RandomStream::new(3, 0);
        assert!(generate_jump_times(1.0, 1e-12, &mut r).is_empty());
        let a = generate_jump_times(1.0, 10.0, &mut RandomStream::new(9, 9));
        let b = generate_jump_times(1.0, 10.0, &mut RandomStream::new(9, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_volatility_is_deterministic_drift() {
        let sys = system([[0.0, 0.0], [0.0, 0.0]], 0.0);
        let mut r = RandomStream::new(1, 1);
        let x = evolve_interjump(&[2.0, 3.0], 1.0, 3.5, &sys, &mut r);
        assert_eq!(x, vec![2.0 - 0.0025, 3.0 - 0.0025]);
        let y = apply_jump(&x, &sys, &mut r);
        assert!((y[0] - (x[0] - 0.2)).abs() < 1e-15);
        assert!((y[1] - (x[1] - 0.8)).abs() < 1e-15);
    }

    #[test]
    fn increment_covariance() {
        let s = build_sigma_matrix(0.09, 0.45, 0.4).unwrap();
        let sys = system(s, 0.5);
        let mut r = RandomStream::new(4, 0);
        let n = 100_000;
        let dt = 0.5;
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let x = evolve_interjump(&[0.0, 0.0], 0.0, dt, &sys, &mut r);
            a.push(x[0] + 0.001 * dt);
            b.push(x[1] + 0.001 * dt);
        }
        assert!((pearson(&a, &b) - 0.4).abs() < 0.01);
        let var: Vec<f64> = b.iter().map(|v| v * v).collect();
        let target = 0.45 * 0.45 * dt;
        assert!((mean(&var) - target).abs() < 3.0 * standard_error(&var));
    }

    #[test]
    fn jump_size_moments() {
        let sys = SystemSpec {
            firms: vec![
                FirmSpec {
                    name: "A".into(),
                    mu: 0.0,
                    sigma_row: vec![0.09],
                    jump: JumpDist::normal(-0.2, 0.5),
                    x0: 2.0,
                    threshold: Threshold::new(0.0, 0.0),
                },
                FirmSpec {
                    name: "B".into(),
                    mu: 0.0,
                    sigma_row: vec![0.45],
                    jump: JumpDist::normal(-0.8, 1.5),
                    x0: 2.0,
                    threshold: Threshold::new(0.0, 0.0),
                },
            ],
            lambda: 0.1,
            mean_interjump: 1.0,
            horizon: 10.0,
        };
        let mut r = RandomStream::new(5, 0);
        let n = 100_000;
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let y = apply_jump(&[0.0, 0.0], &sys, &mut r);
            a.push(y[0]);
            b.push(y[1]);
        }
        assert!((mean(&a) + 0.2).abs() < 3.0 * standard_error(&a));
        let m = mean(&b);
        let sq: Vec<f64> = b.iter().map(|v| (v - m) * (v - m)).collect();
        // Var of the squared deviations of a normal is 2 s^4.
        let se = (2.0f64).sqrt() * 1.5 * 1.5 / (n as f64).sqrt();
        assert!((mean(&sq).sqrt() - 1.5).abs() < 3.0 * se / (2.0 * 1.5));
    }

    #[test]
    fn timeline_structure() {
        let s = build_sigma_matrix(0.09, 0.45, 0.4).unwrap();
        let sys = system(s, 0.5);
        let tl = JumpTimeline::generate(&sys, &mut RandomStream::new(8, 2));
        let m = tl.n_jumps();
        assert_eq!(tl.jump_counts.len(), m);
        for i in 0..2 {
            assert_eq!(tl.pre_jump[i].len(), m + 1);
            assert_eq!(tl.post_jump[i].len(), m);
            for j in 0..m {
                if tl.jump_counts[j] == 0 {
                    assert_eq!(tl.pre_jump[i][j], tl.post_jump[i][j]);
                }
            }
        }
        assert_eq!(tl.segment_bounds(0).0, 0.0);
        assert_eq!(tl.segment_bounds(m).1, 10.0);
        let again = JumpTimeline::generate(&sys, &mut RandomStream::new(8, 2));
        assert_eq!(tl, again);
    }

    #[test]
    fn poisson_inversion() {
        assert_eq!(poisson_count(0.5, 0.0), 0);
        assert_eq!(poisson_count(0.9, 0.1), 0);
        assert_eq!(poisson_count(0.91, 0.1), 1);
        let mut r = RandomStream::new(6, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| poisson_count(r.uniform(), 2.5) as f64).collect();
        assert!((mean(&xs) - 2.5).abs() < 3.0 * standard_error(&xs));
    }
}
