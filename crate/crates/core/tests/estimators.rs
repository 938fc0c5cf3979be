use jdfpt_core::kde::{cumulative_default_rate, estimate_density, uniform_grid};
use jdfpt_core::mc::{simulate, simulated_default_correlation, CorrelationMode, SimConfig};
use jdfpt_core::model::{build_sigma_matrix, FirmSpec, JumpDist, SystemSpec, Threshold};

const TABLE1: [(&str, f64, f64, f64); 4] = [
    ("A", 0.09, -0.2, 0.5),
    ("Baa", 0.0894, -0.296, 0.6039),
    ("Ba", 0.1587, -0.5515, 1.6412),
    ("B", 0.45, -0.8, 1.5),
];

fn firm(name: &str, row: Vec<f64>, m: f64, sd: f64) -> FirmSpec {
    FirmSpec {
        name: name.into(),
        mu: -0.001,
        sigma_row: row,
        jump: JumpDist::normal(m, sd),
        x0: 2.0,
        threshold: Threshold::new(-0.001, 0.0),
    }
}

fn config(n_runs: u64, seed: u64) -> SimConfig {
    SimConfig {
        n_runs,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn density_mass_matches_default_frequency() {
    for (name, s, m, sd) in TABLE1 {
        let sys = SystemSpec {
            firms: vec![firm(name, vec![s], m, sd)],
            lambda: 0.1,
            mean_interjump: 1.0,
            horizon: 10.0,
        };
        let set = simulate(&sys, &config(100_000, 3)).unwrap();
        let est = estimate_density(&set, 0, &uniform_grid(10.0, 512)).unwrap();
        let mass = cumulative_default_rate(&est, 10.0).unwrap();
        let freq = set.empirical_cumulative(0, 10.0);
        assert!((mass - freq).abs() < 0.01, "{name}: {mass} vs {freq}");
        assert_eq!(cumulative_default_rate(&est, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn b_rated_kde_matches_indicators_at_horizon() {
    let (name, s, m, sd) = TABLE1[3];
    let sys = SystemSpec {
        firms: vec![firm(name, vec![s], m, sd)],
        lambda: 0.1,
        mean_interjump: 1.0,
        horizon: 10.0,
    };
    let set = simulate(&sys, &config(50_000, 4)).unwrap();
    let est = estimate_density(&set, 0, &uniform_grid(10.0, 512)).unwrap();
    let kde = cumulative_default_rate(&est, 10.0).unwrap();
    let ind = set.empirical_cumulative(0, 10.0);
    assert!((kde - ind).abs() < 0.01, "{kde} vs {ind}");
    let curve = est.cumulative();
    assert!(curve.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn independent_firms_are_uncorrelated() {
    // No jumps and no diffusion correlation: nothing couples the firms.
    let (_, s, m, sd) = TABLE1[3];
    let sys = SystemSpec {
        firms: vec![firm("B1", vec![s, 0.0], m, sd), firm("B2", vec![0.0, s], m, sd)],
        lambda: 0.0,
        mean_interjump: 1.0,
        horizon: 10.0,
    };
    let n = 100_000u64;
    let mut cfg = config(n, 5);
    cfg.correlation = CorrelationMode::Off;
    let set = simulate(&sys, &cfg).unwrap();
    for t in [2.0, 5.0, 10.0] {
        let c = simulated_default_correlation(&set, 0, 1, t).unwrap();
        let p1 = set.empirical_cumulative(0, t);
        let p2 = set.empirical_cumulative(1, t);
        let joint = set.joint_cumulative(0, 1, t);
        assert!(c.abs() < 3.0 / (n as f64).sqrt(), "t={t}: {c}");
        let se = (p1 * p2 * (1.0 - p1 * p2) / n as f64).sqrt();
        assert!((joint - p1 * p2).abs() < 3.0 * se, "t={t}: {joint} vs {}", p1 * p2);
    }
}

#[test]
fn diffusion_correlation_raises_joint_defaults() {
    let (_, s, m, sd) = TABLE1[3];
    let run = |rho: f64| {
        let g = build_sigma_matrix(s, s, rho).unwrap();
        let sys = SystemSpec {
            firms: vec![firm("B1", g[0].to_vec(), m, sd), firm("B2", g[1].to_vec(), m, sd)],
            lambda: 0.0,
            mean_interjump: 1.0,
            horizon: 10.0,
        };
        let set = simulate(&sys, &config(50_000, 6)).unwrap();
        simulated_default_correlation(&set, 0, 1, 10.0).unwrap()
    };
    let (lo, hi) = (run(0.0), run(0.8));
    assert!(hi > lo + 0.1, "{lo} {hi}");
}
