//! Fixtures shared by the benchmarks.

use jdfpt_core::model::{build_sigma_matrix, FirmSpec, JumpDist, SystemSpec, Threshold};

fn firm(name: &str, row: Vec<f64>, jump_mean: f64, jump_std: f64) -> FirmSpec {
    FirmSpec {
        name: name.into(),
        mu: -0.001,
        sigma_row: row,
        jump: JumpDist::normal(jump_mean, jump_std),
        x0: 2.0,
        threshold: Threshold::new(-0.001, 0.0),
    }
}

/// Ba and B firms with diffusion correlation 0.4.
pub fn two_firm_system() -> SystemSpec {
    let m = build_sigma_matrix(0.1587, 0.45, 0.4).expect("valid correlation");
    SystemSpec {
        firms: vec![
            firm("Ba", m[0].to_vec(), -0.5515, 1.6412),
            firm("B", m[1].to_vec(), -0.8, 1.5),
        ],
        lambda: 0.1,
        mean_interjump: 1.0,
        horizon: 10.0,
    }
}

/// The B-rated firm alone.
pub fn single_firm_system() -> SystemSpec {
    SystemSpec {
        firms: vec![firm("B", vec![0.45], -0.8, 1.5)],
        lambda: 0.1,
        mean_interjump: 1.0,
        horizon: 10.0,
    }
}
