//! First-passage times of correlated jump-diffusions by uniform sampling of
//! Brownian-bridge crossings.

pub mod analytic;
pub mod bridge;
pub mod calib;
pub mod error;
pub mod kde;
pub mod mc;
pub mod model;
pub mod sou;
pub mod stats;

pub use error::{Error, Result};
pub use kde::{cumulative_default_rate, estimate_density, DensityEstimate, GammaFit};
pub use mc::{simulate, simulate_conventional, CorrelationMode, FptSampleSet, SimConfig};
pub use model::{build_sigma_matrix, FirmSpec, JumpDist, SystemSpec, Threshold};
