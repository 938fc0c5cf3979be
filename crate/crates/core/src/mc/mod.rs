//! Monte Carlo estimation of first-passage times.

pub mod conventional;
pub mod engine;
pub mod rng;
pub mod samples;
pub mod timeline;
pub mod unif;

pub use conventional::conventional_run;
pub use engine::{simulate, simulate_conventional, SimConfig};
pub use rng::RandomStream;
pub use samples::{simulated_default_correlation, yearly_grid, FptSample, FptSampleSet, RunRecord, SampleKind};
pub use timeline::JumpTimeline;
pub use unif::{fpt_correlation, unif_run, CorrelationMode, UnifEngine};
