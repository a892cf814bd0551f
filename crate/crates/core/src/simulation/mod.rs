//! Mean-shift Monte-Carlo experiments: coverage, power and conditional
//! uniformity.

pub mod design;
pub mod ks;
pub mod report;
pub mod runs;

pub use design::{child_rng, gaussian_design, generate_mean_shift, MeanShiftSpec};
pub use ks::{ks_uniform, KsResult};
pub use report::{Metric, Record, RepStatus, SimReport};
pub use runs::{run_coverage, run_power, run_uniformity, PowerTarget, SimConfig, UniformityConfig};
