//! One runner per experiment kind. Runners only compute; writing is the
//! caller's job.

pub mod exact_delta;
pub mod mc_sweep;
pub mod s3_braiding;
pub mod trotter_plan;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::RunOutput;
use crate::HarnessError;

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    match &cfg.experiment {
        Experiment::ExactDelta(c) => exact_delta::run(c),
        Experiment::McSweep(c) => mc_sweep::run(c, cfg.seed),
        Experiment::S3Braiding(c) => s3_braiding::run(c),
        Experiment::TrotterPlan(c) => trotter_plan::run(c),
    }
}
