//! Reproducible Monte Carlo power studies.
//!
//! Every replicate draws from its own ChaCha8 stream, seeded by hashing
//! `(base_seed, scenario, n, ℓ, replicate, attempt)`, so a power table is a
//! pure function of its configuration whatever the number of workers.

mod config;
mod local;
mod runner;

pub use config::{AlternativeKind, AngularSpec, EstimatorSpec, ExperimentConfig, ModelConfig, Scenario};
pub use local::{
    limiting_noncentrality, local_alternative_validation, LocalAlternative, LocalComparison,
    LocalValidation,
};
pub use runner::{
    build_sampler, rotate_in_first_tangent, run_experiment, shape_for_ell, substream,
    substream_seed, ExperimentOutput, PowerRow, PowerTable, RunOptions, StatKey, MAX_FAILURE_RATE,
};

use thiserror::Error;

use crate::distributions::DistributionError;
use crate::geometry::GeometryError;
use crate::lecam::LecamError;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("no limiting power available for test {0}")]
    Unsupported(String),
    #[error("{test} failed on {failures} of {reps} replicates at ell={ell}, n={n}")]
    TooManyFailures {
        test: String,
        ell: u32,
        n: usize,
        failures: usize,
        reps: usize,
    },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lecam(#[from] LecamError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, McError>;
