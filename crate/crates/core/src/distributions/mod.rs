//! Rotationally symmetric laws on the sphere and the tangent elliptical and
//! tangent vMF alternatives.
//!
//! Only absolutely continuous cosine laws are supported: `V` must have a
//! density of the form `g̃_p`, so point masses in the cosine distribution
//! cannot be expressed.

mod acg;
mod angular;
mod cosine;
mod models;

pub use acg::{sample_acg, ShapeMatrix};
pub use angular::AngularFunction;
pub use cosine::{
    cosine_density, ln_vmf_norm_const, sample_cosine, total_mass, vmf_norm_const, CosineLaw,
};
pub use models::{
    density_tangent_elliptical, density_tangent_vmf, sample_mixture, sample_tangent_elliptical,
    sample_tangent_vmf, sample_vmf, uniform_sphere_into, vmf, Mixture, RotSym, Sampler,
    TangentElliptical, TangentEllipticalParams, TangentVmf, TangentVmfParams,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid shape matrix: {0}")]
    InvalidShape(String),
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("angular function {0} vanishes almost everywhere; cannot normalise")]
    ZeroAngularFunction(String),
    #[error("unsupported angular function: {0}")]
    UnsupportedAngularFunction(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DistributionError>;
