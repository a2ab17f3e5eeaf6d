//! Tests of rotational symmetry about a specified or estimated location.
//!
//! Every statistic is built from the cosines `V_i` and multivariate signs
//! `U_i` of [`Signs`], using the `O(n)` moment forms.

mod signs;
mod specified;
mod unspecified;

pub use signs::Signs;
pub use specified::{
    high_dim_standardize, high_dim_z, q_cov, q_hyb, q_hyb_fisher, q_loc, q_sc,
};
pub use unspecified::{
    efficient_score_loc, efficient_score_stats, q_hyb_fisher_vmf, q_hyb_vmf, q_loc_vmf,
    q_sc_unspecified, unspecified_loc_stats, EfficientScoreStats, UnspecifiedLocStats,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::distributions::AngularFunction;
use crate::geometry::{DirectionalSample, Estimator, GeometryError, UnitVector};
use crate::numerics::{chi2_quantile, chi2_sf, normal_quantile, normal_sf, NumericsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestError {
    #[error("tests need p >= 3, got p = {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("observations at the poles of the location (indices {0:?}); signs undefined")]
    PoleObservations(Vec<usize>),
    #[error("all cosines are numerically zero")]
    DegenerateCosines,
    #[error("sum of cosines is numerically zero; D_p is undefined for this (axial-looking) sample")]
    UndefinedD,
    #[error("information scalar is not positive ({0}); statistic undefined")]
    SingularInformation(f64),
    #[error("cross-information J_p(f; g) is numerically zero")]
    DegenerateCrossInformation,
    #[error("angular function {0} has no score function attached")]
    MissingScore(String),
    #[error("{0} needs a specified location")]
    MissingTheta(Method),
    #[error("{0} needs an estimator for the location")]
    MissingEstimator(Method),
    #[error("{0} has no high-dimensional standardisation")]
    UnsupportedMethod(Method),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TestError>;

/// Test identifiers; `s-` tests use a specified location, `u-` tests an
/// estimated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SLoc,
    SSc,
    SHyb,
    SHybF,
    SCov,
    ULoc,
    USc,
    UHyb,
    UHybF,
    /// Efficient location test for a general score function `f`.
    ULocEff,
    SLocHd,
    SScHd,
    SHybHd,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Method::SLoc,
        Method::SSc,
        Method::SHyb,
        Method::SHybF,
        Method::SCov,
        Method::ULoc,
        Method::USc,
        Method::UHyb,
        Method::UHybF,
        Method::ULocEff,
        Method::SLocHd,
        Method::SScHd,
        Method::SHybHd,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::SLoc => "s-loc",
            Method::SSc => "s-sc",
            Method::SHyb => "s-hyb",
            Method::SHybF => "s-hybF",
            Method::SCov => "s-cov",
            Method::ULoc => "u-loc",
            Method::USc => "u-sc",
            Method::UHyb => "u-hyb",
            Method::UHybF => "u-hybF",
            Method::ULocEff => "u-loc-eff",
            Method::SLocHd => "s-loc-hd",
            Method::SScHd => "s-sc-hd",
            Method::SHybHd => "s-hyb-hd",
        }
    }

    pub fn is_specified(self) -> bool {
        matches!(
            self,
            Method::SLoc
                | Method::SSc
                | Method::SHyb
                | Method::SHybF
                | Method::SCov
                | Method::SLocHd
                | Method::SScHd
                | Method::SHybHd
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.label() == s)
            .ok_or_else(|| format!("unknown test '{s}'"))
    }
}

/// Null reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    ChiSquare { df: u32 },
    StandardNormal,
}

impl Reference {
    /// Upper `alpha` critical value.
    pub fn critical_value(self, alpha: f64) -> Result<f64> {
        Ok(match self {
            Reference::ChiSquare { df } => chi2_quantile(f64::from(df), 1.0 - alpha)?,
            Reference::StandardNormal => normal_quantile(1.0 - alpha)?,
        })
    }

    pub fn upper_tail(self, x: f64) -> Result<f64> {
        Ok(match self {
            Reference::ChiSquare { df } => chi2_sf(x.max(0.0), f64::from(df))?,
            Reference::StandardNormal => normal_sf(x),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaMode {
    Specified(UnitVector),
    Estimated { theta: UnitVector, estimator: String },
}

impl ThetaMode {
    pub fn theta(&self) -> &UnitVector {
        match self {
            ThetaMode::Specified(t) | ThetaMode::Estimated { theta: t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub reference: Reference,
    pub p_value: f64,
    pub theta_mode: ThetaMode,
    pub n: usize,
    pub p: usize,
    /// Set when a Fisher-combination component p-value was clamped.
    pub clamped: bool,
}

impl TestResult {
    pub(crate) fn new(
        method: Method,
        statistic: f64,
        reference: Reference,
        theta_mode: ThetaMode,
        n: usize,
        p: usize,
    ) -> Result<Self> {
        let p_value = reference.upper_tail(statistic)?;
        Ok(Self {
            method,
            statistic,
            reference,
            p_value,
            theta_mode,
            n,
            p,
            clamped: false,
        })
    }

    pub fn df(&self) -> Option<u32> {
        match self.reference {
            Reference::ChiSquare { df } => Some(df),
            Reference::StandardNormal => None,
        }
    }

    /// Rejects at level `alpha` when the statistic exceeds the critical
    /// value, equivalently when the p-value is below `alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub(crate) fn df_loc(p: usize) -> u32 {
    (p - 1) as u32
}

pub(crate) fn df_sc(p: usize) -> u32 {
    ((p - 2) * (p + 1) / 2) as u32
}

pub(crate) fn check_p(p: usize) -> Result<()> {
    if p < 3 {
        return Err(TestError::DimensionTooSmall(p));
    }
    Ok(())
}

/// Location information for [`run_tests`].
#[derive(Debug, Clone, Default)]
pub struct TestContext {
    pub theta: Option<UnitVector>,
    pub estimator: Option<Estimator>,
    /// Score function for `u-loc-eff`; defaults to a vMF score.
    pub score: Option<AngularFunction>,
}

/// Runs several tests on one sample, sharing the sign computations. Each
/// entry fails or succeeds on its own.
pub fn run_tests(
    methods: &[Method],
    sample: &DirectionalSample,
    ctx: &TestContext,
) -> Vec<Result<TestResult>> {
    let need_spec = methods.iter().any(|m| m.is_specified());
    let need_unspec = methods.iter().any(|m| !m.is_specified());
    let spec = match (&ctx.theta, need_spec) {
        (Some(t), true) => Some(specified::Battery::new(sample, t)),
        _ => None,
    };
    let unspec = match (&ctx.estimator, need_unspec) {
        (Some(e), true) => Some(unspecified::Battery::new(sample, e)),
        _ => None,
    };
    methods
        .iter()
        .map(|&m| {
            if m.is_specified() {
                match &spec {
                    Some(b) => b.as_ref().map_err(Clone::clone).and_then(|b| b.run(m)),
                    None => Err(TestError::MissingTheta(m)),
                }
            } else {
                match &unspec {
                    Some(b) => b
                        .as_ref()
                        .map_err(Clone::clone)
                        .and_then(|b| b.run(m, ctx.score.as_ref())),
                    None => Err(TestError::MissingEstimator(m)),
                }
            }
        })
        .collect()
}
