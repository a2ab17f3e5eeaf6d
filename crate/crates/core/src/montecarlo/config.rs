//! Declarative experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};

use super::{McError, Result};
use crate::distributions::AngularFunction;
use crate::geometry::{Estimator, UnitVector};
use crate::symmetry::Method;

/// Angular function by name, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngularSpec {
    Vmf { eta: f64 },
    Uniform,
    ExpArcsin { kappa: f64 },
}

impl AngularSpec {
    pub fn build(&self) -> Result<AngularFunction> {
        match *self {
            AngularSpec::Vmf { eta } if eta.is_finite() && eta >= 0.0 => Ok(AngularFunction::vmf(eta)),
            AngularSpec::Vmf { eta } => Err(McError::Config(format!("vmf eta must be >= 0, got {eta}"))),
            AngularSpec::Uniform => Ok(AngularFunction::uniform()),
            AngularSpec::ExpArcsin { kappa } if kappa.is_finite() => {
                Ok(AngularFunction::exp_arcsin(kappa))
            }
            AngularSpec::ExpArcsin { kappa } => {
                Err(McError::Config(format!("exp_arcsin kappa must be finite, got {kappa}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Rotationally symmetric data; `ell` is ignored.
    Null,
    /// Tangent elliptical with `Λ_ℓ = (p-1) diag(1 + ℓ/2, 1, ..., 1) / (p - 1 + ℓ/2)`.
    TeGrid,
    /// Tangent vMF with `κ_ℓ = kappa_step · ℓ`.
    TmGrid,
    /// `½ vMF(θ, κ) + ½ vMF(θ_ℓ, κ)`, `θ_ℓ` rotated from `θ` by `angle_step · ℓ`.
    MixtureVmf,
    /// `½ TM(θ, g, μ, κ_ℓ) + ½ TE(θ, g, Λ_ℓ)`.
    MixtureTeTm,
    /// TE or TM data around `true_theta`; specified tests use `theta`.
    MisspecifiedTheta,
    /// Uniform data, intended for large `p`.
    HighDimNull,
}

impl Scenario {
    pub fn id(self) -> u64 {
        match self {
            Scenario::Null => 1,
            Scenario::TeGrid => 2,
            Scenario::TmGrid => 3,
            Scenario::MixtureVmf => 4,
            Scenario::MixtureTeTm => 5,
            Scenario::MisspecifiedTheta => 6,
            Scenario::HighDimNull => 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternativeKind {
    Te,
    Tm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSpec {
    #[default]
    Mean,
    Axis,
}

impl EstimatorSpec {
    pub fn build(self) -> Estimator {
        match self {
            EstimatorSpec::Mean => Estimator::SphericalMean,
            EstimatorSpec::Axis => Estimator::PrincipalAxis,
        }
    }
}

fn default_reps() -> usize {
    2000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_ell() -> Vec<u32> {
    vec![0]
}

fn default_g() -> AngularSpec {
    AngularSpec::Vmf { eta: 2.0 }
}

fn default_kappa_step() -> f64 {
    1.0
}

fn default_mixture_kappa() -> f64 {
    5.0
}

fn default_angle_step() -> f64 {
    1.0 / 40.0
}

/// Scenario parameters; everything has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Location handed to the specified-location tests; defaults to `e_1`.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Location of the data; defaults to `theta`.
    #[serde(default)]
    pub true_theta: Option<Vec<f64>>,
    #[serde(default = "default_g")]
    pub g: AngularSpec,
    #[serde(default = "default_kappa_step")]
    pub kappa_step: f64,
    /// Skewness direction on `S^{p-2}`; defaults to its first basis vector.
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default = "default_mixture_kappa")]
    pub mixture_kappa: f64,
    #[serde(default = "default_angle_step")]
    pub angle_step: f64,
    #[serde(default)]
    pub kind: Option<AlternativeKind>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            theta: None,
            true_theta: None,
            g: default_g(),
            kappa_step: default_kappa_step(),
            mu: None,
            mixture_kappa: default_mixture_kappa(),
            angle_step: default_angle_step(),
            kind: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub scenario: Scenario,
    pub p: usize,
    pub n: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_ell")]
    pub ell: Vec<u32>,
    pub tests: Vec<String>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
}

impl ExperimentConfig {
    /// Parses and validates; TOML syntax errors carry line and column.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| McError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 {
            return Err(McError::Config(format!("p must be >= 3, got {}", self.p)));
        }
        if self.reps == 0 {
            return Err(McError::Config("reps must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(McError::Config(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(McError::Config("n must be a nonempty list of positive sizes".into()));
        }
        if self.ell.is_empty() {
            return Err(McError::Config("ell grid must be nonempty".into()));
        }
        if self.tests.is_empty() {
            return Err(McError::Config("tests must be nonempty".into()));
        }
        self.methods()?;
        self.theta()?;
        self.true_theta()?;
        self.mu()?;
        self.model.g.build()?;
        if self.scenario == Scenario::MisspecifiedTheta && self.model.kind.is_none() {
            return Err(McError::Config("misspecified_theta needs model.kind = \"te\" or \"tm\"".into()));
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.tests
            .iter()
            .map(|t| t.parse::<Method>().map_err(McError::Config))
            .collect()
    }

    fn vector(&self, v: &Option<Vec<f64>>, dim: usize, what: &str) -> Result<UnitVector> {
        match v {
            None => UnitVector::basis(dim, 0).map_err(|e| McError::Config(e.to_string())),
            Some(c) if c.len() != dim => Err(McError::Config(format!(
                "{what} must have {dim} coordinates, got {}",
                c.len()
            ))),
            Some(c) => UnitVector::normalize(c.clone()).map_err(|e| McError::Config(format!("{what}: {e}"))),
        }
    }

    pub fn theta(&self) -> Result<UnitVector> {
        self.vector(&self.model.theta, self.p, "theta")
    }

    pub fn true_theta(&self) -> Result<UnitVector> {
        match &self.model.true_theta {
            None => self.theta(),
            some => self.vector(some, self.p, "true_theta"),
        }
    }

    pub fn mu(&self) -> Result<UnitVector> {
        self.vector(&self.model.mu, self.p - 1, "mu")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
scenario = "te_grid"
p = 3
n = [100]
tests = ["s-sc", "u-loc"]
"#,
        )
        .unwrap();
        assert_eq!(cfg.reps, 2000);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.ell, vec![0]);
        assert_eq!(cfg.model.g, AngularSpec::Vmf { eta: 2.0 });
        assert_eq!(cfg.methods().unwrap(), vec![Method::SSc, Method::ULoc]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::from_toml_str("scenario = \"te_grid\"\np = 3\nn = [100\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line"), "{err}");
        let err = ExperimentConfig::from_toml_str(
            "scenario = \"te_grid\"\np = 3\nn = [100]\ntests = [\"s-foo\"]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("s-foo"));
        let err = ExperimentConfig::from_toml_str(
            "scenario = \"misspecified_theta\"\np = 3\nn = [100]\ntests = [\"s-loc\"]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("kind"));
    }
}
