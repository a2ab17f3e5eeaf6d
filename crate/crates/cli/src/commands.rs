//! Command implementations behind the `rotsym` binary.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotsym::distributions::{
    sample_acg, vmf, AngularFunction, DistributionError, RotSym, Sampler, ShapeMatrix,
    TangentElliptical, TangentEllipticalParams, TangentVmf, TangentVmfParams,
};
use rotsym::geometry::{DirectionalSample, Estimator, GeometryError, UnitVector};
use rotsym::lecam::{are_vmf, LecamError};
use rotsym::montecarlo::{McError, PowerTable};
use rotsym::symmetry::{run_tests, Method, Reference, TestContext, TestError, TestResult, ThetaMode};
use serde::Serialize;
use thiserror::Error;

use crate::describe::DescribeError;
use crate::ingest::IngestError;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Describe(#[from] DescribeError),
    #[error("{method}: {source}")]
    Test {
        method: String,
        #[source]
        source: TestError,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Simulation(#[from] McError),
    #[error(transparent)]
    Lecam(#[from] LecamError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const TEST: i32 = 3;
}

impl CommandError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Ingest(_) => "data_error",
            Self::Describe(_) => "data_error",
            Self::Test { .. } => "test_error",
            Self::Argument(_) | Self::Geometry(_) | Self::Distribution(_) => "invalid_argument",
            Self::Simulation(McError::Config(_)) => "config_error",
            Self::Simulation(_) => "simulation_error",
            Self::Lecam(_) => "numerics_error",
            Self::Io(_) | Self::Csv(_) => "io_error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Ingest(_) | Self::Describe(_) | Self::Argument(_) | Self::Geometry(_) => exit::DATA,
            Self::Distribution(_) | Self::Simulation(McError::Config(_)) => exit::DATA,
            Self::Test { .. } => exit::TEST,
            _ => exit::FAILURE,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: ErrorBody {
                code: self.code(),
                message: self.to_string(),
                row: match self {
                    Self::Ingest(e) => e.row(),
                    _ => None,
                },
                method: match self {
                    Self::Test { method, .. } => Some(method.clone()),
                    _ => None,
                },
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

pub type Result<T> = std::result::Result<T, CommandError>;

pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CommandError::Argument(format!("cannot parse {t:?} as a number")))
        })
        .collect()
}

pub fn parse_unit(s: &str) -> Result<UnitVector> {
    Ok(UnitVector::normalize(parse_floats(s)?)?)
}

/// `vmf:η`, `uniform` or `exp_arcsin:κ`.
pub fn parse_angular(s: &str) -> Result<AngularFunction> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s.trim(), None),
    };
    let value = || -> Result<f64> {
        arg.and_then(|a| a.parse::<f64>().ok())
            .filter(|x| x.is_finite())
            .ok_or_else(|| CommandError::Argument(format!("angular function {s:?} needs a numeric parameter")))
    };
    match name {
        "vmf" => {
            let eta = value()?;
            if eta < 0.0 {
                return Err(CommandError::Argument(format!("vmf concentration must be >= 0, got {eta}")));
            }
            Ok(AngularFunction::vmf(eta))
        }
        "uniform" => Ok(AngularFunction::uniform()),
        "exp_arcsin" => Ok(AngularFunction::exp_arcsin(value()?)),
        _ => Err(CommandError::Argument(format!(
            "unknown angular function {s:?}; expected vmf:<eta>, uniform or exp_arcsin:<kappa>"
        ))),
    }
}

pub fn parse_methods(list: &[String]) -> Result<Vec<Method>> {
    list.iter()
        .map(|s| s.parse::<Method>().map_err(CommandError::Argument))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRecord {
    pub method: String,
    pub statistic: f64,
    /// `null` for standard normal references.
    pub df: Option<u32>,
    pub reference: &'static str,
    pub p_value: f64,
    pub n: usize,
    pub p: usize,
    pub theta_mode: &'static str,
    pub theta: Vec<f64>,
    pub estimator: Option<String>,
    pub level: f64,
    pub reject: bool,
    pub clamped: bool,
}

impl TestRecord {
    pub fn new(r: &TestResult, level: f64) -> Self {
        let (mode, estimator) = match &r.theta_mode {
            ThetaMode::Specified(_) => ("specified", None),
            ThetaMode::Estimated { estimator, .. } => ("estimated", Some(estimator.clone())),
        };
        Self {
            method: r.method.label().to_owned(),
            statistic: r.statistic,
            df: r.df(),
            reference: match r.reference {
                Reference::ChiSquare { .. } => "chi2",
                Reference::StandardNormal => "normal",
            },
            p_value: r.p_value,
            n: r.n,
            p: r.p,
            theta_mode: mode,
            theta: r.theta_mode.theta().as_slice().to_vec(),
            estimator,
            level,
            reject: r.rejects(level),
            clamped: r.clamped,
        }
    }
}

/// Default battery: specified tests when θ is given, unspecified ones when an
/// estimator is given.
pub fn default_methods(theta: bool, estimator: bool) -> Vec<Method> {
    let mut m = Vec::new();
    if theta {
        m.extend([Method::SLoc, Method::SSc, Method::SHyb, Method::SHybF, Method::SCov]);
    }
    if estimator {
        m.extend([Method::ULoc, Method::USc, Method::UHyb, Method::UHybF]);
    }
    m
}

pub fn cmd_test(
    sample: &DirectionalSample,
    methods: &[Method],
    theta: Option<UnitVector>,
    estimator: Option<Estimator>,
    level: f64,
) -> Result<Vec<TestRecord>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CommandError::Argument(format!("level must lie in (0, 1), got {level}")));
    }
    if methods.is_empty() {
        return Err(CommandError::Argument("no tests selected; pass --theta and/or --estimator, or --tests".into()));
    }
    let ctx = TestContext {
        theta,
        estimator,
        score: None,
    };
    run_tests(methods, sample, &ctx)
        .into_iter()
        .zip(methods)
        .map(|(r, m)| {
            r.map(|t| TestRecord::new(&t, level)).map_err(|source| CommandError::Test {
                method: m.label().to_owned(),
                source,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// von Mises-Fisher about θ with concentration κ.
    Vmf,
    /// Rotationally symmetric about θ with angular function g.
    Rotsym,
    /// Tangent elliptical: sign ~ ACG(Λ).
    Te,
    /// Tangent vMF: sign ~ vMF(μ, κ).
    Tm,
    /// Angular central Gaussian on S^{p-1} with shape Λ.
    Acg,
}

#[derive(Debug, Clone)]
pub struct SampleParams {
    pub family: Family,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub theta: Option<UnitVector>,
    pub kappa: Option<f64>,
    pub g: AngularFunction,
    /// Either the diagonal or the full row-major matrix.
    pub lambda: Option<Vec<f64>>,
    pub mu: Option<UnitVector>,
}

fn shape(values: &[f64], q: usize) -> Result<ShapeMatrix> {
    let m = if values.len() == q {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
    } else if values.len() == q * q {
        DMatrix::from_row_slice(q, q, values)
    } else {
        return Err(CommandError::Argument(format!(
            "lambda needs {q} diagonal entries or {} matrix entries, got {}",
            q * q,
            values.len()
        )));
    };
    Ok(ShapeMatrix::new(m)?)
}

/// Draws a sample; the second value is the original trace when Λ had to be
/// rescaled.
pub fn cmd_sample(params: &SampleParams) -> Result<(DirectionalSample, Option<f64>)> {
    let p = params.p;
    if p < 3 {
        return Err(CommandError::Argument(format!("p must be >= 3, got {p}")));
    }
    if params.n == 0 {
        return Err(CommandError::Argument("n must be positive".into()));
    }
    let theta = match &params.theta {
        Some(t) if t.dim() != p => {
            return Err(CommandError::Argument(format!("theta has {} coordinates, p = {p}", t.dim())))
        }
        Some(t) => t.clone(),
        None => UnitVector::basis(p, p - 1)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let need_kappa = || {
        params
            .kappa
            .ok_or_else(|| CommandError::Argument("this family needs --kappa".into()))
    };
    let need_lambda = |q: usize| -> Result<ShapeMatrix> {
        let l = params
            .lambda
            .as_ref()
            .ok_or_else(|| CommandError::Argument("this family needs --lambda".into()))?;
        shape(l, q)
    };
    let (sampler, rescaled): (Box<dyn Sampler>, Option<f64>) = match params.family {
        Family::Vmf => (Box::new(vmf(theta, need_kappa()?)?), None),
        Family::Rotsym => (Box::new(RotSym::new(theta, params.g.clone())?), None),
        Family::Te => {
            let lambda = need_lambda(p - 1)?;
            let r = lambda.rescaled_from();
            let te = TangentElliptical::new(TangentEllipticalParams {
                theta,
                g: params.g.clone(),
                lambda,
            })?;
            (Box::new(te), r)
        }
        Family::Tm => {
            let mu = match &params.mu {
                Some(m) => m.clone(),
                None => UnitVector::basis(p - 1, 0)?,
            };
            let tm = TangentVmf::new(TangentVmfParams {
                theta,
                g: params.g.clone(),
                mu,
                kappa: need_kappa()?,
            })?;
            (Box::new(tm), None)
        }
        Family::Acg => {
            let lambda = need_lambda(p)?;
            let r = lambda.rescaled_from();
            return Ok((sample_acg(&lambda, params.n, &mut rng)?, r));
        }
    };
    Ok((sampler.sample(params.n, &mut rng), rescaled))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreRow {
    pub p: usize,
    pub eta: f64,
    pub are: f64,
}

pub fn cmd_are(ps: &[usize], etas: &[f64]) -> Result<Vec<AreRow>> {
    let mut rows = Vec::with_capacity(ps.len() * etas.len());
    for &p in ps {
        for &eta in etas {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(CommandError::Argument(format!("eta must be positive, got {eta}")));
            }
            rows.push(AreRow {
                p,
                eta,
                are: are_vmf(p, eta)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// CSV columns `test, ell, n, p, freq, se, N`.
pub fn write_power_csv<W: Write>(table: &PowerTable, w: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        test: &'a str,
        ell: u32,
        n: usize,
        p: usize,
        freq: f64,
        se: f64,
        #[serde(rename = "N")]
        reps: usize,
    }
    let rows: Vec<Row> = table
        .rows
        .iter()
        .map(|r| Row {
            test: &r.test,
            ell: r.ell,
            n: r.n,
            p: r.p,
            freq: r.freq,
            se: r.se,
            reps: r.reps,
        })
        .collect();
    write_csv(&rows, w)
}
