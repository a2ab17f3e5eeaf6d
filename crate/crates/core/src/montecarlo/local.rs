//! Empirical power under contiguous alternatives against the noncentral χ²
//! limits.

use nalgebra::DMatrix;
use serde::Serialize;

use super::runner::{pool, tabulate, Point};
use super::{McError, Result};
use crate::distributions::{
    AngularFunction, RotSym, Sampler, ShapeMatrix, TangentElliptical, TangentEllipticalParams,
    TangentVmf, TangentVmfParams,
};
use crate::geometry::{Estimator, UnitVector};
use crate::lecam::{noncentrality_semiparam, noncentrality_te, noncentrality_tm, predicted_power};
use crate::symmetry::{Method, TestContext};

/// Direction of the local perturbation.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalAlternative {
    /// `Λ_n = I + n^{-1/2} L`, with `L` symmetric and `(p-1) × (p-1)`.
    TangentElliptical(DMatrix<f64>),
    /// `κ_n = n^{-1/2} k` with `μ = e_1`.
    TangentVmf(f64),
}

#[derive(Debug, Clone)]
pub struct LocalValidation {
    pub p: usize,
    pub n: usize,
    pub method: Method,
    pub alternative: LocalAlternative,
    /// Angular function of the data; vMF(2) by default.
    pub g: AngularFunction,
    pub reps: usize,
    pub alpha: f64,
    pub base_seed: u64,
    pub workers: usize,
}

impl LocalValidation {
    pub fn new(p: usize, n: usize, method: Method, alternative: LocalAlternative) -> Self {
        Self {
            p,
            n,
            method,
            alternative,
            g: AngularFunction::vmf(2.0),
            reps: 2000,
            alpha: 0.05,
            base_seed: 0,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalComparison {
    pub test: String,
    pub n: usize,
    pub p: usize,
    pub noncentrality: f64,
    pub df: u32,
    pub predicted: f64,
    pub empirical: f64,
    pub se: f64,
    #[serde(rename = "N")]
    pub reps: usize,
    /// `|empirical - predicted| / se`.
    pub z: f64,
}

fn df(method: Method, p: usize) -> Option<u32> {
    let loc = (p - 1) as u32;
    let sc = ((p - 2) * (p + 1) / 2) as u32;
    match method {
        Method::SLoc | Method::ULoc | Method::ULocEff | Method::SCov => Some(loc),
        Method::SSc | Method::USc => Some(sc),
        Method::SHyb | Method::UHyb => Some(loc + sc),
        _ => None,
    }
}

/// Limiting noncentrality of `method` under `cfg.alternative`.
pub fn limiting_noncentrality(cfg: &LocalValidation) -> Result<f64> {
    let unsupported = || McError::Unsupported(cfg.method.label().to_owned());
    let p = cfg.p;
    Ok(match &cfg.alternative {
        LocalAlternative::TangentElliptical(l) => match cfg.method {
            Method::SSc | Method::USc | Method::SHyb | Method::UHyb => noncentrality_te(l, p)?,
            Method::SLoc | Method::ULoc | Method::ULocEff | Method::SCov => 0.0,
            _ => return Err(unsupported()),
        },
        &LocalAlternative::TangentVmf(k) => match cfg.method {
            Method::SLoc | Method::SHyb => noncentrality_tm(k, p)?,
            Method::ULoc | Method::UHyb => noncentrality_semiparam(&AngularFunction::vmf(1.0), &cfg.g, k, p)?,
            Method::ULocEff => noncentrality_semiparam(&cfg.g, &cfg.g, k, p)?,
            Method::SSc | Method::USc => 0.0,
            _ => return Err(unsupported()),
        },
    })
}

fn sampler(cfg: &LocalValidation) -> Result<Box<dyn Sampler>> {
    let p = cfg.p;
    let theta = UnitVector::basis(p, 0)?;
    let root_n = (cfg.n as f64).sqrt();
    Ok(match &cfg.alternative {
        LocalAlternative::TangentElliptical(l) => {
            if l.iter().all(|&x| x == 0.0) {
                Box::new(RotSym::new(theta, cfg.g.clone())?)
            } else {
                let lambda = DMatrix::identity(p - 1, p - 1) + l / root_n;
                Box::new(TangentElliptical::new(TangentEllipticalParams {
                    theta,
                    g: cfg.g.clone(),
                    lambda: ShapeMatrix::new(lambda)?,
                })?)
            }
        }
        &LocalAlternative::TangentVmf(k) => Box::new(TangentVmf::new(TangentVmfParams {
            theta,
            g: cfg.g.clone(),
            mu: UnitVector::basis(p - 1, 0)?,
            kappa: k / root_n,
        })?),
    })
}

/// Runs `cfg.reps` replicates and compares the rejection frequency with the
/// noncentral χ² prediction.
pub fn local_alternative_validation(cfg: &LocalValidation) -> Result<LocalComparison> {
    if cfg.p < 3 || cfg.n == 0 || cfg.reps == 0 || !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(McError::Config("need p >= 3, n >= 1, reps >= 1, alpha in (0,1)".into()));
    }
    if let LocalAlternative::TangentElliptical(l) = &cfg.alternative {
        let q = cfg.p - 1;
        if l.nrows() != q || l.ncols() != q {
            return Err(McError::Config(format!(
                "perturbation must be {q}x{q}, got {}x{}",
                l.nrows(),
                l.ncols()
            )));
        }
    }
    let df = df(cfg.method, cfg.p).ok_or_else(|| McError::Unsupported(cfg.method.label().to_owned()))?;
    let lambda = limiting_noncentrality(cfg)?;
    let predicted = predicted_power(lambda, df, cfg.alpha)?;
    let sampler = sampler(cfg)?;
    let methods = [cfg.method];
    let ctx = TestContext {
        theta: Some(UnitVector::basis(cfg.p, 0)?),
        estimator: Some(Estimator::SphericalMean),
        score: Some(cfg.g.clone()),
    };
    let scenario = match cfg.alternative {
        LocalAlternative::TangentElliptical(_) => 8,
        LocalAlternative::TangentVmf(_) => 9,
    };
    let point = Point {
        sampler: sampler.as_ref(),
        methods: &methods,
        ctx: &ctx,
        alpha: cfg.alpha,
        base_seed: cfg.base_seed,
        scenario,
        n: cfg.n,
        ell: 0,
    };
    let reps = point.run(&pool(cfg.workers)?, cfg.reps);
    let row = tabulate(&reps, 0, cfg.method, 0, cfg.n, cfg.p)?;
    // a degenerate empirical frequency gives se = 0; fall back to the
    // predicted binomial spread
    let se = if row.se > 0.0 {
        row.se
    } else {
        (predicted * (1.0 - predicted) / row.reps as f64).sqrt()
    };
    Ok(LocalComparison {
        test: row.test,
        n: cfg.n,
        p: cfg.p,
        noncentrality: lambda,
        df,
        predicted,
        empirical: row.freq,
        se,
        reps: row.reps,
        z: (row.freq - predicted).abs() / se,
    })
}
