//! Parallel replicate execution with per-replicate RNG substreams.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{AlternativeKind, ExperimentConfig, Scenario};
use super::{McError, Result};
use crate::distributions::{
    vmf, AngularFunction, Mixture, RotSym, Sampler, ShapeMatrix, TangentElliptical,
    TangentEllipticalParams, TangentVmf, TangentVmfParams,
};
use crate::geometry::{tangent_frame, UnitVector};
use crate::symmetry::{run_tests, Method, TestContext};

/// Share of failed replicates above which an experiment is rejected.
pub const MAX_FAILURE_RATE: f64 = 0.001;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the substream for one replicate attempt; a pure function of its
/// coordinates, so results do not depend on scheduling.
pub fn substream_seed(base: u64, scenario: u64, n: u64, ell: u64, rep: u64, attempt: u64) -> u64 {
    [scenario, n, ell, rep, attempt]
        .iter()
        .fold(splitmix(base), |h, &x| splitmix(h ^ splitmix(x)))
}

pub fn substream(base: u64, scenario: u64, n: u64, ell: u64, rep: u64, attempt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(base, scenario, n, ell, rep, attempt))
}

/// `(p-1) diag(1 + ℓ/2, 1, ..., 1) / (p - 1 + ℓ/2)`.
pub fn shape_for_ell(p: usize, ell: f64) -> Result<ShapeMatrix> {
    let q = p - 1;
    let s = q as f64 / (q as f64 + ell / 2.0);
    let mut d = vec![s; q];
    d[0] = s * (1.0 + ell / 2.0);
    Ok(ShapeMatrix::from_diagonal(&d)?)
}

/// `cos(a) θ + sin(a) Γ_θ e_1`.
pub fn rotate_in_first_tangent(theta: &UnitVector, angle: f64) -> Result<UnitVector> {
    let f = tangent_frame(theta);
    let t: DVector<f64> = theta.as_dvector() * angle.cos() + f.gamma().column(0) * angle.sin();
    Ok(UnitVector::normalize(t.as_slice().to_vec())?)
}

fn te(theta: &UnitVector, g: &AngularFunction, p: usize, ell: f64) -> Result<Box<dyn Sampler>> {
    Ok(Box::new(TangentElliptical::new(TangentEllipticalParams {
        theta: theta.clone(),
        g: g.clone(),
        lambda: shape_for_ell(p, ell)?,
    })?))
}

fn tm(theta: &UnitVector, g: &AngularFunction, mu: &UnitVector, kappa: f64) -> Result<Box<dyn Sampler>> {
    Ok(Box::new(TangentVmf::new(TangentVmfParams {
        theta: theta.clone(),
        g: g.clone(),
        mu: mu.clone(),
        kappa,
    })?))
}

/// Data-generating law for one grid point.
pub fn build_sampler(cfg: &ExperimentConfig, ell: u32) -> Result<Box<dyn Sampler>> {
    let p = cfg.p;
    let l = f64::from(ell);
    let theta = cfg.true_theta()?;
    let g = cfg.model.g.build()?;
    let mu = cfg.mu()?;
    let kappa = cfg.model.kappa_step * l;
    Ok(match cfg.scenario {
        Scenario::Null => Box::new(RotSym::new(theta, g)?),
        Scenario::HighDimNull => Box::new(RotSym::new(theta, AngularFunction::uniform())?),
        Scenario::TeGrid => te(&theta, &g, p, l)?,
        Scenario::TmGrid => tm(&theta, &g, &mu, kappa)?,
        Scenario::MisspecifiedTheta => match cfg.model.kind {
            Some(AlternativeKind::Te) => te(&theta, &g, p, l)?,
            Some(AlternativeKind::Tm) => tm(&theta, &g, &mu, kappa)?,
            None => return Err(McError::Config("misspecified_theta needs model.kind".into())),
        },
        Scenario::MixtureVmf => {
            let k = cfg.model.mixture_kappa;
            let other = rotate_in_first_tangent(&theta, cfg.model.angle_step * l)?;
            Box::new(Mixture::new(vec![
                (0.5, Box::new(vmf(theta, k)?) as Box<dyn Sampler>),
                (0.5, Box::new(vmf(other, k)?)),
            ])?)
        }
        Scenario::MixtureTeTm => Box::new(Mixture::new(vec![
            (0.5, tm(&theta, &g, &mu, kappa)?),
            (0.5, te(&theta, &g, p, l)?),
        ])?),
    })
}

/// One row of a power table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub test: String,
    pub ell: u32,
    pub n: usize,
    pub p: usize,
    pub freq: f64,
    pub se: f64,
    #[serde(rename = "N")]
    pub reps: usize,
    pub rejections: usize,
    pub failures: usize,
}

impl PowerRow {
    fn new(method: Method, ell: u32, n: usize, p: usize, rejections: usize, reps: usize, failures: usize) -> Self {
        let freq = if reps == 0 { f64::NAN } else { rejections as f64 / reps as f64 };
        Self {
            test: method.label().to_owned(),
            ell,
            n,
            p,
            freq,
            se: (freq * (1.0 - freq) / reps as f64).sqrt(),
            reps,
            rejections,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTable {
    pub name: Option<String>,
    pub alpha: f64,
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn get(&self, test: Method, ell: u32, n: usize) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.test == test.label() && r.ell == ell && r.n == n)
    }
}

/// Key of a statistics column: test, `ℓ`, `n`.
pub type StatKey = (Method, u32, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: PowerTable,
    /// Per-replicate statistics (`NaN` where the test failed), indexed by
    /// replicate; filled only when requested.
    pub statistics: BTreeMap<StatKey, Vec<f64>>,
}

pub struct RunOptions {
    pub workers: usize,
    pub keep_statistics: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            keep_statistics: false,
        }
    }
}

pub(crate) struct Replicate {
    // per method: Some((statistic, rejected)) or None on failure
    pub(crate) results: Vec<Option<(f64, bool)>>,
}

/// Coordinates and settings shared by every replicate of one grid point.
pub(crate) struct Point<'a> {
    pub sampler: &'a dyn Sampler,
    pub methods: &'a [Method],
    pub ctx: &'a TestContext,
    pub alpha: f64,
    pub base_seed: u64,
    pub scenario: u64,
    pub n: usize,
    pub ell: u32,
}

impl Point<'_> {
    fn replicate(&self, rep: usize) -> Replicate {
        let mut last = Vec::new();
        for attempt in 0..2u64 {
            let mut rng = substream(
                self.base_seed,
                self.scenario,
                self.n as u64,
                u64::from(self.ell),
                rep as u64,
                attempt,
            );
            let sample = self.sampler.sample(self.n, &mut rng);
            let results: Vec<Option<(f64, bool)>> = run_tests(self.methods, &sample, self.ctx)
                .into_iter()
                .map(|r| r.ok().map(|t| (t.statistic, t.rejects(self.alpha))))
                .collect();
            if results.iter().all(Option::is_some) {
                return Replicate { results };
            }
            last = results;
        }
        Replicate { results: last }
    }

    pub(crate) fn run(&self, pool: &rayon::ThreadPool, reps: usize) -> Vec<Replicate> {
        pool.install(|| (0..reps).into_par_iter().map(|r| self.replicate(r)).collect())
    }
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| McError::Pool(e.to_string()))
}

/// Tabulates method `k` over replicates, enforcing the failure budget.
pub(crate) fn tabulate(reps: &[Replicate], k: usize, m: Method, ell: u32, n: usize, p: usize) -> Result<PowerRow> {
    let total = reps.len();
    let ok = reps.iter().filter(|r| r.results[k].is_some()).count();
    let failures = total - ok;
    if failures as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(McError::TooManyFailures {
            test: m.label().to_owned(),
            ell,
            n,
            failures,
            reps: total,
        });
    }
    let rejections = reps
        .iter()
        .filter(|r| matches!(r.results[k], Some((_, true))))
        .count();
    Ok(PowerRow::new(m, ell, n, p, rejections, ok, failures))
}

/// Runs every `(n, ℓ)` grid point of `cfg`. The table is identical for any
/// worker count.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let methods = cfg.methods()?;
    let ctx = TestContext {
        theta: Some(cfg.theta()?),
        estimator: Some(cfg.estimator.build()),
        score: None,
    };
    let pool = pool(opts.workers)?;
    let mut rows = Vec::new();
    let mut statistics = BTreeMap::new();
    for &n in &cfg.n {
        for &ell in &cfg.ell {
            let sampler = build_sampler(cfg, ell)?;
            let point = Point {
                sampler: sampler.as_ref(),
                methods: &methods,
                ctx: &ctx,
                alpha: cfg.alpha,
                base_seed: cfg.base_seed,
                scenario: cfg.scenario.id(),
                n,
                ell,
            };
            let reps = point.run(&pool, cfg.reps);
            for (k, &m) in methods.iter().enumerate() {
                rows.push(tabulate(&reps, k, m, ell, n, cfg.p)?);
                if opts.keep_statistics {
                    let col = reps
                        .iter()
                        .map(|r| r.results[k].map_or(f64::NAN, |(s, _)| s))
                        .collect();
                    statistics.insert((m, ell, n), col);
                }
            }
        }
    }
    Ok(ExperimentOutput {
        table: PowerTable {
            name: cfg.name.clone(),
            alpha: cfg.alpha,
            rows,
        },
        statistics,
    })
}
