//! Cosine laws: the marginal density of `V = Xᵀθ` under a rotationally
//! symmetric distribution, its normalising constant and a sampler.

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};

use super::{AngularFunction, DistributionError, Result};
use crate::numerics::{self, integrate, ln_bessel_i, ln_surface_area, QuadratureRule};

const ENVELOPE_GRID: usize = 512;

/// `ln c^M_{p,κ}`, the log vMF normalising constant on `S^{p-1}`.
pub fn ln_vmf_norm_const(p: usize, kappa: f64) -> Result<f64> {
    if p < 2 {
        return Err(DistributionError::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(DistributionError::InvalidParameter(format!(
            "kappa must be finite and >= 0, got {kappa}"
        )));
    }
    if kappa == 0.0 {
        return Ok(-ln_surface_area(p));
    }
    let nu = 0.5 * (p as f64 - 2.0);
    Ok(nu * kappa.ln()
        - 0.5 * p as f64 * (2.0 * std::f64::consts::PI).ln()
        - ln_bessel_i(nu, kappa)?)
}

/// `c^M_{p,κ} = κ^{(p-2)/2} / ((2π)^{p/2} I_{(p-2)/2}(κ))`; `1/ω_p` at `κ = 0`.
pub fn vmf_norm_const(p: usize, kappa: f64) -> Result<f64> {
    Ok(ln_vmf_norm_const(p, kappa)?.exp())
}

#[derive(Debug, Clone)]
enum Method {
    Uniform,
    // Wood (1994) rejection for the tilted Beta shape of the vMF cosine
    Wood { kappa: f64, b: f64, x0: f64, c: f64 },
    // Beta((p-1)/2, (p-1)/2) proposal on (1+v)/2, accept with g(v)/M
    Rejection { ln_m: f64 },
}

/// Normalised cosine density `g̃_p` for a fixed `(g, p)`, with its sampler.
#[derive(Debug, Clone)]
pub struct CosineLaw {
    g: AngularFunction,
    p: usize,
    ln_c: f64,
    method: Method,
    beta: Beta<f64>,
}

impl CosineLaw {
    pub fn new(g: AngularFunction, p: usize) -> Result<Self> {
        if p < 2 {
            return Err(DistributionError::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        let half = 0.5 * (p as f64 - 1.0);
        let beta = Beta::new(half, half)
            .map_err(|e| DistributionError::InvalidParameter(e.to_string()))?;
        let (ln_c, method) = if g.is_uniform() {
            (-ln_surface_area(p), Method::Uniform)
        } else if let Some(kappa) = g.vmf_eta() {
            (ln_vmf_norm_const(p, kappa)?, wood(p, kappa))
        } else {
            (ln_norm_by_quadrature(&g, p)?, Method::Rejection { ln_m: envelope(&g)? })
        };
        Ok(Self {
            g,
            p,
            ln_c,
            method,
            beta,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn angular(&self) -> &AngularFunction {
        &self.g
    }

    /// `c_{p,g}`.
    pub fn norm_const(&self) -> f64 {
        self.ln_c.exp()
    }

    pub fn ln_norm_const(&self) -> f64 {
        self.ln_c
    }

    /// `g̃_p(v) = ω_{p-1} c_{p,g} (1 - v²)^{(p-3)/2} g(v)`.
    pub fn density(&self, v: f64) -> f64 {
        if !(-1.0..=1.0).contains(&v) {
            return 0.0;
        }
        let s = (1.0 - v) * (1.0 + v);
        let expo = 0.5 * (self.p as f64 - 3.0);
        if s == 0.0 {
            return match expo {
                e if e > 0.0 => 0.0,
                e if e < 0.0 => f64::INFINITY,
                _ => (ln_surface_area(self.p - 1) + self.ln_c + self.g.ln_eval(v)).exp(),
            };
        }
        (ln_surface_area(self.p - 1) + self.ln_c + expo * s.ln() + self.g.ln_eval(v)).exp()
    }

    /// Density of `x ↦ c_{p,g} g(xᵀθ)` on the sphere as a function of `v`.
    pub fn sphere_density(&self, v: f64) -> f64 {
        (self.ln_c + self.g.ln_eval(v)).exp()
    }

    pub fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        match self.method {
            Method::Uniform => 2.0 * self.beta.sample(rng) - 1.0,
            Method::Wood { kappa, b, x0, c } => {
                let d = self.p as f64 - 1.0;
                loop {
                    let z = self.beta.sample(rng);
                    let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
                    let u: f64 = rng.random();
                    if kappa * w + d * (1.0 - x0 * w).ln() - c >= u.ln() {
                        return w;
                    }
                }
            }
            Method::Rejection { ln_m } => loop {
                let v = 2.0 * self.beta.sample(rng) - 1.0;
                let u: f64 = rng.random();
                if u.ln() <= self.g.ln_eval(v) - ln_m {
                    return v;
                }
            },
        }
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

fn wood(p: usize, kappa: f64) -> Method {
    let d = p as f64 - 1.0;
    let b = d / (2.0 * kappa + (4.0 * kappa * kappa + d * d).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + d * (1.0 - x0 * x0).ln();
    Method::Wood { kappa, b, x0, c }
}

fn ln_norm_by_quadrature(g: &AngularFunction, p: usize) -> Result<f64> {
    // in t = cos ψ the weight (1-t²)^{(p-3)/2} dt becomes sin^{p-2} ψ dψ
    let rule = QuadratureRule::angular(numerics::DEFAULT_ORDER);
    let expo = 0.5 * (p as f64 - 3.0);
    let lg: Vec<f64> = rule.nodes().iter().map(|&t| g.ln_eval(t)).collect();
    if lg.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(DistributionError::UnsupportedAngularFunction(format!(
            "{} is not finite on [-1, 1]",
            g.label()
        )));
    }
    let shift = lg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(DistributionError::ZeroAngularFunction(g.label().to_owned()));
    }
    let total: f64 = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(&lg)
        .map(|((&t, &w), &l)| {
            let s = (1.0 - t) * (1.0 + t);
            w * (expo * s.ln() + l - shift).exp()
        })
        .sum();
    if !(total > 0.0) {
        return Err(DistributionError::ZeroAngularFunction(g.label().to_owned()));
    }
    Ok(-(ln_surface_area(p - 1) + shift + total.ln()))
}

// ln sup g over [-1, 1] from a grid plus golden-section refinement around the
// best node, with a small safety margin.
fn envelope(g: &AngularFunction) -> Result<f64> {
    let grid: Vec<f64> = (0..=ENVELOPE_GRID)
        .map(|i| -1.0 + 2.0 * i as f64 / ENVELOPE_GRID as f64)
        .collect();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &t) in grid.iter().enumerate() {
        let l = g.ln_eval(t);
        if l.is_nan() || l == f64::INFINITY {
            return Err(DistributionError::UnsupportedAngularFunction(format!(
                "{} is unbounded or undefined at t = {t}; no envelope available",
                g.label()
            )));
        }
        if l > best.1 {
            best = (i, l);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        return Err(DistributionError::ZeroAngularFunction(g.label().to_owned()));
    }
    let lo = grid[best.0.saturating_sub(1)];
    let hi = grid[(best.0 + 1).min(ENVELOPE_GRID)];
    let refined = golden_max(|t| g.ln_eval(t), lo, hi);
    Ok(best.1.max(refined) + 0.01)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// `g̃_p(v)` for a one-off evaluation; build a [`CosineLaw`] to reuse the
/// normalising constant.
pub fn cosine_density(g: &AngularFunction, p: usize, v: f64) -> Result<f64> {
    Ok(CosineLaw::new(g.clone(), p)?.density(v))
}

pub fn sample_cosine(
    g: &AngularFunction,
    p: usize,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    Ok(CosineLaw::new(g.clone(), p)?.sample(n, rng))
}

/// `∫ g̃_p` by angular quadrature, for normalisation checks.
pub fn total_mass(law: &CosineLaw) -> f64 {
    integrate(|t| law.density(t), &QuadratureRule::angular(numerics::DEFAULT_ORDER))
}
