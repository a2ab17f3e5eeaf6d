//! Samplers and densities for the rotationally symmetric, tangent elliptical,
//! tangent vMF and mixture families.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use super::acg::ShapeMatrix;
use super::cosine::{ln_vmf_norm_const, CosineLaw};
use super::{AngularFunction, DistributionError, Result};
use crate::geometry::{decompose, tangent_frame, DirectionalSample, TangentFrame, UnitVector};
use crate::numerics::ln_surface_area;

/// A law on `S^{p-1}` that can be sampled from an explicit RNG stream.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;

    /// Appends one draw (`dim()` coordinates) to `out`.
    fn draw_into(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>);

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> DirectionalSample {
        assert!(n >= 1, "sample size must be positive");
        let mut data = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            self.draw_into(rng, &mut data);
        }
        DirectionalSample::from_flat_unchecked(self.dim(), data)
    }
}

/// Uniform draw on `S^{q-1}` (`q = out.len()`), by normalising a Gaussian.
pub fn uniform_sphere_into(rng: &mut dyn RngCore, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for o in out.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *o = z;
            s += z * z;
        }
        if s > 0.0 {
            let n = s.sqrt();
            out.iter_mut().for_each(|o| *o /= n);
            return;
        }
    }
}

// vθ + √(1-v²) Γu, renormalised against rounding
fn compose(frame: &TangentFrame, v: f64, u: &[f64], out: &mut Vec<f64>) {
    let r = ((1.0 - v) * (1.0 + v)).max(0.0).sqrt();
    let lifted = frame.lift(u);
    let start = out.len();
    let mut ss = 0.0;
    for (t, l) in frame.theta().as_slice().iter().zip(lifted.iter()) {
        let x = v * t + r * l;
        ss += x * x;
        out.push(x);
    }
    let n = ss.sqrt();
    out[start..].iter_mut().for_each(|x| *x /= n);
}

fn check_p3(p: usize) -> Result<()> {
    if p < 3 {
        return Err(DistributionError::InvalidParameter(format!(
            "tangent families need p >= 3, got {p}"
        )));
    }
    Ok(())
}

/// `x ↦ c_{p,g} g(xᵀθ)`.
#[derive(Debug, Clone)]
pub struct RotSym {
    frame: TangentFrame,
    law: CosineLaw,
}

impl RotSym {
    pub fn new(theta: UnitVector, g: AngularFunction) -> Result<Self> {
        let law = CosineLaw::new(g, theta.dim())?;
        Ok(Self {
            frame: tangent_frame(&theta),
            law,
        })
    }

    pub fn theta(&self) -> &UnitVector {
        self.frame.theta()
    }

    pub fn law(&self) -> &CosineLaw {
        &self.law
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.law.sphere_density(self.frame.theta().dot(x))
    }
}

impl Sampler for RotSym {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw_into(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let v = self.law.sample_one(rng);
        let mut u = vec![0.0; self.dim() - 1];
        uniform_sphere_into(rng, &mut u);
        compose(&self.frame, v, &u, out);
    }
}

/// von Mises-Fisher `M_p(θ, κ)`.
pub fn vmf(theta: UnitVector, kappa: f64) -> Result<RotSym> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(DistributionError::InvalidParameter(format!(
            "kappa must be finite and >= 0, got {kappa}"
        )));
    }
    RotSym::new(theta, AngularFunction::vmf(kappa))
}

pub fn sample_vmf(
    theta: &UnitVector,
    kappa: f64,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DirectionalSample> {
    Ok(vmf(theta.clone(), kappa)?.sample(n, rng))
}

#[derive(Debug, Clone)]
pub struct TangentEllipticalParams {
    pub theta: UnitVector,
    pub g: AngularFunction,
    pub lambda: ShapeMatrix,
}

/// `X = Vθ + √(1-V²) Γ_θ U` with `V ~ g̃_p` and `U ~ ACG(Λ)` independent.
#[derive(Debug, Clone)]
pub struct TangentElliptical {
    frame: TangentFrame,
    law: CosineLaw,
    lambda: ShapeMatrix,
}

impl TangentElliptical {
    pub fn new(params: TangentEllipticalParams) -> Result<Self> {
        let p = params.theta.dim();
        check_p3(p)?;
        if params.lambda.dim() != p - 1 {
            return Err(DistributionError::InvalidParameter(format!(
                "shape matrix must be {0} x {0}",
                p - 1
            )));
        }
        Ok(Self {
            frame: tangent_frame(&params.theta),
            law: CosineLaw::new(params.g, p)?,
            lambda: params.lambda,
        })
    }

    /// Uses the given frame for `Γ_θ` instead of the default one.
    pub fn with_frame(mut self, frame: TangentFrame) -> Result<Self> {
        if frame.theta() != self.frame.theta() {
            return Err(DistributionError::InvalidParameter("frame has a different theta".into()));
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    /// `c_{p,g} g(v) (uᵀΛ⁻¹u)^{-(p-1)/2} / √det Λ`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let sc = decompose(x, &self.frame)?;
        let q = self.frame.dim() as f64 - 1.0;
        Ok((self.law.ln_norm_const() + self.law.angular().ln_eval(sc.v)
            - 0.5 * self.lambda.ln_det()
            - 0.5 * q * self.lambda.inv_quadratic(sc.u.as_slice()).ln())
        .exp())
    }
}

impl Sampler for TangentElliptical {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw_into(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let v = self.law.sample_one(rng);
        let mut u = vec![0.0; self.dim() - 1];
        self.lambda.draw_into(rng, &mut u);
        compose(&self.frame, v, &u, out);
    }
}

pub fn sample_tangent_elliptical(
    params: &TangentEllipticalParams,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DirectionalSample> {
    Ok(TangentElliptical::new(params.clone())?.sample(n, rng))
}

pub fn density_tangent_elliptical(x: &UnitVector, params: &TangentEllipticalParams) -> Result<f64> {
    TangentElliptical::new(params.clone())?.density(x.as_slice())
}

#[derive(Debug, Clone)]
pub struct TangentVmfParams {
    pub theta: UnitVector,
    pub g: AngularFunction,
    /// Direction on `S^{p-2}`.
    pub mu: UnitVector,
    pub kappa: f64,
}

/// `X = Vθ + √(1-V²) Γ_θ U` with `V ~ g̃_p` and `U ~ M_{p-1}(μ, κ)`.
#[derive(Debug, Clone)]
pub struct TangentVmf {
    frame: TangentFrame,
    law: CosineLaw,
    sign: RotSym,
    mu: UnitVector,
    kappa: f64,
}

impl TangentVmf {
    pub fn new(params: TangentVmfParams) -> Result<Self> {
        let p = params.theta.dim();
        check_p3(p)?;
        if params.mu.dim() != p - 1 {
            return Err(DistributionError::InvalidParameter(format!(
                "mu must have {} coordinates",
                p - 1
            )));
        }
        let sign = vmf(params.mu.clone(), params.kappa)?;
        Ok(Self {
            frame: tangent_frame(&params.theta),
            law: CosineLaw::new(params.g, p)?,
            sign,
            mu: params.mu,
            kappa: params.kappa,
        })
    }

    pub fn with_frame(mut self, frame: TangentFrame) -> Result<Self> {
        if frame.theta() != self.frame.theta() {
            return Err(DistributionError::InvalidParameter("frame has a different theta".into()));
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    /// `ω_{p-1} c_{p,g} c^M_{p-1,κ} g(v) exp(κ μᵀu)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let sc = decompose(x, &self.frame)?;
        let p = self.frame.dim();
        Ok((ln_surface_area(p - 1)
            + self.law.ln_norm_const()
            + ln_vmf_norm_const(p - 1, self.kappa)?
            + self.law.angular().ln_eval(sc.v)
            + self.kappa * self.mu.dot(sc.u.as_slice()))
        .exp())
    }
}

impl Sampler for TangentVmf {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw_into(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let v = self.law.sample_one(rng);
        let mut u = Vec::with_capacity(self.dim() - 1);
        self.sign.draw_into(rng, &mut u);
        compose(&self.frame, v, &u, out);
    }
}

pub fn sample_tangent_vmf(
    params: &TangentVmfParams,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DirectionalSample> {
    Ok(TangentVmf::new(params.clone())?.sample(n, rng))
}

pub fn density_tangent_vmf(x: &UnitVector, params: &TangentVmfParams) -> Result<f64> {
    TangentVmf::new(params.clone())?.density(x.as_slice())
}

/// Finite mixture; each draw picks component `k` with probability `w_k`.
pub struct Mixture {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    components: Vec<Box<dyn Sampler>>,
}

impl std::fmt::Debug for Mixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mixture").field("weights", &self.weights).finish()
    }
}

impl Mixture {
    pub fn new(components: Vec<(f64, Box<dyn Sampler>)>) -> Result<Self> {
        if components.is_empty() {
            return Err(DistributionError::InvalidWeights("no components".into()));
        }
        let p = components[0].1.dim();
        if components.iter().any(|(_, c)| c.dim() != p) {
            return Err(DistributionError::InvalidParameter("components differ in dimension".into()));
        }
        if components.iter().any(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
            return Err(DistributionError::InvalidWeights("weights must be positive".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DistributionError::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(components.len());
        let mut weights = Vec::with_capacity(components.len());
        let mut samplers = Vec::with_capacity(components.len());
        for (w, c) in components {
            acc += w;
            cumulative.push(acc);
            weights.push(w);
            samplers.push(c);
        }
        Ok(Self {
            weights,
            cumulative,
            components: samplers,
        })
    }

    fn pick(&self, rng: &mut dyn RngCore) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.components.len() - 1)
    }

    /// Draws together with the index of the component each came from.
    pub fn sample_labeled(&self, n: usize, rng: &mut dyn RngCore) -> (DirectionalSample, Vec<usize>) {
        let mut data = Vec::with_capacity(n * self.dim());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let k = self.pick(rng);
            self.components[k].draw_into(rng, &mut data);
            labels.push(k);
        }
        (DirectionalSample::from_flat_unchecked(self.dim(), data), labels)
    }
}

impl Sampler for Mixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn draw_into(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let k = self.pick(rng);
        self.components[k].draw_into(rng, out);
    }
}

pub fn sample_mixture(
    components: Vec<(f64, Box<dyn Sampler>)>,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DirectionalSample> {
    Ok(Mixture::new(components)?.sample(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(p: usize, i: usize) -> UnitVector {
        UnitVector::basis(p, i).unwrap()
    }

    #[test]
    fn reductions_at_identity_and_zero_kappa() {
        let g = AngularFunction::vmf(2.0);
        let theta = UnitVector::normalize(vec![0.3, -0.4, 0.5]).unwrap();
        let rs = RotSym::new(theta.clone(), g.clone()).unwrap();
        let te = TangentElliptical::new(TangentEllipticalParams {
            theta: theta.clone(),
            g: g.clone(),
            lambda: ShapeMatrix::identity(2),
        })
        .unwrap();
        let tm = TangentVmf::new(TangentVmfParams {
            theta: theta.clone(),
            g,
            mu: e(2, 0),
            kappa: 0.0,
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut x = vec![0.0; 3];
            uniform_sphere_into(&mut rng, &mut x);
            let want = rs.density(&x);
            assert!((te.density(&x).unwrap() / want - 1.0).abs() < 1e-12);
            assert!((tm.density(&x).unwrap() / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tm_tilt_ratio() {
        let kappa = 1.7;
        let tm = TangentVmf::new(TangentVmfParams {
            theta: e(3, 0),
            g: AngularFunction::vmf(1.0),
            mu: e(2, 0),
            kappa,
        })
        .unwrap();
        let f = tm.frame().clone();
        let up = f.lift(&[1.0, 0.0]);
        let down = f.lift(&[-1.0, 0.0]);
        let v: f64 = 0.3;
        let r = (1.0 - v * v).sqrt();
        let x1: Vec<f64> = (0..3).map(|i| v * [1.0, 0.0, 0.0][i] + r * up[i]).collect();
        let x2: Vec<f64> = (0..3).map(|i| v * [1.0, 0.0, 0.0][i] + r * down[i]).collect();
        let ratio = tm.density(&x1).unwrap() / tm.density(&x2).unwrap();
        assert!((ratio - (2.0 * kappa).exp()).abs() < 1e-12 * ratio);
    }

    #[test]
    fn outputs_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let te = TangentElliptical::new(TangentEllipticalParams {
            theta: UnitVector::normalize(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            g: AngularFunction::exp_arcsin(0.5),
            lambda: ShapeMatrix::from_diagonal(&[2.0, 0.5, 0.5]).unwrap(),
        })
        .unwrap();
        let s = te.sample(1000, &mut rng);
        for row in s.rows() {
            let n: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_weights_validated() {
        let a: Box<dyn Sampler> = Box::new(vmf(e(3, 0), 1.0).unwrap());
        assert!(matches!(
            Mixture::new(vec![(0.7, a)]),
            Err(DistributionError::InvalidWeights(_))
        ));
        let a: Box<dyn Sampler> = Box::new(vmf(e(3, 0), 1.0).unwrap());
        let b: Box<dyn Sampler> = Box::new(vmf(e(4, 0), 1.0).unwrap());
        assert!(Mixture::new(vec![(0.5, a), (0.5, b)]).is_err());
    }

    #[test]
    fn tangent_families_need_p3() {
        let r = TangentVmf::new(TangentVmfParams {
            theta: e(2, 0),
            g: AngularFunction::uniform(),
            mu: e(2, 0),
            kappa: 1.0,
        });
        assert!(r.is_err());
    }
}
