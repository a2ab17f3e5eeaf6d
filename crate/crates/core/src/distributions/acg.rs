//! Shape matrices and the angular central Gaussian law.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{DistributionError, Result};
use crate::geometry::{DirectionalSample, UnitVector};
use crate::numerics::ln_surface_area;

const SYM_TOL: f64 = 1e-10;

/// Symmetric positive-definite `q x q` matrix with trace `q`.
#[derive(Debug, Clone)]
pub struct ShapeMatrix {
    lambda: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    inverse: DMatrix<f64>,
    ln_det: f64,
    rescaled_from: Option<f64>,
}

impl ShapeMatrix {
    /// Validates symmetry and definiteness; a matrix whose trace is not `q`
    /// is rescaled and the original trace is kept in
    /// [`rescaled_from`](Self::rescaled_from) so callers can warn.
    pub fn new(lambda: DMatrix<f64>) -> Result<Self> {
        let q = lambda.nrows();
        if q == 0 || lambda.ncols() != q {
            return Err(DistributionError::InvalidShape("matrix must be square and nonempty".into()));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(DistributionError::InvalidShape("non-finite entry".into()));
        }
        if (&lambda - lambda.transpose()).amax() > SYM_TOL {
            return Err(DistributionError::InvalidShape("matrix is not symmetric".into()));
        }
        let tr = lambda.trace();
        let (lambda, rescaled_from) = if (tr - q as f64).abs() > SYM_TOL {
            if !(tr > 0.0) {
                return Err(DistributionError::InvalidShape(format!("trace {tr} is not positive")));
            }
            (lambda * (q as f64 / tr), Some(tr))
        } else {
            (lambda, None)
        };
        let chol = Cholesky::new(lambda.clone())
            .ok_or_else(|| DistributionError::InvalidShape("matrix is not positive definite".into()))?;
        let l = chol.l();
        let ln_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let inverse = chol.inverse();
        Ok(Self {
            lambda,
            chol_l: l,
            inverse,
            ln_det,
            rescaled_from,
        })
    }

    pub fn identity(q: usize) -> Self {
        Self::new(DMatrix::identity(q, q)).expect("identity is a valid shape")
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn rescaled_from(&self) -> Option<f64> {
        self.rescaled_from
    }

    pub fn ln_det(&self) -> f64 {
        self.ln_det
    }

    /// `uᵀ Λ⁻¹ u`.
    pub fn inv_quadratic(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        u.dot(&(&self.inverse * &u))
    }

    /// One draw `Lz / ‖Lz‖`, `z ~ N(0, I)`, written to `out`.
    pub fn draw_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let q = self.dim();
        let z = DVector::from_iterator(q, (0..q).map(|_| StandardNormal.sample(rng)));
        let y = &self.chol_l * z;
        let n = y.norm();
        for (o, yi) in out.iter_mut().zip(y.iter()) {
            *o = yi / n;
        }
    }

    /// ACG density on `S^{q-1}`: `(uᵀΛ⁻¹u)^{-q/2} / (ω_q √det Λ)`.
    pub fn acg_density(&self, u: &[f64]) -> f64 {
        let q = self.dim() as f64;
        (-ln_surface_area(self.dim()) - 0.5 * self.ln_det - 0.5 * q * self.inv_quadratic(u).ln())
            .exp()
    }
}

/// `n` ACG draws on `S^{q-1}`, `q = dim Λ >= 2`.
pub fn sample_acg(lambda: &ShapeMatrix, n: usize, rng: &mut dyn RngCore) -> Result<DirectionalSample> {
    let q = lambda.dim();
    if q < 2 {
        return Err(DistributionError::InvalidParameter("ACG needs dimension >= 2".into()));
    }
    let mut rows = Vec::with_capacity(n);
    let mut buf = vec![0.0; q];
    for _ in 0..n {
        lambda.draw_into(rng, &mut buf);
        rows.push(UnitVector::normalize(buf.clone())?);
    }
    Ok(DirectionalSample::from_rows(rows)?)
}
