//! Cosines and signs of a whole sample with respect to one location.

use nalgebra::{DMatrix, DVector};

use super::{Result, TestError};
use crate::geometry::{tangent_frame, DirectionalSample, TangentFrame, UnitVector, POLE_TOL};

/// `V_i = X_iᵀθ` and `U_i = Γᵀ X_i / ‖Γᵀ X_i‖` for every observation.
#[derive(Debug, Clone)]
pub struct Signs {
    p: usize,
    v: Vec<f64>,
    // row-major n x (p-1)
    u: Vec<f64>,
}

impl Signs {
    pub fn new(sample: &DirectionalSample, theta: &UnitVector) -> Result<Self> {
        Self::with_frame(sample, &tangent_frame(theta))
    }

    pub fn with_frame(sample: &DirectionalSample, frame: &TangentFrame) -> Result<Self> {
        let p = frame.dim();
        if sample.dim() != p {
            return Err(TestError::DimensionMismatch {
                expected: p,
                got: sample.dim(),
            });
        }
        let n = sample.n();
        let mut v = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n * (p - 1));
        let mut poles = Vec::new();
        for (i, x) in sample.rows().enumerate() {
            let vi = frame.theta().dot(x);
            if (1.0 - vi) * (1.0 + vi) <= POLE_TOL {
                poles.push(i);
                continue;
            }
            let ui = frame.project(x);
            let norm = ui.norm();
            if norm == 0.0 {
                poles.push(i);
                continue;
            }
            v.push(vi);
            u.extend(ui.iter().map(|c| c / norm));
        }
        if !poles.is_empty() {
            return Err(TestError::PoleObservations(poles));
        }
        Ok(Self { p, v, u })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn cosines(&self) -> &[f64] {
        &self.v
    }

    pub fn sign(&self, i: usize) -> &[f64] {
        let q = self.p - 1;
        &self.u[i * q..(i + 1) * q]
    }

    pub fn signs(&self) -> impl Iterator<Item = &[f64]> {
        self.u.chunks_exact(self.p - 1)
    }

    /// `Σ w_i U_i`.
    pub fn weighted_sum<F: Fn(usize, f64) -> f64>(&self, w: F) -> DVector<f64> {
        let mut s = DVector::zeros(self.p - 1);
        for (i, (ui, &vi)) in self.signs().zip(&self.v).enumerate() {
            let wi = w(i, vi);
            for (a, b) in s.iter_mut().zip(ui) {
                *a += wi * b;
            }
        }
        s
    }

    pub fn mean_sign(&self) -> DVector<f64> {
        self.weighted_sum(|_, _| 1.0) / self.n() as f64
    }

    /// `S = n⁻¹ Σ U_i U_iᵀ`.
    pub fn sign_scatter(&self) -> DMatrix<f64> {
        let q = self.p - 1;
        let mut s = DMatrix::zeros(q, q);
        for ui in self.signs() {
            for a in 0..q {
                let ua = ui[a];
                for b in a..q {
                    s[(a, b)] += ua * ui[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                s[(a, b)] = s[(b, a)];
            }
        }
        s / self.n() as f64
    }
}
