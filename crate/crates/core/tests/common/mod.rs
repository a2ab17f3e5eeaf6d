#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rotsym::geometry::{DirectionalSample, UnitVector};
use rotsym::numerics::QuadratureRule;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_unit(p: usize, rng: &mut ChaCha8Rng) -> UnitVector {
    let v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
    UnitVector::normalize(v).unwrap()
}

pub fn uniform_sample(p: usize, n: usize, rng: &mut ChaCha8Rng) -> DirectionalSample {
    DirectionalSample::from_rows((0..n).map(|_| gaussian_unit(p, rng)).collect()).unwrap()
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_rotation(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(p, p, |_, _| StandardNormal.sample(rng));
    m.qr().q()
}

/// Cell of `S²` in `(z, φ)` coordinates.
#[derive(Clone, Copy)]
pub struct Cell {
    pub z: (f64, f64),
    pub phi: (f64, f64),
}

pub fn cells(nz: usize, nphi: usize) -> Vec<Cell> {
    let tau = std::f64::consts::TAU;
    let mut out = Vec::new();
    for i in 0..nz {
        for j in 0..nphi {
            out.push(Cell {
                z: (-1.0 + 2.0 * i as f64 / nz as f64, -1.0 + 2.0 * (i + 1) as f64 / nz as f64),
                phi: (
                    -std::f64::consts::PI + tau * j as f64 / nphi as f64,
                    -std::f64::consts::PI + tau * (j + 1) as f64 / nphi as f64,
                ),
            });
        }
    }
    out
}

pub fn cell_index(x: &[f64], nz: usize, nphi: usize) -> usize {
    let i = (((x[2] + 1.0) / 2.0 * nz as f64) as usize).min(nz - 1);
    let phi = x[1].atan2(x[0]);
    let j = (((phi + std::f64::consts::PI) / std::f64::consts::TAU * nphi as f64) as usize).min(nphi - 1);
    i * nphi + j
}

/// `∫_cell f dσ` with tensor Gauss-Legendre in `z` and `φ`.
pub fn integrate_cell<F: Fn(&[f64]) -> f64>(f: &F, c: Cell, order: usize) -> f64 {
    let rule = QuadratureRule::gauss_legendre(order);
    let (za, zb) = c.z;
    let (pa, pb) = c.phi;
    let mut s = 0.0;
    for (&xz, &wz) in rule.nodes().iter().zip(rule.weights()) {
        let z = 0.5 * (za + zb) + 0.5 * (zb - za) * xz;
        let r = (1.0 - z * z).max(0.0).sqrt();
        for (&xp, &wp) in rule.nodes().iter().zip(rule.weights()) {
            let phi = 0.5 * (pa + pb) + 0.5 * (pb - pa) * xp;
            let x = [r * phi.cos(), r * phi.sin(), z];
            s += wz * wp * f(&x);
        }
    }
    s * 0.25 * (zb - za) * (pb - pa)
}

pub fn sphere_integral<F: Fn(&[f64]) -> f64>(f: &F) -> f64 {
    cells(16, 16).into_iter().map(|c| integrate_cell(f, c, 24)).sum()
}

pub fn cell_counts(sample: &DirectionalSample, nz: usize, nphi: usize) -> Vec<u64> {
    let mut counts = vec![0u64; nz * nphi];
    for x in sample.rows() {
        counts[cell_index(x, nz, nphi)] += 1;
    }
    counts
}

pub fn cell_probs<F: Fn(&[f64]) -> f64>(f: &F, nz: usize, nphi: usize) -> Vec<f64> {
    let probs: Vec<f64> = cells(nz, nphi).into_iter().map(|c| integrate_cell(f, c, 12)).collect();
    let total: f64 = probs.iter().sum();
    probs.into_iter().map(|q| q / total).collect()
}

/// Tangent-plane projection `(x - (xᵀθ)θ) / ‖·‖`, kept in ambient coordinates
/// so that sign inner products can be formed without any frame.
pub fn ambient_sign(x: &[f64], theta: &[f64]) -> Vec<f64> {
    let v: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
    let t: Vec<f64> = x.iter().zip(theta).map(|(a, b)| a - v * b).collect();
    let n = t.iter().map(|a| a * a).sum::<f64>().sqrt();
    t.into_iter().map(|a| a / n).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫ f dσ` over `S²` in polar coordinates about `axis`: Gauss-Legendre in the
/// cosine, periodic trapezoid in the azimuth. Densities of the tangent
/// families are smooth in these coordinates even though they jump at `±axis`.
pub fn sphere_integral_about<F: Fn(&[f64]) -> f64>(axis: &[f64], f: &F) -> f64 {
    // Gram-Schmidt against the coordinate axis least aligned with `axis`
    let k = (0..3)
        .min_by(|&i, &j| axis[i].abs().partial_cmp(&axis[j].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d = dot(&e, axis);
    let mut a: Vec<f64> = (0..3).map(|i| e[i] - d * axis[i]).collect();
    let na = dot(&a, &a).sqrt();
    a.iter_mut().for_each(|x| *x /= na);
    let b = [
        axis[1] * a[2] - axis[2] * a[1],
        axis[2] * a[0] - axis[0] * a[2],
        axis[0] * a[1] - axis[1] * a[0],
    ];
    let rule = QuadratureRule::gauss_legendre(96);
    let m = 192;
    let mut s = 0.0;
    for (&v, &w) in rule.nodes().iter().zip(rule.weights()) {
        let r = (1.0 - v * v).sqrt();
        let mut ring = 0.0;
        for j in 0..m {
            let t = std::f64::consts::TAU * j as f64 / m as f64;
            let x: Vec<f64> = (0..3)
                .map(|i| v * axis[i] + r * (t.cos() * a[i] + t.sin() * b[i]))
                .collect();
            ring += f(&x);
        }
        s += w * ring * std::f64::consts::TAU / m as f64;
    }
    s
}
