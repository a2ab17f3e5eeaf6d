//! Points on `S^{p-1}`, tangent frames, the sign/cosine split and the two
//! location estimators.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance on `|‖x‖ - 1|` for a vector to count as a unit vector.
pub const UNIT_TOL: f64 = 1e-10;
/// Observations with `1 - v^2` at or below this have no usable sign.
pub const POLE_TOL: f64 = 1e-12;
const RESULTANT_TOL: f64 = 1e-12;
const EIGEN_GAP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("observation lies within pole tolerance of the axis; sign undefined")]
    NearPole,
    #[error("resultant vector is numerically zero; spherical mean undefined")]
    UndefinedMean,
    #[error("largest eigenvalue of the sample covariance is not simple; axis ambiguous")]
    AmbiguousAxis,
    #[error("principal axis needs n >= p (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("frame is not orthonormal or not orthogonal to theta")]
    InvalidFrame,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A point of `S^{p-1}`, `p >= 2`.
#[derive(Clone, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("UnitVector").field(&self.0.as_slice()).finish()
    }
}

impl UnitVector {
    /// Checks the norm against [`UNIT_TOL`] without rescaling.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(coords))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        check_coords(v.as_slice())?;
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NotUnit { norm });
        }
        Ok(Self(v))
    }

    /// Divides by the norm; fails only on zero or non-finite input.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords)?;
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::NotUnit { norm });
        }
        Ok(Self(v / norm))
    }

    /// `i`-th canonical basis vector of `R^p`.
    pub fn basis(p: usize, i: usize) -> Result<Self> {
        if p < 2 {
            return Err(GeometryError::InvalidDimension(p));
        }
        assert!(i < p, "basis index {i} out of range for p = {p}");
        let mut v = DVector::zeros(p);
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(self.as_slice(), other)
    }

    /// Angle in radians, clamped against rounding.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        self.dot(other.as_slice()).clamp(-1.0, 1.0).acos()
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }
}

fn check_coords(c: &[f64]) -> Result<()> {
    if c.len() < 2 {
        return Err(GeometryError::InvalidDimension(c.len()));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A location `theta` with an orthonormal basis `gamma` (`p x (p-1)`) of its
/// orthogonal complement.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    theta: UnitVector,
    gamma: DMatrix<f64>,
    // Householder vector w and 2/‖w‖² when gamma came from tangent_frame;
    // lets decompose run in O(p) instead of O(p^2).
    householder: Option<(DVector<f64>, f64)>,
}

/// Deterministic frame from the Householder reflector sending `e_1` to
/// `∓theta`; `gamma` is its columns `2..p`.
pub fn tangent_frame(theta: &UnitVector) -> TangentFrame {
    let p = theta.dim();
    let t = theta.as_dvector();
    let s = if t[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = t.clone();
    w[0] += s;
    let beta = 2.0 / w.norm_squared();
    let mut gamma = DMatrix::zeros(p, p - 1);
    for j in 1..p {
        for i in 0..p {
            let delta = if i == j { 1.0 } else { 0.0 };
            gamma[(i, j - 1)] = delta - beta * w[i] * w[j];
        }
    }
    TangentFrame {
        theta: theta.clone(),
        gamma,
        householder: Some((w, beta)),
    }
}

impl TangentFrame {
    /// Frame from an explicit basis, checked against both orthonormality
    /// identities at [`UNIT_TOL`].
    pub fn from_parts(theta: UnitVector, gamma: DMatrix<f64>) -> Result<Self> {
        let p = theta.dim();
        if gamma.nrows() != p || gamma.ncols() != p - 1 {
            return Err(GeometryError::DimensionMismatch {
                expected: p,
                got: gamma.nrows(),
            });
        }
        let gtg = gamma.transpose() * &gamma;
        let ggt = &gamma * gamma.transpose();
        let proj = DMatrix::identity(p, p) - theta.as_dvector() * theta.as_dvector().transpose();
        let id = DMatrix::<f64>::identity(p - 1, p - 1);
        if (gtg - id).amax() > UNIT_TOL || (ggt - proj).amax() > UNIT_TOL {
            return Err(GeometryError::InvalidFrame);
        }
        Ok(Self {
            theta,
            gamma,
            householder: None,
        })
    }

    pub fn theta(&self) -> &UnitVector {
        &self.theta
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// `Γᵀ x` for a vector of length `p`.
    pub fn project(&self, x: &[f64]) -> DVector<f64> {
        match &self.householder {
            Some((w, beta)) => {
                let c = beta * dot(w.as_slice(), x);
                DVector::from_iterator(x.len() - 1, (1..x.len()).map(|i| x[i] - c * w[i]))
            }
            None => self.gamma.tr_mul(&DVector::from_column_slice(x)),
        }
    }

    /// `Γ u` for a tangent vector of length `p - 1`.
    pub fn lift(&self, u: &[f64]) -> DVector<f64> {
        match &self.householder {
            Some((w, beta)) => {
                let c = beta * dot(&w.as_slice()[1..], u);
                let mut out = -c * w;
                for (o, ui) in out.iter_mut().skip(1).zip(u) {
                    *o += ui;
                }
                out
            }
            None => &self.gamma * DVector::from_column_slice(u),
        }
    }
}

/// Cosine `v = xᵀθ` and multivariate sign `u = Γᵀx / √(1 - v²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCosine {
    pub v: f64,
    pub u: DVector<f64>,
}

pub fn decompose(x: &[f64], frame: &TangentFrame) -> Result<SignCosine> {
    let p = frame.dim();
    if x.len() != p {
        return Err(GeometryError::DimensionMismatch {
            expected: p,
            got: x.len(),
        });
    }
    let v = frame.theta.dot(x);
    if (1.0 - v) * (1.0 + v) <= POLE_TOL {
        return Err(GeometryError::NearPole);
    }
    let mut u = frame.project(x);
    // normalising by the computed norm rather than √(1-v²) keeps ‖u‖ = 1
    // exactly even when x is only unit to within rounding
    let norm = u.norm();
    if norm == 0.0 {
        return Err(GeometryError::NearPole);
    }
    u /= norm;
    Ok(SignCosine { v, u })
}

pub fn reconstruct(sc: &SignCosine, frame: &TangentFrame) -> UnitVector {
    let v = sc.v.clamp(-1.0, 1.0);
    let r = ((1.0 - v) * (1.0 + v)).sqrt();
    let x = frame.theta.as_dvector() * v + frame.lift(sc.u.as_slice()) * r;
    let n = x.norm();
    UnitVector(x / n)
}

/// `n >= 1` points of a common `S^{p-1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSample {
    p: usize,
    data: Vec<f64>,
}

impl DirectionalSample {
    pub fn from_rows(rows: Vec<UnitVector>) -> Result<Self> {
        let first = rows.first().ok_or(GeometryError::EmptySample)?;
        let p = first.dim();
        let mut data = Vec::with_capacity(rows.len() * p);
        for r in &rows {
            if r.dim() != p {
                return Err(GeometryError::DimensionMismatch {
                    expected: p,
                    got: r.dim(),
                });
            }
            data.extend_from_slice(r.as_slice());
        }
        Ok(Self { p, data })
    }

    /// Row-major buffer; every row must be unit to [`UNIT_TOL`].
    pub fn from_flat(p: usize, data: Vec<f64>) -> Result<Self> {
        if p < 2 {
            return Err(GeometryError::InvalidDimension(p));
        }
        if data.is_empty() {
            return Err(GeometryError::EmptySample);
        }
        if !data.len().is_multiple_of(p) {
            return Err(GeometryError::DimensionMismatch {
                expected: p,
                got: data.len() % p,
            });
        }
        for row in data.chunks_exact(p) {
            check_coords(row)?;
            let norm = dot(row, row).sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(GeometryError::NotUnit { norm });
            }
        }
        Ok(Self { p, data })
    }

    pub(crate) fn from_flat_unchecked(p: usize, data: Vec<f64>) -> Self {
        debug_assert!(p >= 2 && !data.is_empty() && data.len().is_multiple_of(p));
        Self { p, data }
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// `O x_i` for every row.
    pub fn transform(&self, o: &DMatrix<f64>) -> Self {
        assert_eq!(o.ncols(), self.p);
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            let y = o * DVector::from_column_slice(row);
            data.extend_from_slice(y.as_slice());
        }
        Self { p: self.p, data }
    }

    pub fn resultant(&self) -> DVector<f64> {
        let mut s = DVector::zeros(self.p);
        for row in self.rows() {
            for (a, b) in s.iter_mut().zip(row) {
                *a += b;
            }
        }
        s
    }
}

/// `X̄ / ‖X̄‖`.
pub fn spherical_mean(sample: &DirectionalSample) -> Result<UnitVector> {
    let mean = sample.resultant() / sample.n() as f64;
    let norm = mean.norm();
    if norm <= RESULTANT_TOL {
        return Err(GeometryError::UndefinedMean);
    }
    Ok(UnitVector(mean / norm))
}

/// Leading eigenvector of `S = n⁻¹ Σ (Xᵢ - X̄)(Xᵢ - X̄)ᵀ`, signed so that its
/// first nonzero coordinate is positive.
pub fn principal_axis(sample: &DirectionalSample) -> Result<UnitVector> {
    let (n, p) = (sample.n(), sample.dim());
    if n < p {
        return Err(GeometryError::TooFewObservations { n, p });
    }
    let mean = sample.resultant() / n as f64;
    let mut s = DMatrix::<f64>::zeros(p, p);
    for row in sample.rows() {
        let d = DVector::from_column_slice(row) - &mean;
        s.ger(1.0, &d, &d, 1.0);
    }
    s /= n as f64;
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]] <= EIGEN_GAP_TOL {
        return Err(GeometryError::AmbiguousAxis);
    }
    let mut axis: DVector<f64> = eig.eigenvectors.column(order[0]).into_owned();
    axis /= axis.norm();
    if let Some(first) = axis.iter().find(|c| c.abs() > 1e-14) {
        if *first < 0.0 {
            axis = -axis;
        }
    }
    Ok(UnitVector(axis))
}

/// How the location is obtained when it is not specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    SphericalMean,
    PrincipalAxis,
    /// A known value passed through unchanged.
    Fixed(UnitVector),
}

impl Estimator {
    pub fn estimate(&self, sample: &DirectionalSample) -> Result<UnitVector> {
        match self {
            Estimator::SphericalMean => spherical_mean(sample),
            Estimator::PrincipalAxis => principal_axis(sample),
            Estimator::Fixed(t) => {
                if t.dim() != sample.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        expected: sample.dim(),
                        got: t.dim(),
                    });
                }
                Ok(t.clone())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::SphericalMean => "mean",
            Estimator::PrincipalAxis => "axis",
            Estimator::Fixed(_) => "fixed",
        }
    }
}
