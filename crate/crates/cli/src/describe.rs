//! Kernel density summary of the cosines `xᵀθ`.

use rotsym::geometry::{DirectionalSample, UnitVector};
use serde::Serialize;
use thiserror::Error;

pub const MIN_OBSERVATIONS: usize = 10;
pub const DEFAULT_GRID: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum DescribeError {
    #[error("need at least {MIN_OBSERVATIONS} observations, got {0}")]
    InsufficientData(usize),
    #[error("theta has dimension {theta}, data has dimension {data}")]
    DimensionMismatch { theta: usize, data: usize },
    #[error("mass must lie in (0, 1], got {0}")]
    InvalidMass(f64),
    #[error("grid needs at least 8 points, got {0}")]
    InvalidGrid(usize),
    #[error("all cosines are equal; the bandwidth is zero")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub cosine: f64,
    /// `asin(cosine)` in degrees: the latitude when θ is the north pole.
    pub elevation_deg: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_deg: f64,
    pub hi_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortestSet {
    pub requested_mass: f64,
    pub mass: f64,
    /// Density level; the set is `{ĝ ≥ threshold}`.
    pub threshold: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeSummary {
    pub n: usize,
    pub p: usize,
    pub theta: Vec<f64>,
    pub bandwidth: f64,
    /// Cell midpoints on `[-1, 1]`.
    pub grid: Vec<f64>,
    pub grid_step: f64,
    /// Renormalised so that `Σ density · grid_step = 1`.
    pub density: Vec<f64>,
    pub modes: Vec<Mode>,
    pub shortest_set: ShortestSet,
}

fn elevation(v: f64) -> f64 {
    v.clamp(-1.0, 1.0).asin().to_degrees()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // linear interpolation between order statistics
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Normal-reference bandwidth `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kde of `cosines` on `m` equal cells of `[-1, 1]`, renormalised
/// to unit mass on the interval.
pub fn kde_grid(cosines: &[f64], h: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let step = 2.0 / m as f64;
    let grid: Vec<f64> = (0..m).map(|k| -1.0 + (k as f64 + 0.5) * step).collect();
    let mut dens: Vec<f64> = grid
        .iter()
        .map(|&t| cosines.iter().map(|&v| (-0.5 * ((t - v) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    let total: f64 = dens.iter().sum::<f64>() * step;
    dens.iter_mut().for_each(|d| *d /= total);
    (grid, dens)
}

/// Local maxima of the grid density, plateaus reported once at their left
/// end; an endpoint counts when it exceeds its only neighbour.
pub fn modes(grid: &[f64], dens: &[f64]) -> Vec<Mode> {
    let m = dens.len();
    let mut out = Vec::new();
    for k in 0..m {
        let left_ok = k == 0 || dens[k] > dens[k - 1];
        let mut j = k;
        while j + 1 < m && dens[j + 1] == dens[k] {
            j += 1;
        }
        let right_ok = j + 1 == m || dens[k] > dens[j + 1];
        if left_ok && right_ok && m > 1 {
            out.push(Mode {
                cosine: grid[k],
                elevation_deg: elevation(grid[k]),
                density: dens[k],
            });
        }
    }
    out
}

/// Cells selected by a density-threshold sweep: the smallest level set of the
/// grid density holding at least `mass`.
pub fn shortest_set_cells(dens: &[f64], step: f64, mass: f64) -> (Vec<bool>, f64, f64) {
    let mut order: Vec<usize> = (0..dens.len()).collect();
    order.sort_by(|&a, &b| dens[b].total_cmp(&dens[a]));
    let mut acc = 0.0;
    let mut threshold = dens[order[0]];
    for &k in &order {
        acc += dens[k] * step;
        threshold = dens[k];
        // relative slack absorbs the rounding of the renormalised total
        if acc >= mass * (1.0 - 1e-12) {
            break;
        }
    }
    let keep: Vec<bool> = dens.iter().map(|&d| d >= threshold).collect();
    let got = dens.iter().zip(&keep).filter(|(_, &k)| k).map(|(d, _)| d * step).sum();
    (keep, got, threshold)
}

pub fn describe(
    sample: &DirectionalSample,
    theta: &UnitVector,
    mass: f64,
    grid_points: usize,
) -> Result<KdeSummary, DescribeError> {
    if sample.dim() != theta.dim() {
        return Err(DescribeError::DimensionMismatch {
            theta: theta.dim(),
            data: sample.dim(),
        });
    }
    if sample.n() < MIN_OBSERVATIONS {
        return Err(DescribeError::InsufficientData(sample.n()));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(DescribeError::InvalidMass(mass));
    }
    if grid_points < 8 {
        return Err(DescribeError::InvalidGrid(grid_points));
    }
    let v: Vec<f64> = sample.rows().map(|x| theta.dot(x).clamp(-1.0, 1.0)).collect();
    let h = silverman_bandwidth(&v);
    if h.is_nan() || h <= 0.0 {
        return Err(DescribeError::Degenerate);
    }
    let (grid, density) = kde_grid(&v, h, grid_points);
    let step = 2.0 / grid_points as f64;
    let (keep, got, threshold) = shortest_set_cells(&density, step, mass);
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < keep.len() {
        if keep[k] {
            let start = k;
            while k + 1 < keep.len() && keep[k + 1] {
                k += 1;
            }
            let (lo, hi) = (grid[start] - step / 2.0, grid[k] + step / 2.0);
            intervals.push(Interval {
                lo,
                hi,
                lo_deg: elevation(lo),
                hi_deg: elevation(hi),
            });
        }
        k += 1;
    }
    Ok(KdeSummary {
        n: sample.n(),
        p: sample.dim(),
        theta: theta.as_slice().to_vec(),
        bandwidth: h,
        modes: modes(&grid, &density),
        grid,
        grid_step: step,
        density,
        shortest_set: ShortestSet {
            requested_mass: mass,
            mass: got,
            threshold,
            intervals,
        },
    })
}
