//! Tests about a specified location `θ`.

use super::{
    check_p, df_loc, df_sc, Method, Reference, Result, Signs, TestError, TestResult, ThetaMode,
};
use crate::geometry::{DirectionalSample, UnitVector};
use crate::numerics::chi2_sf;

const FISHER_FLOOR: f64 = 1e-300;

/// `n(p-1)‖Ū‖²`.
pub(crate) fn loc_stat(s: &Signs) -> f64 {
    let n = s.n() as f64;
    n * (s.p() as f64 - 1.0) * s.mean_sign().norm_squared()
}

/// `n(p²-1)/2 (tr S² - 1/(p-1))`; nonnegative up to rounding since the
/// eigenvalues of `S` sum to one.
pub(crate) fn sc_stat(s: &Signs) -> f64 {
    let n = s.n() as f64;
    let p = s.p() as f64;
    let m = s.sign_scatter();
    let tr2 = m.norm_squared();
    (0.5 * n * (p * p - 1.0) * (tr2 - 1.0 / (p - 1.0))).max(0.0)
}

/// `(p-1) ‖Σ v_i u_i‖² / Σ v_i²`.
pub(crate) fn cov_stat(s: &Signs) -> Result<f64> {
    let ss: f64 = s.cosines().iter().map(|v| v * v).sum();
    if ss <= 1e-12 {
        return Err(TestError::DegenerateCosines);
    }
    let r = s.weighted_sum(|_, v| v);
    Ok((s.p() as f64 - 1.0) * r.norm_squared() / ss)
}

/// Fisher combination `-2 ln(pv_loc) - 2 ln(pv_sc)`; component p-values
/// below `1e-300` are clamped and flagged.
pub(crate) fn fisher(q_loc: f64, q_sc: f64, p: usize) -> Result<(f64, bool)> {
    let a = chi2_sf(q_loc, f64::from(df_loc(p)))?;
    let b = chi2_sf(q_sc, f64::from(df_sc(p)))?;
    let clamped = a < FISHER_FLOOR || b < FISHER_FLOOR;
    let stat = -2.0 * a.max(FISHER_FLOOR).ln() - 2.0 * b.max(FISHER_FLOOR).ln();
    Ok((stat, clamped))
}

pub(crate) fn hd_center_scale(method: Method, p: usize) -> Option<(f64, f64)> {
    let p = p as f64;
    match method {
        Method::SLoc | Method::SLocHd => Some((p - 1.0, (2.0 * (p - 1.0)).sqrt())),
        Method::SSc | Method::SScHd => {
            let m = (p - 2.0) * (p + 1.0);
            Some((0.5 * m, m.sqrt()))
        }
        Method::SHyb | Method::SHybHd => {
            let m = p * (p + 1.0) - 4.0;
            Some((0.5 * m, m.sqrt()))
        }
        _ => None,
    }
}

pub(crate) struct Battery {
    signs: Signs,
    theta: UnitVector,
    q_loc: f64,
    q_sc: f64,
}

impl Battery {
    pub(crate) fn new(sample: &DirectionalSample, theta: &UnitVector) -> Result<Self> {
        check_p(theta.dim())?;
        let signs = Signs::new(sample, theta)?;
        Ok(Self::from_signs(signs, theta.clone()))
    }

    pub(crate) fn from_signs(signs: Signs, theta: UnitVector) -> Self {
        let q_loc = loc_stat(&signs);
        let q_sc = sc_stat(&signs);
        Self {
            signs,
            theta,
            q_loc,
            q_sc,
        }
    }

    pub(crate) fn signs(&self) -> &Signs {
        &self.signs
    }

    pub(crate) fn q_sc(&self) -> f64 {
        self.q_sc
    }

    pub(crate) fn run(&self, method: Method) -> Result<TestResult> {
        let p = self.signs.p();
        let chi = |df| Reference::ChiSquare { df };
        let (stat, reference, clamped) = match method {
            Method::SLoc => (self.q_loc, chi(df_loc(p)), false),
            Method::SSc => (self.q_sc, chi(df_sc(p)), false),
            Method::SHyb => (self.q_loc + self.q_sc, chi(df_loc(p) + df_sc(p)), false),
            Method::SHybF => {
                let (s, c) = fisher(self.q_loc, self.q_sc, p)?;
                (s, chi(4), c)
            }
            Method::SCov => (cov_stat(&self.signs)?, chi(df_loc(p)), false),
            Method::SLocHd | Method::SScHd | Method::SHybHd => {
                let q = match method {
                    Method::SLocHd => self.q_loc,
                    Method::SScHd => self.q_sc,
                    _ => self.q_loc + self.q_sc,
                };
                let (c, s) = hd_center_scale(method, p).expect("hd method");
                ((q - c) / s, Reference::StandardNormal, false)
            }
            other => return Err(TestError::MissingEstimator(other)),
        };
        let mut r = TestResult::new(
            method,
            stat,
            reference,
            ThetaMode::Specified(self.theta.clone()),
            self.signs.n(),
            p,
        )?;
        r.clamped = clamped;
        Ok(r)
    }
}

fn run(method: Method, sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    Battery::new(sample, theta)?.run(method)
}

/// Location test `Q_loc = n(p-1)‖Ū‖²`, `χ²_{p-1}` reference.
pub fn q_loc(sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    run(Method::SLoc, sample, theta)
}

/// Scatter test `Q_sc`, `χ²_{(p-2)(p+1)/2}` reference.
pub fn q_sc(sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    run(Method::SSc, sample, theta)
}

/// `Q_loc + Q_sc`.
pub fn q_hyb(sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    run(Method::SHyb, sample, theta)
}

/// Fisher combination of the location and scatter p-values, `χ²_4` reference.
pub fn q_hyb_fisher(sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    run(Method::SHybF, sample, theta)
}

/// Cosine-weighted location test `(p-1)‖Σ v_i u_i‖² / Σ v_i²`.
pub fn q_cov(sample: &DirectionalSample, theta: &UnitVector) -> Result<TestResult> {
    run(Method::SCov, sample, theta)
}

/// `(Q - center) / scale` for the specified-location `loc`, `sc` and `hyb`
/// statistics, whose centred and scaled versions are asymptotically
/// standard normal when `p` grows with `n`.
pub fn high_dim_z(result: &TestResult) -> Result<f64> {
    match result.method {
        Method::SLoc | Method::SSc | Method::SHyb => {
            let (c, s) = hd_center_scale(result.method, result.p).expect("checked");
            Ok((result.statistic - c) / s)
        }
        m => Err(TestError::UnsupportedMethod(m)),
    }
}

/// Same as [`high_dim_z`], packaged as a normal-referenced result.
pub fn high_dim_standardize(result: &TestResult) -> Result<TestResult> {
    let z = high_dim_z(result)?;
    let method = match result.method {
        Method::SLoc => Method::SLocHd,
        Method::SSc => Method::SScHd,
        _ => Method::SHybHd,
    };
    TestResult::new(
        method,
        z,
        Reference::StandardNormal,
        result.theta_mode.clone(),
        result.n,
        result.p,
    )
}
