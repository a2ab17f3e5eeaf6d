//! Information functionals, asymptotic relative efficiencies, noncentrality
//! parameters and the power they predict.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::distributions::{AngularFunction, CosineLaw, DistributionError};
use crate::numerics::{
    chi2_quantile, integrate, ln_bessel_i, ln_gamma, noncentral_chi2_sf, NumericsError,
    QuadratureRule, DEFAULT_ORDER,
};

const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LecamError {
    #[error("p must be >= 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("angular function {0} has no score function attached")]
    MissingScore(String),
    #[error("integral for {0} does not converge under quadrature refinement")]
    Divergent(&'static str),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("noncentrality denominator is not positive ({0})")]
    DegenerateInformation(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, LecamError>;

/// `E[h(V)]` for `V ~ g̃_p`, accepted only if doubling the rule order moves
/// the value by less than `1e-8` (relative to `max(1, |value|)`).
pub fn expect<H: Fn(f64) -> f64>(law: &CosineLaw, h: H, name: &'static str) -> Result<f64> {
    let coarse = QuadratureRule::angular(DEFAULT_ORDER);
    let fine = QuadratureRule::angular(2 * DEFAULT_ORDER);
    let f = |t: f64| {
        let d = law.density(t);
        if d == 0.0 {
            0.0
        } else {
            h(t) * d
        }
    };
    let a = integrate(f, &coarse);
    let b = integrate(f, &fine);
    if !a.is_finite() || !b.is_finite() || (a - b).abs() > CONVERGENCE_TOL * b.abs().max(1.0) {
        return Err(LecamError::Divergent(name));
    }
    Ok(b)
}

/// `ℐ_p(g)`, `𝒥_p(g)` and the cross functionals `𝒥_p(f;g)`, `ℋ_p(f;g)`,
/// `𝒦_p(f;g)`, all as expectations under `g̃_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoFunctionals {
    pub i_p: f64,
    pub j_p: f64,
    pub j_fg: f64,
    pub h_fg: f64,
    pub k_fg: f64,
}

fn score(g: &AngularFunction) -> Result<impl Fn(f64) -> f64 + '_> {
    if !g.has_score() {
        return Err(LecamError::MissingScore(g.label().to_owned()));
    }
    Ok(move |t| g.phi(t).expect("score present"))
}

pub fn info_functionals(f: &AngularFunction, g: &AngularFunction, p: usize) -> Result<InfoFunctionals> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    let law = CosineLaw::new(g.clone(), p)?;
    let phi_f = score(f)?;
    let phi_g = score(g)?;
    let s2 = |t: f64| (1.0 - t) * (1.0 + t);
    Ok(InfoFunctionals {
        i_p: expect(&law, |t| phi_g(t) * s2(t).sqrt(), "I_p(g)")?,
        j_p: expect(&law, |t| phi_g(t).powi(2) * s2(t), "J_p(g)")?,
        j_fg: expect(&law, |t| phi_f(t) * phi_g(t) * s2(t), "J_p(f;g)")?,
        h_fg: expect(&law, |t| phi_f(t) * s2(t).sqrt(), "H_p(f;g)")?,
        k_fg: expect(&law, |t| phi_f(t).powi(2) * s2(t), "K_p(f;g)")?,
    })
}

/// `ℐ_p(g)` through its integration-by-parts form
/// `(p-2) E[V (1-V²)^{-1/2}]`, which needs no score.
pub fn info_i_by_parts(g: &AngularFunction, p: usize) -> Result<f64> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    let law = CosineLaw::new(g.clone(), p)?;
    let m = expect(&law, |t| t / ((1.0 - t) * (1.0 + t)).sqrt(), "E[V/sqrt(1-V^2)]")?;
    Ok((p as f64 - 2.0) * m)
}

/// `𝒥_p(f;g)` through `(p-1) E[φ_f(V) V] - E[φ_f'(V)(1-V²)]`.
pub fn info_j_by_parts(f: &AngularFunction, g: &AngularFunction, p: usize) -> Result<f64> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    let phi_f = score(f)?;
    let law = CosineLaw::new(g.clone(), p)?;
    let a = expect(&law, |t| phi_f(t) * t, "E[phi_f(V) V]")?;
    let b = expect(
        &law,
        |t| f.phi_prime(t).expect("score present") * (1.0 - t) * (1.0 + t),
        "E[phi_f'(V)(1-V^2)]",
    )?;
    Ok((p as f64 - 1.0) * a - b)
}

/// Population counterpart `D_{p,g} = (p-2) E[V(1-V²)^{-1/2}] / ((p-1) E[V])`
/// of the sample quantity `D̂_p`.
pub fn population_d(g: &AngularFunction, p: usize) -> Result<f64> {
    let law = CosineLaw::new(g.clone(), p)?;
    let ev = expect(&law, |t| t, "E[V]")?;
    if ev.abs() < 1e-12 {
        return Err(LecamError::DegenerateInformation(ev));
    }
    Ok(info_i_by_parts(g, p)? / ((p as f64 - 1.0) * ev))
}

/// ARE of the estimated-location vMF test relative to its specified-location
/// counterpart, `1 - ℐ_p²/𝒥_p`, from the Bessel closed form.
pub fn are_vmf(p: usize, eta: f64) -> Result<f64> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(LecamError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let pf = p as f64;
    // shared scaling: every Bessel term enters as a log, so the ratio is
    // formed without ever evaluating I_ν itself
    let ln_ratio = std::f64::consts::LN_2 + 2.0 * ln_gamma(0.5 * pf)
        + 2.0 * ln_bessel_i(0.5 * (pf - 1.0), eta)?
        - (pf - 1.0).ln()
        - 2.0 * ln_gamma(0.5 * (pf - 1.0))
        - ln_bessel_i(0.5 * (pf - 2.0), eta)?
        - ln_bessel_i(0.5 * pf, eta)?;
    Ok((1.0 - ln_ratio.exp()).clamp(0.0, 1.0))
}

/// Same ARE from quadrature of `ℐ_p` and `𝒥_p`.
pub fn are_vmf_quadrature(p: usize, eta: f64) -> Result<f64> {
    let g = AngularFunction::vmf(eta);
    let info = info_functionals(&g, &g, p)?;
    Ok(1.0 - info.i_p * info.i_p / info.j_p)
}

/// `λ = (p-1) tr[L²] / (2(p+1))` for `Λ_n = I + n^{-1/2} L`.
pub fn noncentrality_te(l: &DMatrix<f64>, p: usize) -> Result<f64> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    if l.nrows() != p - 1 || l.ncols() != p - 1 {
        return Err(LecamError::InvalidPerturbation(format!("L must be {0} x {0}", p - 1)));
    }
    if (l - l.transpose()).amax() > 1e-10 {
        return Err(LecamError::InvalidPerturbation("L is not symmetric".into()));
    }
    if l.trace().abs() > 1e-10 {
        return Err(LecamError::InvalidPerturbation(format!(
            "L must be traceless, trace is {}",
            l.trace()
        )));
    }
    let pf = p as f64;
    Ok((pf - 1.0) * (l * l).trace() / (2.0 * (pf + 1.0)))
}

/// `λ = k² / (p-1)` for `κ_n = n^{-1/2} k`.
pub fn noncentrality_tm(k: f64, p: usize) -> Result<f64> {
    if p < 3 {
        return Err(LecamError::DimensionTooSmall(p));
    }
    if !(k >= 0.0) {
        return Err(LecamError::InvalidParameter(format!("k must be >= 0, got {k}")));
    }
    Ok(k * k / (p as f64 - 1.0))
}

/// Noncentrality of the efficient location test built on score `f` when the
/// data have angular function `g`, under `κ_n = n^{-1/2} k`.
pub fn noncentrality_semiparam(
    f: &AngularFunction,
    g: &AngularFunction,
    k: f64,
    p: usize,
) -> Result<f64> {
    let info = info_functionals(f, g, p)?;
    noncentrality_from_info(&info, k, p)
}

pub fn noncentrality_from_info(info: &InfoFunctionals, k: f64, p: usize) -> Result<f64> {
    let base = noncentrality_tm(k, p)?;
    if info.j_fg.abs() < 1e-14 {
        return Err(LecamError::DegenerateInformation(info.j_fg));
    }
    let r = info.i_p / info.j_fg;
    let num = (1.0 - r * info.h_fg).powi(2);
    let den = 1.0 - 2.0 * r * info.h_fg + r * r * info.k_fg;
    if !(den > 1e-14) {
        return Err(LecamError::DegenerateInformation(den));
    }
    Ok(base * num / den)
}

/// Limiting power `P[χ²_df(λ) > χ²_{df,1-α}]`.
pub fn predicted_power(lambda: f64, df: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LecamError::InvalidParameter(format!("alpha must be in (0,1), got {alpha}")));
    }
    let df = f64::from(df);
    let c = chi2_quantile(df, 1.0 - alpha)?;
    Ok(noncentral_chi2_sf(c, df, lambda)?)
}
