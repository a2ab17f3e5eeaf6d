//! Special functions, probability tails and quadrature shared by every other
//! module.

mod bessel;
mod gamma;
mod quadrature;

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i};
pub use gamma::{
    chi2_cdf, chi2_pdf, chi2_quantile, chi2_sf, erfc, gamma, incomplete_gamma, ln_gamma,
    noncentral_chi2_cdf, noncentral_chi2_sf, normal_cdf, normal_quantile, normal_sf,
};
pub use quadrature::{integrate, QuadratureRule, DEFAULT_ORDER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("I_{nu}({x}) overflows f64; use the scaled or log variant")]
    Overflow { nu: f64, x: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

/// Measure of the unit sphere `S^{d-1}` embedded in `R^d`.
pub fn surface_area(d: usize) -> f64 {
    assert!(d >= 1, "surface_area needs d >= 1");
    ln_surface_area(d).exp()
}

pub fn ln_surface_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - ln_gamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn areas() {
        assert!((surface_area(1) - 2.0).abs() < 1e-14);
        assert!((surface_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((surface_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((surface_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
