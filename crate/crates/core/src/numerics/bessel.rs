//! Modified Bessel function of the first kind for real order `nu >= 0`.
//!
//! Everything is computed through `ln I_nu(x)`: the ascending series has only
//! positive terms, so it is summed directly with exact power-of-two rescaling
//! to stay in range. Very large arguments switch to the Hankel expansion.

use super::gamma::ln_gamma;
use super::NumericsError;

const SERIES_LIMIT: f64 = 1500.0;
const RESCALE_EXP: i32 = 600;

fn check(nu: f64, x: f64) -> Result<(), NumericsError> {
    if !(nu >= 0.0) || !nu.is_finite() || !(x >= 0.0) || !x.is_finite() {
        return Err(NumericsError::Domain(format!(
            "bessel_i requires finite nu >= 0 and x >= 0 (nu = {nu}, x = {x})"
        )));
    }
    Ok(())
}

/// `ln I_nu(x)`; `-inf` at `x = 0` for `nu > 0`.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64, NumericsError> {
    check(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x > SERIES_LIMIT && nu * nu < 0.25 * x {
        if let Some(v) = ln_hankel(nu, x) {
            return Ok(v);
        }
    }
    Ok(ln_series(nu, x))
}

fn ln_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let scale = 2f64.powi(RESCALE_EXP);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut shifts = 0i32;
    let mut k = 0.0;
    loop {
        term *= q / ((k + 1.0) * (k + 1.0 + nu));
        sum += term;
        k += 1.0;
        if term < sum * 1e-17 {
            break;
        }
        if sum > scale {
            sum /= scale;
            term /= scale;
            shifts += 1;
        }
    }
    nu * half.ln() - ln_gamma(nu + 1.0)
        + sum.ln()
        + f64::from(shifts * RESCALE_EXP) * std::f64::consts::LN_2
}

fn ln_hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln());
        }
    }
    None
}

/// `I_nu(x)`. Fails with [`NumericsError::Overflow`] where the value is not
/// representable; callers then need [`bessel_i_scaled`] or [`ln_bessel_i`].
pub fn bessel_i(nu: f64, x: f64) -> Result<f64, NumericsError> {
    let l = ln_bessel_i(nu, x)?;
    if l > f64::MAX.ln() {
        return Err(NumericsError::Overflow { nu, x });
    }
    Ok(l.exp())
}

/// Exponentially scaled `e^{-x} I_nu(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64, NumericsError> {
    Ok((ln_bessel_i(nu, x)? - x).exp())
}
