//! One-sample Kolmogorov-Smirnov and Pearson χ² goodness-of-fit tests, used
//! to check samplers and null distributions.

use crate::numerics::{chi2_sf, NumericsError};

/// KS statistic `sup |F_n - F|` and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_test<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    assert!(!data.is_empty(), "KS test needs data");
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &xi) in x.iter().enumerate() {
        let f = cdf(xi);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    let sn = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    }
}

/// `P[K > x]` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // alternating series converges slowly here and the value is 1
        // to double precision
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareGof {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Pearson test of observed bin counts against bin probabilities. Bins with
/// expected count below 5 are pooled with their neighbour.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquareGof, NumericsError> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(NumericsError::Domain("need matching counts and probabilities, at least 2 bins".into()));
    }
    let n: u64 = counts.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&c, &pr) in counts.iter().zip(probs) {
        acc.0 += c as f64;
        acc.1 += n as f64 * pr / total_p;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    if pooled.len() < 2 {
        return Err(NumericsError::Domain("fewer than 2 bins after pooling".into()));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (pooled.len() - 1) as u32;
    Ok(ChiSquareGof {
        statistic,
        df,
        p_value: chi2_sf(statistic, f64::from(df))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_values() {
        // classical critical values
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_on_a_perfect_grid() {
        let n = 1000;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_test(&x, |t| t.clamp(0.0, 1.0));
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn chi_square_pools_small_bins() {
        let r = chi_square_gof(&[10, 10, 10, 10], &[0.25; 4]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.df, 3);
        let r = chi_square_gof(&[3, 4, 993], &[0.003, 0.004, 0.993]).unwrap();
        assert_eq!(r.df, 1);
        assert!(chi_square_gof(&[1], &[1.0]).is_err());
    }
}
