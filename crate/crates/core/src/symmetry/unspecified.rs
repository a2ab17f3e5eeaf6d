//! Tests about an estimated location `θ̂`.

use nalgebra::DVector;

use super::specified::{self, fisher};
use super::{
    check_p, df_loc, df_sc, Method, Reference, Result, Signs, TestError, TestResult, ThetaMode,
};
use crate::distributions::AngularFunction;
use crate::geometry::{DirectionalSample, Estimator, UnitVector};

const SUM_V_TOL: f64 = 1e-10;
const INFO_TOL: f64 = 1e-12;

/// Ingredients of the vMF-efficient location test at `θ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnspecifiedLocStats {
    pub d_hat: f64,
    pub e_hat: f64,
    pub f_hat: f64,
    pub delta_hat: DVector<f64>,
    /// Scalar multiplying `I_{p-1}` in the estimated information.
    pub gamma_hat: f64,
}

impl UnspecifiedLocStats {
    pub fn statistic(&self) -> Result<f64> {
        if self.gamma_hat <= INFO_TOL {
            return Err(TestError::SingularInformation(self.gamma_hat));
        }
        Ok(self.delta_hat.norm_squared() / self.gamma_hat)
    }
}

pub(crate) fn loc_stats_from_signs(s: &Signs) -> Result<UnspecifiedLocStats> {
    let n = s.n() as f64;
    let p = s.p() as f64;
    let v = s.cosines();
    let sum_v: f64 = v.iter().sum();
    if sum_v.abs() <= SUM_V_TOL {
        return Err(TestError::UndefinedD);
    }
    let root = |x: f64| ((1.0 - x) * (1.0 + x)).sqrt();
    let sum_ratio: f64 = v.iter().map(|&x| x / root(x)).sum();
    let d_hat = (p - 2.0) * sum_ratio / ((p - 1.0) * sum_v);
    let e_hat = v.iter().map(|&x| root(x)).sum::<f64>() / n;
    let f_hat = v.iter().map(|&x| x * x).sum::<f64>() / n;
    let delta_hat = s.weighted_sum(|_, x| 1.0 - d_hat * root(x)) / n.sqrt();
    let gamma_hat = (1.0 - 2.0 * d_hat * e_hat + d_hat * d_hat * (1.0 - f_hat)) / (p - 1.0);
    Ok(UnspecifiedLocStats {
        d_hat,
        e_hat,
        f_hat,
        delta_hat,
        gamma_hat,
    })
}

/// `D̂_p`, `Ê_p`, `F̂_p`, `Δ̂` and the `Γ̂` scalar at the given location.
pub fn unspecified_loc_stats(
    sample: &DirectionalSample,
    theta_hat: &UnitVector,
) -> Result<UnspecifiedLocStats> {
    check_p(theta_hat.dim())?;
    loc_stats_from_signs(&Signs::new(sample, theta_hat)?)
}

/// Sample cross-information functionals for a score function `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientScoreStats {
    pub i_hat: f64,
    pub j_hat: f64,
    pub h_hat: f64,
    pub k_hat: f64,
    pub delta: DVector<f64>,
    pub gamma: f64,
}

impl EfficientScoreStats {
    pub fn statistic(&self) -> Result<f64> {
        if self.gamma <= INFO_TOL {
            return Err(TestError::SingularInformation(self.gamma));
        }
        Ok(self.delta.norm_squared() / self.gamma)
    }
}

pub(crate) fn efficient_from_signs(s: &Signs, f: &AngularFunction) -> Result<EfficientScoreStats> {
    if !f.has_score() {
        return Err(TestError::MissingScore(f.label().to_owned()));
    }
    let n = s.n() as f64;
    let p = s.p() as f64;
    let v = s.cosines();
    let phi: Vec<f64> = v.iter().map(|&x| f.phi(x).expect("score present")).collect();
    let mut i_sum = 0.0;
    let mut j1 = 0.0;
    let mut j2 = 0.0;
    let mut h_sum = 0.0;
    let mut k_sum = 0.0;
    for (&x, &ph) in v.iter().zip(&phi) {
        let s2 = (1.0 - x) * (1.0 + x);
        let r = s2.sqrt();
        i_sum += x / r;
        j1 += ph * x;
        j2 += f.phi_prime(x).expect("score present") * s2;
        h_sum += ph * r;
        k_sum += ph * ph * s2;
    }
    let i_hat = (p - 2.0) * i_sum / n;
    let j_hat = (p - 1.0) * j1 / n - j2 / n;
    let h_hat = h_sum / n;
    let k_hat = k_sum / n;
    if j_hat.abs() <= SUM_V_TOL {
        return Err(TestError::DegenerateCrossInformation);
    }
    let ratio = i_hat / j_hat;
    let delta = s.weighted_sum(|i, x| 1.0 - ratio * phi[i] * ((1.0 - x) * (1.0 + x)).sqrt())
        / n.sqrt();
    let gamma = (1.0 - 2.0 * ratio * h_hat + ratio * ratio * k_hat) / (p - 1.0);
    Ok(EfficientScoreStats {
        i_hat,
        j_hat,
        h_hat,
        k_hat,
        delta,
        gamma,
    })
}

/// Functionals behind [`efficient_score_loc`] at a given location.
pub fn efficient_score_stats(
    sample: &DirectionalSample,
    theta_hat: &UnitVector,
    f: &AngularFunction,
) -> Result<EfficientScoreStats> {
    check_p(theta_hat.dim())?;
    efficient_from_signs(&Signs::new(sample, theta_hat)?, f)
}

pub(crate) struct Battery {
    spec: specified::Battery,
    mode: ThetaMode,
    loc: Result<f64>,
}

impl Battery {
    pub(crate) fn new(sample: &DirectionalSample, estimator: &Estimator) -> Result<Self> {
        check_p(sample.dim())?;
        let theta = estimator.estimate(sample)?;
        let signs = Signs::new(sample, &theta)?;
        let loc = loc_stats_from_signs(&signs).and_then(|s| s.statistic());
        Ok(Self {
            spec: specified::Battery::from_signs(signs, theta.clone()),
            mode: ThetaMode::Estimated {
                theta,
                estimator: estimator.name().to_owned(),
            },
            loc,
        })
    }

    pub(crate) fn run(&self, method: Method, score: Option<&AngularFunction>) -> Result<TestResult> {
        let p = self.mode.theta().dim();
        let chi = |df| Reference::ChiSquare { df };
        let q_sc = self.spec.q_sc();
        let loc = || self.loc.clone();
        let (stat, reference, clamped) = match method {
            Method::USc => (q_sc, chi(df_sc(p)), false),
            Method::ULoc => (loc()?, chi(df_loc(p)), false),
            Method::UHyb => (loc()? + q_sc, chi(df_loc(p) + df_sc(p)), false),
            Method::UHybF => {
                let (s, c) = fisher(loc()?, q_sc, p)?;
                (s, chi(4), c)
            }
            Method::ULocEff => {
                let default = AngularFunction::vmf(1.0);
                let f = score.unwrap_or(&default);
                let st = efficient_from_signs(self.spec_signs(), f)?;
                (st.statistic()?, chi(df_loc(p)), false)
            }
            other => return Err(TestError::MissingTheta(other)),
        };
        let mut r = TestResult::new(method, stat, reference, self.mode.clone(), self.n(), p)?;
        r.clamped = clamped;
        Ok(r)
    }

    fn spec_signs(&self) -> &Signs {
        self.spec.signs()
    }

    fn n(&self) -> usize {
        self.spec.signs().n()
    }
}

fn run(method: Method, sample: &DirectionalSample, estimator: &Estimator) -> Result<TestResult> {
    Battery::new(sample, estimator)?.run(method, None)
}

/// Scatter test evaluated at `θ̂`.
pub fn q_sc_unspecified(sample: &DirectionalSample, estimator: &Estimator) -> Result<TestResult> {
    run(Method::USc, sample, estimator)
}

/// vMF-efficient location test `Δ̂ᵀ Γ̂⁻¹ Δ̂`, `χ²_{p-1}` reference.
pub fn q_loc_vmf(sample: &DirectionalSample, estimator: &Estimator) -> Result<TestResult> {
    run(Method::ULoc, sample, estimator)
}

pub fn q_hyb_vmf(sample: &DirectionalSample, estimator: &Estimator) -> Result<TestResult> {
    run(Method::UHyb, sample, estimator)
}

pub fn q_hyb_fisher_vmf(sample: &DirectionalSample, estimator: &Estimator) -> Result<TestResult> {
    run(Method::UHybF, sample, estimator)
}

/// Efficient location test for score function `f`; valid whatever the true
/// angular function of the data.
pub fn efficient_score_loc(
    sample: &DirectionalSample,
    estimator: &Estimator,
    f: &AngularFunction,
) -> Result<TestResult> {
    Battery::new(sample, estimator)?.run(Method::ULocEff, Some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reconstruct, tangent_frame, SignCosine};

    fn sample(v: &[f64], u: &[[f64; 2]]) -> (DirectionalSample, UnitVector) {
        let theta = UnitVector::basis(3, 0).unwrap();
        let f = tangent_frame(&theta);
        let rows = v
            .iter()
            .zip(u)
            .map(|(&v, u)| {
                reconstruct(
                    &SignCosine {
                        v,
                        u: DVector::from_column_slice(u),
                    },
                    &f,
                )
            })
            .collect();
        (DirectionalSample::from_rows(rows).unwrap(), theta)
    }

    #[test]
    fn hand_case() {
        let (s, t) = sample(&[0.0, 0.6], &[[1.0, 0.0], [0.0, 1.0]]);
        let st = unspecified_loc_stats(&s, &t).unwrap();
        assert!((st.d_hat - 0.625).abs() < 1e-12);
        assert!((st.e_hat - 0.9).abs() < 1e-12);
        assert!((st.f_hat - 0.18).abs() < 1e-12);
        // Δ̂ = 2^{-1/2} ((1 - 0.625)(1,0) + (1 - 0.625·0.8)(0,1))
        let r = 2f64.sqrt().recip();
        assert!((st.delta_hat[0] - 0.375 * r).abs() < 1e-12);
        assert!((st.delta_hat[1] - 0.5 * r).abs() < 1e-12);
        let g = (1.0 - 2.0 * 0.625 * 0.9 + 0.625f64.powi(2) * 0.82) / 2.0;
        assert!((st.gamma_hat - g).abs() < 1e-12);

        let eff = efficient_score_stats(&s, &t, &AngularFunction::vmf(3.0)).unwrap();
        assert!((eff.i_hat - 0.375).abs() < 1e-12);
        assert!((eff.j_hat - 2.0 * 3.0 * 0.3).abs() < 1e-12);
        assert!((eff.h_hat - 3.0 * 0.9).abs() < 1e-12);
        assert!((eff.k_hat - 9.0 * 0.82).abs() < 1e-12);
        assert!((eff.statistic().unwrap() - st.statistic().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair_has_zero_delta() {
        let (s, t) = sample(&[0.4, 0.4], &[[0.6, 0.8], [-0.6, -0.8]]);
        let st = unspecified_loc_stats(&s, &t).unwrap();
        assert!(st.delta_hat.norm() < 1e-15);
    }

    #[test]
    fn guards() {
        let (s, t) = sample(&[0.3, -0.3], &[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(unspecified_loc_stats(&s, &t).unwrap_err(), TestError::UndefinedD);
        let (s, t) = sample(&[0.3, 0.5], &[[1.0, 0.0], [0.0, 1.0]]);
        let f = AngularFunction::custom("no score", |t| 1.0 + t);
        assert!(matches!(
            efficient_score_stats(&s, &t, &f),
            Err(TestError::MissingScore(_))
        ));
        assert_eq!(
            efficient_score_stats(&s, &t, &AngularFunction::uniform()).unwrap_err(),
            TestError::DegenerateCrossInformation
        );
    }

    #[test]
    fn fixed_estimator_matches_specified() {
        let (s, t) = sample(&[0.3, 0.5, -0.1], &[[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]]);
        let a = q_sc_unspecified(&s, &Estimator::Fixed(t.clone())).unwrap();
        let b = specified::q_sc(&s, &t).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert!(matches!(a.theta_mode, ThetaMode::Estimated { .. }));
    }
}
