//! Angular functions `g` on `[-1, 1]` and their log-derivatives.

use std::fmt;
use std::sync::Arc;

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Vmf { eta: f64 },
    Uniform,
    ExpArcsin { kappa: f64 },
    Custom {
        g: Func,
        phi: Option<Func>,
        phi_prime: Option<Func>,
    },
}

/// The function `g` defining a rotationally symmetric density
/// `x ↦ c_{p,g} g(xᵀθ)`, with its score `φ_g = ġ/g` when known.
#[derive(Clone)]
pub struct AngularFunction {
    label: String,
    kind: Kind,
}

impl fmt::Debug for AngularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularFunction")
            .field("label", &self.label)
            .finish()
    }
}

impl AngularFunction {
    /// `g(t) = exp(η t)`.
    pub fn vmf(eta: f64) -> Self {
        assert!(eta.is_finite() && eta >= 0.0, "vMF concentration must be finite and >= 0");
        if eta == 0.0 {
            return Self::uniform();
        }
        Self {
            label: format!("vmf({eta})"),
            kind: Kind::Vmf { eta },
        }
    }

    /// `g ≡ 1`, the uniform distribution.
    pub fn uniform() -> Self {
        Self {
            label: "uniform".into(),
            kind: Kind::Uniform,
        }
    }

    /// `g(t) = exp(κ arcsin t)`, the family for which `J_p(g) = I_p(g)^2`.
    pub fn exp_arcsin(kappa: f64) -> Self {
        assert!(kappa.is_finite(), "kappa must be finite");
        Self {
            label: format!("exp_arcsin({kappa})"),
            kind: Kind::ExpArcsin { kappa },
        }
    }

    /// A user-supplied `g`; `phi` and `phi_prime` are `ġ/g` and its
    /// derivative, needed only by the score-based functionals.
    pub fn custom<G>(label: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: Kind::Custom {
                g: Arc::new(g),
                phi: None,
                phi_prime: None,
            },
        }
    }

    pub fn with_score<P, Q>(mut self, phi: P, phi_prime: Q) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Kind::Custom {
            phi: ref mut a,
            phi_prime: ref mut b,
            ..
        } = self.kind
        {
            *a = Some(Arc::new(phi));
            *b = Some(Arc::new(phi_prime));
        }
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Concentration when this is a vMF angular function (`0` for uniform).
    pub fn vmf_eta(&self) -> Option<f64> {
        match self.kind {
            Kind::Vmf { eta } => Some(eta),
            Kind::Uniform => Some(0.0),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Custom { g, .. } => g(t),
            _ => self.ln_eval(t).exp(),
        }
    }

    /// `ln g(t)`; avoids overflow for large concentrations.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Vmf { eta } => eta * t,
            Kind::Uniform => 0.0,
            Kind::ExpArcsin { kappa } => kappa * t.clamp(-1.0, 1.0).asin(),
            Kind::Custom { g, .. } => g(t).ln(),
        }
    }

    pub fn has_score(&self) -> bool {
        !matches!(&self.kind, Kind::Custom { phi: None, .. })
    }

    /// `φ_g(t) = ġ(t)/g(t)`.
    pub fn phi(&self, t: f64) -> Option<f64> {
        match &self.kind {
            Kind::Vmf { eta } => Some(*eta),
            Kind::Uniform => Some(0.0),
            Kind::ExpArcsin { kappa } => Some(kappa / ((1.0 - t) * (1.0 + t)).sqrt()),
            Kind::Custom { phi, .. } => phi.as_ref().map(|f| f(t)),
        }
    }

    /// `φ_g'(t)`.
    pub fn phi_prime(&self, t: f64) -> Option<f64> {
        match &self.kind {
            Kind::Vmf { .. } | Kind::Uniform => Some(0.0),
            Kind::ExpArcsin { kappa } => {
                let s = (1.0 - t) * (1.0 + t);
                Some(kappa * t / (s * s.sqrt()))
            }
            Kind::Custom { phi_prime, .. } => phi_prime.as_ref().map(|f| f(t)),
        }
    }

    /// Largest discrepancy between `φ_g` and a central difference of `ln g`
    /// over an interior grid; `None` when no score is attached.
    pub fn score_discrepancy(&self) -> Option<f64> {
        if !self.has_score() {
            return None;
        }
        let h = 1e-6;
        let mut worst = 0.0f64;
        for i in 1..200 {
            let t = -0.95 + 1.9 * i as f64 / 200.0;
            let fd = (self.ln_eval(t + h) - self.ln_eval(t - h)) / (2.0 * h);
            let phi = self.phi(t)?;
            worst = worst.max((fd - phi).abs() / phi.abs().max(1.0));
        }
        Some(worst)
    }

    pub(crate) fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scores_match_finite_differences() {
        for g in [
            AngularFunction::vmf(2.0),
            AngularFunction::uniform(),
            AngularFunction::exp_arcsin(1.5),
        ] {
            assert!(g.score_discrepancy().unwrap() < 1e-5, "{}", g.label());
        }
        let custom = AngularFunction::custom("quad", |t| 1.0 + t * t)
            .with_score(|t| 2.0 * t / (1.0 + t * t), |t| 2.0 * (1.0 - t * t) / (1.0 + t * t).powi(2));
        assert!(custom.score_discrepancy().unwrap() < 1e-5);
        let wrong = AngularFunction::custom("quad", |t| 1.0 + t * t).with_score(|t| t, |_| 1.0);
        assert!(wrong.score_discrepancy().unwrap() > 1e-2);
        assert!(AngularFunction::custom("x", |_| 1.0).score_discrepancy().is_none());
    }

    #[test]
    fn eval_and_labels() {
        let g = AngularFunction::vmf(2.0);
        assert!((g.eval(0.5) - 1f64.exp()).abs() < 1e-15);
        assert_eq!(g.vmf_eta(), Some(2.0));
        assert_eq!(AngularFunction::vmf(0.0).label(), "uniform");
        assert!(AngularFunction::exp_arcsin(1.0).vmf_eta().is_none());
    }
}
